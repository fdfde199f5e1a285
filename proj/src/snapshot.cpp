#include "hartree_lab/snapshot.hpp"

#include <cstring>
#include <fstream>

namespace hartree {

namespace {

constexpr char kMagic[4] = {'H', 'L', 'S', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
template <typename T>
void put(std::ostream& os, T v) {
  put_bytes(os, &v, sizeof(T));
}
void put_name(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  put_bytes(os, s.data(), s.size());
}
void put_block(std::ostream& os, const std::string& name, const std::vector<cd>& data) {
  put_name(os, name);
  put<std::uint64_t>(os, data.size());
  put_bytes(os, data.data(), data.size() * sizeof(cd));
}

struct Reader {
  std::ifstream is;
  explicit Reader(const std::filesystem::path& p) : is(p, std::ios::binary) {
    if (!is) throw DomainError("cannot open snapshot " + p.string());
  }
  void get_bytes(void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw DomainError("truncated snapshot");
  }
  template <typename T>
  T get() {
    T v;
    get_bytes(&v, sizeof(T));
    return v;
  }
  std::string get_name() {
    auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    get_bytes(s.data(), n);
    return s;
  }
  std::vector<cd> get_block(const std::string& expect) {
    const std::string name = get_name();
    if (name != expect) throw DomainError("snapshot block '" + name + "', expected '" + expect + "'");
    auto n = get<std::uint64_t>();
    std::vector<cd> data(n);
    get_bytes(data.data(), n * sizeof(cd));
    return data;
  }
};

void write_header(std::ostream& os, std::uint8_t kind, const GridSpec& g, const ModelParams& p,
                  int level, const GradedMesh& mesh) {
  put_bytes(os, kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint8_t>(os, kind);
  put<std::int32_t>(os, g.rank);
  put<std::int32_t>(os, g.points);
  put<double>(os, g.length);
  put<double>(os, p.gamma);
  put<double>(os, p.rho);
  put<double>(os, p.kappa);
  put<double>(os, p.plus_epsilon);
  put<std::int32_t>(os, p.n);
  put<std::int32_t>(os, level);
  put<double>(os, mesh.final_time);
  put<std::int32_t>(os, mesh.count);
  put<double>(os, mesh.power);
  put_bytes(os, mesh.nodes.data(), mesh.nodes.size() * sizeof(double));
}

struct Header {
  GridSpec grid;
  ModelParams params;
  int level;
  GradedMesh mesh;
};

Header read_header(Reader& r, std::uint8_t want_kind) {
  char m[4];
  r.get_bytes(m, 4);
  if (std::memcmp(m, kMagic, 4) != 0) throw DomainError("not a snapshot file");
  if (r.get<std::uint32_t>() != kVersion) throw DomainError("unsupported snapshot version");
  const auto kind = r.get<std::uint8_t>();
  if (kind != want_kind) throw DomainError("snapshot holds a different object kind");
  Header h;
  const int rank = r.get<std::int32_t>();
  const int points = r.get<std::int32_t>();
  const double length = r.get<double>();
  h.grid = GridSpec::make(rank, points, length);
  const double gamma = r.get<double>(), rho = r.get<double>(), kappa = r.get<double>(),
               eps = r.get<double>();
  const int n = r.get<std::int32_t>();
  h.level = r.get<std::int32_t>();
  h.params = ModelParams::validated(gamma, rho, kappa, n, eps, /*relax_gamma=*/true);
  h.mesh.final_time = r.get<double>();
  h.mesh.count = r.get<std::int32_t>();
  h.mesh.power = r.get<double>();
  h.mesh.nodes.resize(h.mesh.count);
  r.get_bytes(h.mesh.nodes.data(), h.mesh.nodes.size() * sizeof(double));
  return h;
}

}  // namespace

void save_profile(const AsymptoticProfile& prof, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot write snapshot " + path.string());
  write_header(os, 1, prof.grid, prof.params, prof.level, prof.mesh);
  std::vector<cd> v0hat(prof.grid.size());
  fft::forward(prof.grid, prof.v0.values(), v0hat);
  put_block(os, "v0", v0hat);
  put_block(os, "g0", prof.g0_hat);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(prof.va_hat.size()));
  for (std::size_t i = 0; i < prof.va_hat.size(); ++i) {
    put_block(os, "va", prof.va_hat[i]);
    put_block(os, "pb", prof.phib_hat[i]);
    put_block(os, "pc", prof.phic_hat[i]);
  }
}

AsymptoticProfile load_profile(const std::filesystem::path& path) {
  Reader r(path);
  Header h = read_header(r, 1);
  AsymptoticProfile prof;
  prof.level = h.level;
  prof.grid = h.grid;
  prof.params = h.params;
  prof.mesh = h.mesh;
  prof.interp_uses = std::make_shared<std::atomic<long>>(0);
  auto v0hat = r.get_block("v0");
  prof.v0 = to_physical(h.grid, v0hat);
  prof.a0 = sobolev_norm(prof.v0, NormSpec::sobolev(h.params.rho));
  prof.g0_hat = r.get_block("g0");
  prof.table = std::make_shared<const CutoffIntegralTable>(h.params.gamma);
  const auto nodes = r.get<std::uint32_t>();
  prof.va_hat.resize(nodes);
  prof.phib_hat.resize(nodes);
  prof.phic_hat.resize(nodes);
  for (std::uint32_t i = 0; i < nodes; ++i) {
    prof.va_hat[i] = r.get_block("va");
    prof.phib_hat[i] = r.get_block("pb");
    prof.phic_hat[i] = r.get_block("pc");
  }
  prof.committed_t1_error =
      std::pow(prof.mesh.nodes.front(), std::max(h.params.lambda(1.0), 0.0));
  return prof;
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot write snapshot " + path.string());
  const ModelParams dummy = ModelParams::validated(0.45, 0.95, 0.0, traj.grid.rank, 0.05, true);
  write_header(os, 2, traj.grid, dummy, 0, traj.mesh);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(traj.states_hat.size()));
  for (const auto& s : traj.states_hat) put_block(os, "st", s);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  Reader r(path);
  Header h = read_header(r, 2);
  Trajectory t;
  t.grid = h.grid;
  t.mesh = h.mesh;
  const auto nodes = r.get<std::uint32_t>();
  t.states_hat.resize(nodes);
  for (std::uint32_t i = 0; i < nodes; ++i) t.states_hat[i] = r.get_block("st");
  return t;
}

}  // namespace hartree
