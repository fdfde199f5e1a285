#pragma once

#include <filesystem>

#include "hartree_lab/cauchy.hpp"

// Binary snapshot format shared by profiles and trajectories:
//   magic "HLSN", u32 version, u8 kind,
//   grid header (i32 rank, i32 points, f64 length),
//   model header (f64 gamma, rho, kappa, plus_epsilon; i32 n; i32 level),
//   mesh header (f64 T, i32 K, f64 p) + node times,
//   named complex blocks (u32 name length, name bytes, u64 count, data).
// Little-endian, raw doubles.

namespace hartree {

void save_profile(const AsymptoticProfile& prof, const std::filesystem::path& path);
AsymptoticProfile load_profile(const std::filesystem::path& path);

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace hartree
