#pragma once

#include "hartree_lab/grid.hpp"

// Brute-force reference computations, independent of the FFT-based paths they
// check. Exposed to the CLI (`oracle <name>`) and reused by the test suites.

namespace hartree::oracles {

/// kappa * int_{R^n} |y|^{-gamma} |u(y)|^2 dy at the origin for the Gaussian
/// u = amplitude * exp(-|x|^2 / (2 width^2)), by 1D radial quadrature.
double hartree_origin_gaussian(double gamma, int n, double kappa, double amplitude = 1.0,
                               double width = 1.0);

/// The same value through the multiplier route evaluated analytically in k
/// (radial quadrature against the exact Gaussian transform), using the
/// implemented Riesz constant. Agreement with hartree_origin_gaussian
/// validates the constant.
double hartree_origin_gaussian_kside(double gamma, int n, double kappa, double amplitude = 1.0,
                                     double width = 1.0);

/// Closed-form free evolution of the centered Gaussian with the given width:
/// per dimension (w^2/(w^2+it))^{1/2} exp(-x^2/(2(w^2+it))).
SpectralField free_gaussian_evolution(const GridSpec& g, double amplitude, double width, double t);

/// || omega^sigma u || by direct summation over modes of a naive O(N^2)
/// Fourier transform (no FFT); small grids only.
double mode_sum_norm(const SpectralField& u, double sigma);

}  // namespace hartree::oracles
