#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrpost/bayes_linear.hpp"

namespace lrpost {

/// Interval-averaged observations of a convolution, y_i = <T x, 1_[t_i, t_{i+1}] w> + noise,
/// with kernel and prior diagonal in the sine basis f_k(x) = sqrt(2) sin(k pi x).
struct DeconvolutionConfig {
  Index m = 128;
  Index n = 16;
  /// Kernel eigenvalues b_k (length m). Empty means b_k = k^{-2}.
  std::vector<double> kernel_eigs;
  /// Prior standard deviations c_k (length m). Empty means c_k = k^{-1.1}.
  std::vector<double> prior_coeffs;
  /// t_1 < ... < t_{n+1} in [0, 1]. Empty means n equal intervals.
  std::vector<double> breakpoints;
  /// "constant", "poly" (coefficients in `weight_coeffs`, lowest order first)
  /// or one of the quadrature-backed names "exp", "cos".
  std::string weight_fn = "constant";
  std::vector<double> weight_coeffs;

  /// Fills empty fields with the defaults and validates the result.
  DeconvolutionConfig resolved() const;
};

/// Point observations u(x_i, t_i) of the heat equation on (0, 1) with
/// Dirichlet data, prior covariance (-Laplacian)^{-s}.
struct HeatConfig {
  Index m = 256;
  Index n = 20;
  double s = 1.0;
  double horizon = 0.1;
  /// Observation points (x_i, t_i). Empty means n quasi-uniform points drawn
  /// from a seeded Halton sequence.
  std::vector<std::pair<double, double>> observation_points;
  std::uint64_t seed = 0;

  HeatConfig resolved() const;
};

/// Laplacian eigenvalue k^2 pi^2 and eigenfunction sqrt(2) sin(k pi x), k >= 1.
double dirichlet_eigenvalue(Index k);
double sine_basis(Index k, double x);

/// <f_k, 1_[a, b] w> for the configured weight.
double interval_coefficient(const DeconvolutionConfig& cfg, Index k, double a, double b);

InverseProblem build_deconvolution(const DeconvolutionConfig& cfg = {});
InverseProblem build_heat(const HeatConfig& cfg = {});

/// y = G x + noise with noise ~ N(0, C_obs); x is drawn from the prior when
/// absent. Bit-reproducible for a given seed.
Vec sample_data(const InverseProblem& p, const std::optional<Vec>& x_true, std::uint64_t seed);

/// Truncation diagnostics for the heat prior.
struct HeatTail {
  /// Integral bound on sum_{k>m} a_k^{-s} relative to sum_{k<=m} a_k^{-s}.
  double prior_relative_tail = 0.0;
  /// Bound on the discarded trace of C_pr^{1/2} H C_pr^{1/2} relative to the
  /// retained trace.
  double hessian_relative_tail = 0.0;
};

HeatTail heat_tail(const HeatConfig& cfg);

}  // namespace lrpost
