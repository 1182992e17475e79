#include "lrpost/problems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lrpost/errors.hpp"
#include "lrpost/rng.hpp"

namespace lrpost {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadratureTol = 1e-12;

// Integrals of t^p sin(w t) and t^p cos(w t) over [a, b] for p = 0..max_p.
struct TrigMoments {
  std::vector<double> sin_moments;
  std::vector<double> cos_moments;
};

TrigMoments trig_moments(double w, double a, double b, std::size_t max_p) {
  TrigMoments out;
  out.sin_moments.resize(max_p + 1);
  out.cos_moments.resize(max_p + 1);
  // Product forms keep p = 0 accurate on short intervals.
  const double half_width = std::sin(0.5 * w * (b - a));
  out.sin_moments[0] = 2.0 * std::sin(0.5 * w * (a + b)) * half_width / w;
  out.cos_moments[0] = 2.0 * std::cos(0.5 * w * (a + b)) * half_width / w;
  const double sa = std::sin(w * a), sb = std::sin(w * b);
  const double ca = std::cos(w * a), cb = std::cos(w * b);
  for (std::size_t p = 1; p <= max_p; ++p) {
    const double ap = std::pow(a, static_cast<double>(p));
    const double bp = std::pow(b, static_cast<double>(p));
    const double k = static_cast<double>(p) / w;
    out.sin_moments[p] = -(bp * cb - ap * ca) / w + k * out.cos_moments[p - 1];
    out.cos_moments[p] = (bp * sb - ap * sa) / w - k * out.sin_moments[p - 1];
  }
  return out;
}

std::function<double(double)> named_weight(const std::string& name) {
  if (name == "exp") return [](double t) { return std::exp(t); };
  if (name == "cos") return [](double t) { return std::cos(kPi * t); };
  throw InputError("deconvolution: unknown weight function '" + name + "'");
}

double quadrature(const std::function<double(double)>& f, double a, double b) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, kQuadratureTol,
                                                                    &error);
  if (!std::isfinite(value) || error > kQuadratureTol * std::max(1.0, std::abs(value))) {
    throw NumericalIntegrationError("deconvolution: quadrature did not reach tolerance on [" +
                                    std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return value;
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double out = 0.0;
  double scale = 1.0 / static_cast<double>(base);
  while (i > 0) {
    out += static_cast<double>(i % base) * scale;
    i /= base;
    scale /= static_cast<double>(base);
  }
  return out;
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

double dirichlet_eigenvalue(Index k) {
  const double kk = static_cast<double>(k);
  return kk * kk * kPi * kPi;
}

double sine_basis(Index k, double x) {
  return std::numbers::sqrt2 * std::sin(static_cast<double>(k) * kPi * x);
}

DeconvolutionConfig DeconvolutionConfig::resolved() const {
  DeconvolutionConfig out = *this;
  if (out.m <= 0 || out.n <= 0) throw InputError("deconvolution: m and n must be positive");
  const auto m = static_cast<std::size_t>(out.m);
  const auto n = static_cast<std::size_t>(out.n);
  if (out.kernel_eigs.empty()) {
    for (std::size_t k = 1; k <= m; ++k) out.kernel_eigs.push_back(std::pow(double(k), -2.0));
  }
  if (out.prior_coeffs.empty()) {
    for (std::size_t k = 1; k <= m; ++k) out.prior_coeffs.push_back(std::pow(double(k), -1.1));
  }
  if (out.breakpoints.empty()) {
    for (std::size_t i = 0; i <= n; ++i) out.breakpoints.push_back(double(i) / double(n));
  }
  if (out.kernel_eigs.size() != m || out.prior_coeffs.size() != m) {
    throw InputError("deconvolution: kernel_eigs and prior_coeffs must have length m");
  }
  if (out.breakpoints.size() != n + 1) {
    throw InputError("deconvolution: breakpoints must have length n + 1");
  }
  for (double b : out.kernel_eigs) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw InputError("deconvolution: kernel eigenvalues must be finite and nonnegative");
    }
  }
  for (double c : out.prior_coeffs) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw InputError("deconvolution: prior coefficients must be finite and positive");
    }
  }
  for (std::size_t i = 0; i < n + 1; ++i) {
    const double t = out.breakpoints[i];
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("deconvolution: breakpoints outside [0, 1]");
    if (i > 0 && !(t > out.breakpoints[i - 1])) {
      throw InputError("deconvolution: breakpoints must be strictly increasing");
    }
  }
  if (out.weight_fn == "constant") {
    out.weight_fn = "poly";
    out.weight_coeffs = {1.0};
  } else if (out.weight_fn == "poly") {
    if (out.weight_coeffs.empty()) throw InputError("deconvolution: poly weight needs coefficients");
  } else {
    (void)named_weight(out.weight_fn);
  }
  return out;
}

double interval_coefficient(const DeconvolutionConfig& cfg, Index k, double a, double b) {
  const double w = static_cast<double>(k) * kPi;
  if (cfg.weight_fn == "constant" || cfg.weight_fn == "poly") {
    const std::vector<double> coeffs =
        cfg.weight_fn == "constant" ? std::vector<double>{1.0} : cfg.weight_coeffs;
    const TrigMoments mom = trig_moments(w, a, b, coeffs.size() - 1);
    double acc = 0.0;
    for (std::size_t p = 0; p < coeffs.size(); ++p) acc += coeffs[p] * mom.sin_moments[p];
    return std::numbers::sqrt2 * acc;
  }
  const auto weight = named_weight(cfg.weight_fn);
  return quadrature([&](double t) { return sine_basis(k, t) * weight(t); }, a, b);
}

InverseProblem build_deconvolution(const DeconvolutionConfig& raw) {
  const DeconvolutionConfig cfg = raw.resolved();
  const Index m = cfg.m;
  const Index n = cfg.n;
  // G_{i,j} = b_j a_{j,i} with a_{j,i} = <f_j, 1_[t_i, t_{i+1}] w>.
  Mat g(n, m);
  for (Index i = 0; i < n; ++i) {
    const double a = cfg.breakpoints[static_cast<std::size_t>(i)];
    const double b = cfg.breakpoints[static_cast<std::size_t>(i + 1)];
    for (Index j = 0; j < m; ++j) {
      const double bj = cfg.kernel_eigs[static_cast<std::size_t>(j)];
      g(i, j) = bj == 0.0 ? 0.0 : bj * interval_coefficient(cfg, j + 1, a, b);
    }
  }
  SpectralPrior prior;
  prior.basis = "dirichlet_sine";
  prior.variances = Eigen::Map<const Vec>(cfg.prior_coeffs.data(), m).array().square();

  nlohmann::json meta = {{"generator", "deconvolution"},
                         {"m", m},
                         {"n", n},
                         {"breakpoints", cfg.breakpoints},
                         {"weight_fn", raw.weight_fn}};
  if (cfg.weight_fn == "poly") meta["weight_coeffs"] = cfg.weight_coeffs;
  return InverseProblem(std::move(g), Mat::Identity(n, n), std::move(prior), std::move(meta));
}

HeatConfig HeatConfig::resolved() const {
  HeatConfig out = *this;
  if (out.m <= 0) throw InputError("heat: m must be positive");
  if (!(out.s > 0.5)) throw InputError("heat: s must exceed 1/2 for a trace-class prior");
  if (!(out.horizon > 0.0)) throw InputError("heat: horizon must be positive");
  if (out.observation_points.empty()) {
    if (out.n <= 0) throw InputError("heat: n must be positive");
    const CounterRng rng(out.seed, 0x68656174);
    const double shift_x = rng.uniform(0);
    const double shift_t = rng.uniform(1);
    for (Index i = 0; i < out.n; ++i) {
      const auto idx = static_cast<std::uint64_t>(i + 1);
      const double ux = frac(radical_inverse(idx, 2) + shift_x);
      const double ut = frac(radical_inverse(idx, 3) + shift_t);
      out.observation_points.emplace_back(0.01 + 0.98 * ux, out.horizon * (1.0 - ut));
    }
  }
  out.n = static_cast<Index>(out.observation_points.size());
  for (const auto& [x, t] : out.observation_points) {
    if (!(x > 0.0 && x < 1.0)) throw InputError("heat: observation x must lie in (0, 1)");
    if (!(t > 0.0 && t <= out.horizon)) {
      throw InputError("heat: observation times must lie in (0, horizon]");
    }
  }
  return out;
}

InverseProblem build_heat(const HeatConfig& raw) {
  const HeatConfig cfg = raw.resolved();
  const Index m = cfg.m;
  const Index n = cfg.n;
  Mat g(n, m);
  Vec variances(m);
  for (Index k = 0; k < m; ++k) {
    const double a = dirichlet_eigenvalue(k + 1);
    variances(k) = std::pow(a, -cfg.s);
    for (Index i = 0; i < n; ++i) {
      const auto& [x, t] = cfg.observation_points[static_cast<std::size_t>(i)];
      g(i, k) = std::exp(-t * a) * sine_basis(k + 1, x);
    }
  }
  SpectralPrior prior;
  prior.basis = "dirichlet_sine";
  prior.variances = std::move(variances);

  nlohmann::json points = nlohmann::json::array();
  for (const auto& [x, t] : cfg.observation_points) points.push_back({x, t});
  nlohmann::json meta = {{"generator", "heat"},
                         {"m", m},
                         {"n", n},
                         {"s", cfg.s},
                         {"horizon", cfg.horizon},
                         {"observation_points", points}};
  return InverseProblem(std::move(g), Mat::Identity(n, n), std::move(prior), std::move(meta));
}

Vec sample_data(const InverseProblem& p, const std::optional<Vec>& x_true, std::uint64_t seed) {
  Vec x;
  if (x_true) {
    if (x_true->size() != p.param_dim()) throw InputError("sample_data: x has wrong length");
    x = *x_true;
  } else {
    x = p.prior().std_devs().cwiseProduct(CounterRng(seed, 1).normal_vector(0, p.param_dim()));
  }
  Eigen::LLT<Mat> obs(p.noise_cov());
  if (obs.info() != Eigen::Success) throw DegeneracyError("sample_data: noise covariance");
  const Vec noise = obs.matrixL() * CounterRng(seed, 2).normal_vector(0, p.data_dim());
  return p.g() * x + noise;
}

HeatTail heat_tail(const HeatConfig& raw) {
  const HeatConfig cfg = raw.resolved();
  const double m = static_cast<double>(cfg.m);
  // sum_{k>m} (k^2 pi^2)^{-s} <= int_m^inf (pi x)^{-2s} dx
  const double tail = std::pow(kPi, -2.0 * cfg.s) * std::pow(m, 1.0 - 2.0 * cfg.s) /
                      (2.0 * cfg.s - 1.0);
  double head = 0.0;
  for (Index k = 1; k <= cfg.m; ++k) head += std::pow(dirichlet_eigenvalue(k), -cfg.s);

  // Discarded columns of C_pr^{1/2} G^T have squared norm at most
  // a_k^{-s} sum_i 2 exp(-2 t_i a_k), and exp(-2 t_i a_k) <= exp(-2 t_i a_{m+1}).
  const double a_next = dirichlet_eigenvalue(cfg.m + 1);
  double decay = 0.0;
  for (const auto& [x, t] : cfg.observation_points) decay += 2.0 * std::exp(-2.0 * t * a_next);
  const InverseProblem p = build_heat(cfg);
  const double retained = (p.g() * p.prior().std_devs().asDiagonal()).squaredNorm();
  return {tail / head, decay * tail / retained};
}

}  // namespace lrpost
