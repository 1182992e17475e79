#include <doctest.h>

#include <cmath>

#include "lrpost/errors.hpp"
#include "lrpost/gaussian.hpp"
#include "support.hpp"

using namespace lrpost;
using namespace testing_support;

namespace {

using F = DivergenceSpec::Family;

GaussianMeasure scalar(double mean, double var) {
  return GaussianMeasure::from_covariance(Vec::Constant(1, mean), Mat::Constant(1, 1, var));
}

double logdet(const Mat& a) { return std::log(a.partialPivLu().determinant()); }

// Textbook KL(N(m2, C2) || N(m1, C1)) from dense inverses and determinants.
double kl_oracle(const Vec& m2, const Mat& c2, const Vec& m1, const Mat& c1) {
  const Mat c1inv = c1.inverse();
  const Vec d = m2 - m1;
  return 0.5 * ((c1inv * c2).trace() - static_cast<double>(c2.rows()) + d.dot(c1inv * d) +
                logdet(c1) - logdet(c2));
}

// Renyi divergence of order rho in the normalization used by the library.
double renyi_oracle(double rho, const Vec& m2, const Mat& c2, const Vec& m1, const Mat& c1) {
  const Mat mix = rho * c1 + (1 - rho) * c2;
  const Vec d = m2 - m1;
  const double mean_term = 0.5 * d.dot(mix.inverse() * d);
  const double cov_term = ((rho - 1) * (logdet(c2) - logdet(c1)) + (logdet(mix) - logdet(c1))) /
                          (2 * rho * (1 - rho));
  return mean_term + cov_term;
}

std::vector<DivergenceSpec> all_specs() {
  return {DivergenceSpec::kl_forward(), DivergenceSpec::kl_reverse(), DivergenceSpec::renyi(0.2),
          DivergenceSpec::renyi(0.5),   DivergenceSpec::renyi(0.8),   DivergenceSpec::amari(0.3),
          DivergenceSpec::hellinger()};
}

}  // namespace

TEST_CASE("fh_operator examples") {
  std::mt19937_64 gen(1);
  const Mat c = random_spd(gen, 4);
  CHECK(fh_operator(c, c).eigenvalues.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(fh_operator(Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0)).eigenvalues(0) ==
        doctest::Approx(1.0));
}

TEST_CASE("fh_operator matches the Cholesky-whitened oracle") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat c1 = random_spd(gen, 5);
    const Mat c2 = random_spd(gen, 5);
    const FeldmanHajekOperator r = fh_operator(c2, c1);
    // L^{-1} C2 L^{-T} is similar to C1^{-1/2} C2 C1^{-1/2}.
    const Mat l = Eigen::LLT<Mat>(c1).matrixL();
    const Mat whitened = l.triangularView<Eigen::Lower>().solve(
        l.triangularView<Eigen::Lower>().solve(c2).transpose());
    Vec oracle = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (whitened + whitened.transpose()))
                     .eigenvalues()
                     .array() -
                 1.0;
    CHECK((r.eigenvalues - oracle).cwiseAbs().maxCoeff() <= 1e-10);
    const Mat rm = r.matrix();
    CHECK(max_abs_diff(rm, rm.transpose()) <= 1e-10);
    CHECK(r.eigenvalues.minCoeff() > -1.0);
  }
}

TEST_CASE("fh_operator rejects non-SPD covariances") {
  Mat bad = Mat::Identity(2, 2);
  bad(1, 1) = -1;
  CHECK_THROWS_AS(fh_operator(bad, Mat::Identity(2, 2)), DegeneracyError);
  CHECK_THROWS_AS(fh_operator(Mat::Identity(2, 2), bad), DegeneracyError);
  CHECK_THROWS_AS(GaussianMeasure(Vec::Zero(2), Mat::Zero(2, 2)), DegeneracyError);
}

TEST_CASE("logdet2 examples") {
  CHECK(logdet2(Vec::Zero(3)) == 0.0);
  CHECK(logdet2(Vec::Constant(1, 1.0)) == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(logdet2(Vec::Constant(1, -1.0)), SingularityError);
  CHECK_THROWS_AS(logdet2(Vec::Constant(1, -2.0)), SingularityError);
}

TEST_CASE("logdet2 matches det(I + A) e^{-tr A}") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ud(-0.9, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat q = random_orthogonal(gen, 6);
    Vec spectrum(6);
    for (Index i = 0; i < 6; ++i) spectrum(i) = ud(gen);
    const Mat a = q * spectrum.asDiagonal() * q.transpose();
    const double oracle = logdet(Mat::Identity(6, 6) + a) - a.trace();
    const FeldmanHajekOperator r{Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues(), q};
    CHECK(std::abs(logdet2(r) - oracle) <= 1e-10);
  }
}

TEST_CASE("x - log1p(x) is accurate near zero") {
  for (double x : {1e-3, 1e-6, -1e-6, 1e-9, 0.1, -0.1}) {
    // Series 1/2 x^2 - 1/3 x^3 + 1/4 x^4 - ...
    double series = 0.0;
    double p = x;
    for (int k = 2; k < 40; ++k) {
      p *= -x;
      series += -p / k;
    }
    CHECK(x_minus_log1p(x) == doctest::Approx(series).epsilon(1e-13));
  }
  CHECK(x_minus_log1p(1.0) == doctest::Approx(1.0 - std::log(2.0)));
  CHECK(f_kl(1.0) == doctest::Approx((1.0 - std::log(2.0)) / 2).epsilon(1e-15));
}

TEST_CASE("scalar divergence examples") {
  for (const auto& spec : all_specs()) {
    CHECK(divergence(scalar(0.3, 2.0), scalar(0.3, 2.0), spec) == doctest::Approx(0.0));
  }
  CHECK(divergence(scalar(0, 1), scalar(1, 1), DivergenceSpec::kl_forward()) ==
        doctest::Approx(0.5).epsilon(1e-15));
  const double kl = divergence(scalar(0, 2), scalar(0, 1), DivergenceSpec::kl_forward());
  CHECK(kl == doctest::Approx((1 - std::log(2.0)) / 2).epsilon(1e-14));
  // kl_reverse(nu2, nu1) is KL(nu1 || nu2).
  CHECK(divergence(scalar(0, 1), scalar(0, 2), DivergenceSpec::kl_reverse()) ==
        doctest::Approx(kl).epsilon(1e-14));
}

TEST_CASE("Renyi limits recover the two KL directions") {
  std::mt19937_64 gen(4);
  const Index n = 4;
  const GaussianMeasure a = GaussianMeasure::from_covariance(random_vector(gen, n), random_spd(gen, n));
  const GaussianMeasure b = GaussianMeasure::from_covariance(random_vector(gen, n), random_spd(gen, n));
  const double fwd = divergence(a, b, DivergenceSpec::kl_forward());
  const double rev = divergence(a, b, DivergenceSpec::kl_reverse());
  CHECK(std::abs(divergence(a, b, DivergenceSpec::renyi(1 - 1e-6)) - fwd) <= 1e-4);
  CHECK(std::abs(divergence(a, b, DivergenceSpec::renyi(1e-6)) - rev) <= 1e-4);
}

TEST_CASE("divergences match dense oracles") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 5;
    const Vec m1 = random_vector(gen, n), m2 = random_vector(gen, n);
    const Mat c1 = random_spd(gen, n), c2 = random_spd(gen, n);
    const GaussianMeasure nu1 = GaussianMeasure::from_covariance(m1, c1);
    const GaussianMeasure nu2 = GaussianMeasure::from_covariance(m2, c2);
    CHECK(rel_err(divergence(nu2, nu1, DivergenceSpec::kl_forward()), kl_oracle(m2, c2, m1, c1)) <= 1e-10);
    CHECK(rel_err(divergence(nu2, nu1, DivergenceSpec::kl_reverse()), kl_oracle(m1, c1, m2, c2)) <= 1e-10);
    for (double rho : {0.2, 0.5, 0.8}) {
      const double ren = renyi_oracle(rho, m2, c2, m1, c1);
      CHECK(rel_err(divergence(nu2, nu1, DivergenceSpec::renyi(rho)), ren) <= 1e-10);
      const double k = rho * (1 - rho);
      CHECK(rel_err(divergence(nu2, nu1, DivergenceSpec::amari(rho)), (1 - std::exp(-k * ren)) / k) <= 1e-10);
    }
    const double half = renyi_oracle(0.5, m2, c2, m1, c1);
    CHECK(rel_err(divergence(nu2, nu1, DivergenceSpec::hellinger()), std::sqrt(2 * (1 - std::exp(-half)))) <= 1e-10);
  }
}

TEST_CASE("Renyi skew symmetry") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 4;
    const GaussianMeasure a = GaussianMeasure::from_covariance(random_vector(gen, n), random_spd(gen, n));
    const GaussianMeasure b = GaussianMeasure::from_covariance(random_vector(gen, n), random_spd(gen, n));
    for (double rho : {0.2, 0.5, 0.8}) {
      const double lhs = divergence(a, b, DivergenceSpec::renyi(rho));
      const double rhs = divergence(b, a, DivergenceSpec::renyi(1 - rho));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("same-mean divergences are invariant under joint orthogonal conjugation") {
  std::mt19937_64 gen(7);
  const Index n = 5;
  const Mat c1 = random_spd(gen, n), c2 = random_spd(gen, n);
  const Mat q = random_orthogonal(gen, n);
  const Vec m = random_vector(gen, n);
  for (const auto& spec : all_specs()) {
    const double base = divergence(GaussianMeasure::from_covariance(m, c2),
                                   GaussianMeasure::from_covariance(m, c1), spec);
    const double rotated =
        divergence(GaussianMeasure::from_covariance(q * m, q * c2 * q.transpose()),
                   GaussianMeasure::from_covariance(q * m, q * c1 * q.transpose()), spec);
    CHECK(std::abs(base - rotated) <= 1e-10 * std::max(1.0, base));
  }
}

TEST_CASE("divergence ranges on random instances") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 3;
    const GaussianMeasure a = GaussianMeasure::from_covariance(3 * random_vector(gen, n), random_spd(gen, n, 0.1));
    const GaussianMeasure b = GaussianMeasure::from_covariance(random_vector(gen, n), random_spd(gen, n, 0.1));
    const double h = divergence(a, b, DivergenceSpec::hellinger());
    CHECK(h >= 0.0);
    CHECK(h <= std::sqrt(2.0));
    CHECK(divergence(a, b, DivergenceSpec::amari(0.4)) >= 0.0);
    CHECK(divergence(a, b, DivergenceSpec::kl_forward()) >= 0.0);
    CHECK(divergence(a, b, DivergenceSpec::kl_reverse()) >= 0.0);
  }
}

TEST_CASE("same-covariance divergences all equal half the squared mean shift") {
  std::mt19937_64 gen(9);
  const Index n = 4;
  const Mat c = random_spd(gen, n);
  const Vec m = random_vector(gen, n), m_pos = random_vector(gen, n);
  const GaussianMeasure a = GaussianMeasure::from_covariance(m_pos, c);
  const GaussianMeasure b = GaussianMeasure::from_covariance(m, c);
  const double loss = mean_shift_loss(m, m_pos, c);
  const double kl = divergence(a, b, DivergenceSpec::kl_forward());
  CHECK(std::abs(loss - 2 * kl) <= 1e-10 * loss);
  CHECK(std::abs(divergence(a, b, DivergenceSpec::kl_reverse()) - kl) <= 1e-10 * kl);
  for (double rho : {0.1, 0.5, 0.9}) {
    CHECK(std::abs(divergence(a, b, DivergenceSpec::renyi(rho)) - kl) <= 1e-10 * kl);
  }
}

TEST_CASE("mean_shift_loss examples") {
  const Vec one = Vec::Constant(1, 1.0);
  CHECK(mean_shift_loss(one, one, Mat::Identity(1, 1)) == 0.0);
  CHECK(mean_shift_loss(one, Vec::Zero(1), Mat::Constant(1, 1, 0.5)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(mean_shift_loss(one, Vec::Zero(2), Mat::Identity(1, 1)), InputError);
}

TEST_CASE("DivergenceEvaluator agrees with divergence") {
  std::mt19937_64 gen(10);
  const Index n = 4;
  const Mat c1 = random_spd(gen, n), c2 = random_spd(gen, n);
  for (const auto& spec : all_specs()) {
    const DivergenceEvaluator eval(c2, c1, spec);
    for (int k = 0; k < 5; ++k) {
      const Vec m1 = random_vector(gen, n), m2 = random_vector(gen, n);
      const double direct = divergence(GaussianMeasure::from_covariance(m2, c2),
                                       GaussianMeasure::from_covariance(m1, c1), spec);
      CHECK(std::abs(eval(m2 - m1) - direct) <= 1e-12 * std::max(1.0, direct));
      if (spec.family != F::amari && spec.family != F::hellinger) {
        const Mat b = eval.whitened_map(Mat::Identity(n, n));
        CHECK(std::abs(eval.finish(0.5 * (b * (m2 - m1)).squaredNorm()) - direct) <=
              1e-12 * std::max(1.0, direct));
      }
    }
    CHECK(eval.covariance_term() == doctest::Approx(eval(Vec::Zero(n))));
  }
}

TEST_CASE("covariance_divergence works from operator eigenvalues") {
  std::mt19937_64 gen(12);
  const Mat c1 = random_spd(gen, 4), c2 = random_spd(gen, 4);
  const Vec r = fh_operator(c2, c1).eigenvalues;
  for (const auto& spec : all_specs()) {
    const double direct = divergence(GaussianMeasure::from_covariance(Vec::Zero(4), c2),
                                     GaussianMeasure::from_covariance(Vec::Zero(4), c1), spec);
    CHECK(std::abs(covariance_divergence(r, spec) - direct) <= 1e-10 * std::max(1.0, direct));
  }
}

TEST_CASE("DivergenceSpec parsing and validation") {
  CHECK(DivergenceSpec::parse("renyi", 0.5) == DivergenceSpec::renyi(0.5));
  CHECK(DivergenceSpec::parse("kl_forward", std::nullopt) == DivergenceSpec::kl_forward());
  CHECK(DivergenceSpec::renyi(0.5).name() == "renyi(0.5)");
  CHECK(DivergenceSpec::kl_reverse().name() == "kl_reverse");
  CHECK_THROWS_AS(DivergenceSpec::parse("renyi", std::nullopt), InputError);
  CHECK_THROWS_AS(DivergenceSpec::parse("amari", 1.0), InputError);
  CHECK_THROWS_AS(DivergenceSpec::parse("amari", 0.0), InputError);
  CHECK_THROWS_AS(DivergenceSpec::parse("hellinger", 0.5), InputError);
  CHECK_THROWS_AS(DivergenceSpec::parse("tv", std::nullopt), InputError);
  CHECK_THROWS_AS(divergence(scalar(0, 1), scalar(0, 1), DivergenceSpec{F::renyi, 1.5}), InputError);
}

TEST_CASE("measures keep non-symmetric factors") {
  Mat l(2, 2);
  l << 1, 2, 0, 1;
  const GaussianMeasure g(Vec::Zero(2), l);
  CHECK(max_abs_diff(g.covariance(), l * l.transpose()) == 0.0);
  CHECK(g.dim() == 2);
  CHECK_THROWS_AS(divergence(g, scalar(0, 1), DivergenceSpec::kl_forward()), InputError);
}
