#include <doctest.h>

#include <cstdlib>

#include "lrpost/errors.hpp"
#include "lrpost/bayes_linear.hpp"
#include "lrpost/problems.hpp"
#include "support.hpp"

using namespace lrpost;
using namespace testing_support;

namespace {

Mat dense_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

Mat dense_inv_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

InverseProblem zero_forward(Index n, Index m) {
  SpectralPrior prior;
  prior.variances = Vec::LinSpaced(m, 1.0, 0.1);
  Mat noise = Mat::Identity(n, n) * 0.5;
  return InverseProblem(Mat::Zero(n, m), noise, prior);
}

}  // namespace

TEST_CASE("hessian examples") {
  CHECK(hessian(zero_forward(3, 4)).isZero());
  CHECK(hessian(scalar_problem())(0, 0) == doctest::Approx(1.0));
  std::mt19937_64 gen(1);
  const InverseProblem p = random_problem(gen, 4, 7);
  const Mat h = hessian(p);
  CHECK(max_abs_diff(h, h.transpose()) <= 1e-12);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues().minCoeff() >= -1e-12);
  const Vec sg = Eigen::JacobiSVD<Mat>(p.g()).singularValues();
  const Index rank_g = (sg.array() > 1e-12 * sg(0)).count();
  const Vec eh = Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues().reverse();
  CHECK((eh.array() > 1e-10 * eh(0)).count() == rank_g);
  const Mat oracle = p.g().transpose() * p.noise_cov().inverse() * p.g();
  CHECK(max_abs_diff(h, oracle) <= 1e-10 * oracle.cwiseAbs().maxCoeff());
}

TEST_CASE("posterior examples") {
  const Posterior s = posterior(scalar_problem(), Vec::Constant(1, 2.0));
  CHECK(s.mean(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 gen(2);
  const InverseProblem p = random_problem(gen, 5, 8);
  const Posterior zero = posterior(p, Vec::Zero(5));
  CHECK(zero.mean.isZero());

  const Vec y = random_vector(gen, 5);
  const Posterior post = posterior(p, y);
  const Mat precision = p.prior().covariance().inverse() + hessian(p);
  const Mat oracle = precision.inverse();
  CHECK(max_abs_diff(post.covariance, oracle) <= 1e-10 * oracle.cwiseAbs().maxCoeff());
  const Vec mean_oracle = oracle * p.g().transpose() * p.noise_cov().inverse() * y;
  CHECK((post.mean - mean_oracle).cwiseAbs().maxCoeff() <= 1e-10 * mean_oracle.cwiseAbs().maxCoeff());
  CHECK(post.covariance == zero.covariance);
  CHECK(max_abs_diff(posterior_covariance(p), post.covariance) <= 1e-15);
  CHECK((posterior_mean_operator(p) * y - post.mean).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(posterior(p, Vec::Zero(4)), InputError);
}

TEST_CASE("problem validation") {
  SpectralPrior prior;
  prior.variances = Vec::Ones(3);
  CHECK_THROWS_AS(InverseProblem(Mat::Ones(2, 4), Mat::Identity(2, 2), prior), InputError);
  CHECK_THROWS_AS(InverseProblem(Mat::Ones(2, 3), Mat::Identity(3, 3), prior), InputError);
  Mat not_spd = Mat::Identity(2, 2);
  not_spd(1, 1) = -1;
  CHECK_THROWS_AS(InverseProblem(Mat::Ones(2, 3), not_spd, prior), DegeneracyError);
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(InverseProblem(Mat::Ones(2, 3), asym, prior), InputError);
  prior.variances(1) = 0.0;
  CHECK_THROWS_AS(InverseProblem(Mat::Ones(2, 3), Mat::Identity(2, 2), prior), InputError);
}

TEST_CASE("dimension cap comes from the environment") {
  setenv("LOWRANK_BAYES_MAX_DIM", "5", 1);
  CHECK(max_dimension() == 5);
  std::mt19937_64 gen(3);
  CHECK_THROWS_AS(random_problem(gen, 2, 6), InputError);
  setenv("LOWRANK_BAYES_MAX_DIM", "abc", 1);
  CHECK_THROWS_AS(max_dimension(), InputError);
  unsetenv("LOWRANK_BAYES_MAX_DIM");
  CHECK(max_dimension() == kDefaultMaxDim);
}

TEST_CASE("spectrum of a zero forward map") {
  const InverseProblem p = zero_forward(3, 4);
  const PosteriorSpectrum s = spectrum(p);
  CHECK(s.rank == 0);
  CHECK(s.lambdas.isZero());
  CHECK(max_abs_diff(s.s_pos, Mat(p.prior().std_devs().asDiagonal())) <= 1e-15);
  CHECK(max_abs_diff(s.s_y, dense_sqrt(p.noise_cov())) <= 1e-15);
  CHECK(data_covariance(p) == p.noise_cov());
  for (Index i = 0; i < 4; ++i) CHECK(variance_reduction(s, p, i) == doctest::Approx(1.0));
}

TEST_CASE("scalar spectrum") {
  const InverseProblem p = scalar_problem();
  const PosteriorSpectrum s = spectrum(p);
  CHECK(s.lambdas(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(s.ratios(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.rank == 1);
  CHECK(data_covariance(p)(0, 0) == doctest::Approx(2.0));
  CHECK(variance_reduction(s, p, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(variance_reduction(s, p, 1), InputError);
}

TEST_CASE("heat spectrum matches the dense eigendecomposition oracle") {
  HeatConfig cfg;
  cfg.m = 64;
  cfg.n = 8;
  const InverseProblem p = build_heat(cfg);
  const PosteriorSpectrum s = spectrum(p);
  const Mat root = p.prior().std_devs().asDiagonal();
  const Mat pre = root * hessian(p) * root;
  const Vec d = Eigen::SelfAdjointEigenSolver<Mat>(pre).eigenvalues().reverse();
  for (Index i = 0; i < p.param_dim(); ++i) {
    CHECK(std::abs(s.lambdas(i) + d(i) / (1 + d(i))) <= 1e-10);
  }
  for (Index i = 0; i + 1 < p.param_dim(); ++i) CHECK(s.lambdas(i) <= s.lambdas(i + 1));
  CHECK(s.lambdas.maxCoeff() <= 0.0);
  CHECK(s.lambdas.minCoeff() > -1.0);
  CHECK((s.lambdas.array() != 0.0).count() == s.rank);
  for (Index i = 0; i < 5; ++i) {
    CHECK(std::abs(variance_reduction(s, p, i) - (1 + s.lambdas(i))) <= 1e-10);
  }
}

TEST_CASE("spectrum invariants on random problems") {
  std::mt19937_64 gen(4);
  for (auto [n, m] : {std::pair<Index, Index>{4, 9}, {9, 4}, {6, 6}}) {
    const InverseProblem p = random_problem(gen, n, m);
    const PosteriorSpectrum s = spectrum(p);
    const Mat c_pos = posterior_covariance(p);
    const Mat c_y = data_covariance(p);
    CHECK((s.s_pos * s.s_pos.transpose() - c_pos).norm() <= 1e-10 * c_pos.norm());
    CHECK((s.s_y * s.s_y.transpose() - c_y).norm() <= 1e-10 * c_y.norm());
    CHECK(s.rank == std::min(n, m));

    // v_i = sqrt(1 + lambda_i) C_pos^{-1/2} C_pr^{1/2} w_i, orthonormal.
    const Mat pos_inv_sqrt = dense_inv_sqrt(c_pos);
    const Mat pos_sqrt = dense_sqrt(c_pos);
    const Mat pr_sqrt = p.prior().std_devs().asDiagonal();
    const Mat pr_inv_sqrt = p.prior().std_devs().cwiseInverse().asDiagonal();
    for (Index i = 0; i < m; ++i) {
      const Vec v = std::sqrt(1 + s.lambdas(i)) * pos_inv_sqrt * pr_sqrt * s.w.col(i);
      CHECK((v - s.v.col(i)).cwiseAbs().maxCoeff() <= 1e-8);
      // Pencil identity.
      const Vec lhs = pos_sqrt * pr_inv_sqrt * s.w.col(i);
      const Vec rhs = (1 + s.lambdas(i)) * pos_inv_sqrt * pr_sqrt * s.w.col(i);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, lhs.cwiseAbs().maxCoeff()));
    }
    CHECK((s.v.transpose() * s.v - Mat::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-8);

    // C_pos^{1/2} H C_pos^{1/2} has eigenpairs (-lambda_i, v_i).
    const Mat post_pre = pos_sqrt * hessian(p) * pos_sqrt;
    for (Index i = 0; i < m; ++i) {
      CHECK((post_pre * s.v.col(i) + s.lambdas(i) * s.v.col(i)).cwiseAbs().maxCoeff() <= 1e-8);
    }

    // ||h||^2_{C_pos^{-1}} = ||S_pos^{-1} h||^2.
    for (int k = 0; k < 5; ++k) {
      const Vec h = random_vector(gen, m);
      const double direct = h.dot(c_pos.llt().solve(h));
      const double via_root = s.s_pos.partialPivLu().solve(h).squaredNorm();
      CHECK(rel_err(via_root, direct) <= 1e-8);
    }
  }
}

TEST_CASE("subspace of maximal variance reduction") {
  HeatConfig cfg;
  cfg.m = 48;
  cfg.n = 10;
  const InverseProblem p = build_heat(cfg);
  const PosteriorSpectrum s = spectrum(p);
  const Mat c_pos = posterior_covariance(p);
  const Mat c_pr = p.prior().covariance();
  const Mat pr_inv_sqrt = p.prior().std_devs().cwiseInverse().asDiagonal();
  std::mt19937_64 gen(5);
  for (Index r : {1, 2, 3}) {
    const double bound = 1 + s.lambdas(r);
    // Directions C_pr^{-1/2} z with z orthogonal to V_r.
    const double at_w = min_ratio(pr_inv_sqrt * complement_basis(s.w.leftCols(r)), c_pos, c_pr);
    CHECK(std::abs(at_w - bound) <= 1e-8);
    for (int k = 0; k < 20; ++k) {
      const Mat v = random_matrix(gen, p.param_dim(), r);
      CHECK(min_ratio(pr_inv_sqrt * complement_basis(v), c_pos, c_pr) <= bound + 1e-8);
    }
  }
}
