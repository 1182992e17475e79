#pragma once

#include <Eigen/Dense>

namespace lrpost {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative threshold below which singular values count as zero.
inline constexpr double kDefaultRankTol = 1e-12;

/// Relative gap below which two singular values count as tied.
inline constexpr double kDefaultTieTol = 1e-10;

/// Full singular value decomposition M = U diag(s) V^T.
///
/// `left_vectors` is rows x rows and `right_vectors` is cols x cols; only the
/// first min(rows, cols) columns pair with a singular value. Every right
/// vector has its first nonzero coordinate positive (the matching left vector
/// is flipped with it), and unpaired left vectors follow the same rule, so
/// results are reproducible run to run.
struct Svd {
  Mat left_vectors;
  Vec singular_values;
  Mat right_vectors;
};

/// Symmetric eigendecomposition A = Q diag(values) Q^T with values ascending
/// and the same sign convention as `Svd` applied to the columns of Q.
struct SymmetricEigen {
  Vec values;
  Mat vectors;
};

/// Output of `generalized_reduced_rank`.
struct ReducedRankSolution {
  Mat n_hat;
  double achieved_loss = 0.0;
  bool unique = true;
  Vec tail_singular_values;
  /// Singular values of the projected target P_ran(T) M P_ker(S)^perp.
  Vec singular_values;
};

Svd svd(const Mat& m);

SymmetricEigen symmetric_eigen(const Mat& a);

/// Moore-Penrose pseudoinverse; singular values at or below
/// `rank_tol * sigma_max` are treated as zero.
Mat pinv(const Mat& m, double rank_tol = kDefaultRankTol);

/// Number of singular values above `rank_tol * sigma_max`.
Index numerical_rank(const Vec& singular_values, double rank_tol = kDefaultRankTol);
Index numerical_rank(const Mat& m, double rank_tol = kDefaultRankTol);

/// Best rank-r Frobenius approximation. A matrix whose numerical rank is
/// already at most r is returned unchanged, which makes the operation
/// idempotent bit for bit.
Mat truncated_svd(const Mat& m, Index r);

/// Orthogonal projector onto the column space of `m`.
Mat range_projector(const Mat& m, double rank_tol = kDefaultRankTol);

/// Solves min ||M - T N S||_F over rank(N) <= r and returns the minimal-norm
/// solution N = T^+ (P_ran(T) M P_ker(S)^perp)_r S^+.
///
/// M is p x q, T is p x a and S is b x q; the solution N is a x b. The
/// solution is unique among minimal solutions iff sigma_{r+1} = 0 or
/// sigma_r > sigma_{r+1} for the singular values of the projected target.
ReducedRankSolution generalized_reduced_rank(const Mat& m, const Mat& t, const Mat& s,
                                             Index r, double rank_tol = kDefaultRankTol);

/// Residual of the minimality condition N = P_ker(T)^perp N P_ran(S).
double minimality_residual(const Mat& n, const Mat& t, const Mat& s,
                           double rank_tol = kDefaultRankTol);

/// Reports whether a rank-r truncation of the nonincreasing sequence `sigma`
/// is unique: r == 0, sigma_{r+1} == 0 (numerically), or a strict gap.
bool truncation_is_unique(const Vec& sigma, Index r, double rank_tol = kDefaultRankTol,
                          double tie_tol = kDefaultTieTol);

/// Symmetric square root and inverse square root of an SPD matrix.
Mat spd_sqrt(const Mat& a);
Mat spd_inv_sqrt(const Mat& a);

/// Throws InputError when any entry is NaN or infinite.
void require_finite(const Mat& m, const char* what);

/// Max-norm of A - B.
double max_abs_diff(const Mat& a, const Mat& b);

}  // namespace lrpost
