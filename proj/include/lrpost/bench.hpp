#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrpost/io.hpp"

namespace lrpost {

/// Where a sweep gets its problem from.
struct ProblemSource {
  /// "heat", "deconvolution" or "file".
  std::string kind = "heat";
  std::string path;
  HeatConfig heat;
  DeconvolutionConfig deconvolution;
};

InverseProblem build_problem(const ProblemSource& source);

/// Row families of a sweep. `joint1` / `joint2` pair the optimal covariance
/// with the structure-preserving / structure-ignoring optimal mean.
enum class SweepFamily { cov, mean1, mean2, joint1, joint2 };

std::string_view sweep_family_name(SweepFamily f);
/// Accepts the names above; "joint" expands to joint1 and joint2.
std::vector<SweepFamily> parse_sweep_families(const std::vector<std::string>& names);

struct ExperimentConfig {
  ProblemSource problem;
  /// Empty means every rank 0..n.
  std::vector<Index> ranks;
  std::vector<SweepFamily> families = {SweepFamily::cov, SweepFamily::mean1, SweepFamily::mean2,
                                       SweepFamily::joint1, SweepFamily::joint2};
  DivergenceSpec divergence = DivergenceSpec::kl_reverse();
  std::uint64_t mc_samples = 10000;
  std::uint64_t seed = 0;
  /// "csv" or "json".
  std::string output = "csv";
  std::optional<std::string> plot;
};

/// Applies the fields present in `j` on top of `base`.
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});

struct LossRow {
  Index rank = 0;
  SweepFamily family = SweepFamily::cov;
  std::string divergence;
  double closed_form = 0.0;
  std::optional<double> mc_estimate;
  std::optional<double> mc_stderr;
  bool unique = true;
  /// lambda_{r+1}, the first eigenvalue left out (0 past the end).
  double lambda_tail_head = 0.0;
};

struct LossTable {
  std::vector<LossRow> rows;
  Index rank_h = 0;
};

/// Closed-form losses for every (rank, family) and, when mc_samples > 0,
/// Monte Carlo estimates over Y ~ N(0, C_y) for the mean and joint rows.
///
/// Mean rows estimate E ||A Y - m_pos(Y)||^2_{C_pos^{-1}}; this matches the
/// closed form for the KL and Renyi divergences, so the Monte Carlo columns
/// stay empty when the divergence is Amari or Hellinger. Joint rows are always
/// reverse-KL and estimate E KL(N(A Y, C_r^opt) || N(m_pos(Y), C_pos)).
/// Covariance rows do not depend on Y and carry no estimate. Sample k uses
/// counter index k of the seeded stream, so results do not depend on
/// evaluation order.
LossTable run_sweep(const InverseProblem& p, const ExperimentConfig& cfg);
LossTable run_sweep(const ExperimentConfig& cfg);

/// Header `rank,family,divergence,closed_form,mc_estimate,mc_stderr,unique`;
/// floats with 17 significant digits, empty fields where no estimate exists.
std::string to_csv(const LossTable& table);
Json to_json(const LossTable& table);

/// Self-contained SVG of closed-form loss against rank, log scale.
std::string loss_plot_svg(const LossTable& table);

struct SpectrumRow {
  Index index = 0;  // 1-based
  double lambda = 0.0;
  double ratio = 0.0;
  double variance_ratio = 1.0;
};

struct SpectrumReport {
  std::vector<SpectrumRow> rows;
  Index rank_h = 0;
};

/// One row per i <= min(m, n).
SpectrumReport spectrum_report(const InverseProblem& p);
std::string to_csv(const SpectrumReport& report);
Json to_json(const SpectrumReport& report);

struct ProjectionComparison {
  Index rank = 0;
  Vec y;
  /// Max-norm differences between the projected problem's exact posterior
  /// and (A_r^{opt,(2)} y, C_r^opt).
  double mean_diff = 0.0;
  double cov_diff = 0.0;
};

ProjectionComparison project_and_compare(const InverseProblem& p, Index r, std::uint64_t seed);
Json to_json(const ProjectionComparison& cmp);

/// Exact "%.17g" formatting.
std::string format_double(double x);

}  // namespace lrpost
