#include "lrpost/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "lrpost/errors.hpp"
#include "lrpost/rng.hpp"

namespace lrpost {

namespace {

constexpr std::uint64_t kDataStream = 3;

struct Welford {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double stderr_of_mean() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

// Triangular factor R with ||R z|| = ||M z|| for every z.
Mat column_factor(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  const Index k = std::min(m.rows(), m.cols());
  return qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

// Quadratic forms 0.5 * ||R z_k||^2 for each drawn z_k, averaged in index order.
Welford average_quadratic(const Mat& r, const Mat& draws, double scale, double offset) {
  Welford acc;
  const Mat images = r * draws;
  for (Index k = 0; k < draws.cols(); ++k) {
    acc.add(offset + scale * images.col(k).squaredNorm());
  }
  return acc;
}

bool quadratic_mean_term(const DivergenceSpec& d) {
  using F = DivergenceSpec::Family;
  return d.family == F::kl_forward || d.family == F::kl_reverse || d.family == F::renyi;
}

double tail_head(const PosteriorSpectrum& spec, Index r) {
  return r < spec.param_dim() ? spec.lambdas(r) : 0.0;
}

ProblemSource problem_source_from_json(const Json& j, ProblemSource base) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "heat" || name == "deconvolution") {
      base.kind = name;
    } else {
      base.kind = "file";
      base.path = name;
    }
    return base;
  }
  if (!j.is_object()) throw InputError("config: 'problem' must be a string or an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "kind" && key != "path" && key != "config") {
      throw InputError("config: unknown problem field '" + key + "'");
    }
  }
  if (j.contains("kind")) base.kind = j.at("kind").get<std::string>();
  if (j.contains("path")) base.path = j.at("path").get<std::string>();
  if (j.contains("config")) {
    if (base.kind == "heat") base.heat = heat_config_from_json(j.at("config"));
    else if (base.kind == "deconvolution")
      base.deconvolution = deconvolution_config_from_json(j.at("config"));
    else throw InputError("config: 'config' only applies to generated problems");
  }
  return base;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

InverseProblem build_problem(const ProblemSource& source) {
  if (source.kind == "heat") return build_heat(source.heat);
  if (source.kind == "deconvolution") return build_deconvolution(source.deconvolution);
  if (source.kind == "file") return problem_from_json(read_json_file(source.path));
  throw InputError("unknown problem kind '" + source.kind + "'");
}

std::string_view sweep_family_name(SweepFamily f) {
  switch (f) {
    case SweepFamily::cov: return "cov";
    case SweepFamily::mean1: return "mean1";
    case SweepFamily::mean2: return "mean2";
    case SweepFamily::joint1: return "joint1";
    case SweepFamily::joint2: return "joint2";
  }
  return "";
}

std::vector<SweepFamily> parse_sweep_families(const std::vector<std::string>& names) {
  std::vector<SweepFamily> out;
  auto push = [&](SweepFamily f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  for (const auto& name : names) {
    if (name == "cov") push(SweepFamily::cov);
    else if (name == "mean1") push(SweepFamily::mean1);
    else if (name == "mean2") push(SweepFamily::mean2);
    else if (name == "joint1") push(SweepFamily::joint1);
    else if (name == "joint2") push(SweepFamily::joint2);
    else if (name == "joint") {
      push(SweepFamily::joint1);
      push(SweepFamily::joint2);
    } else {
      throw InputError("unknown family '" + name + "'");
    }
  }
  if (out.empty()) throw InputError("no families selected");
  return out;
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig cfg) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  static const std::vector<std::string> allowed = {"problem", "ranks",  "families", "divergence",
                                                   "order",   "mc_samples", "seed", "output",
                                                   "plot"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InputError("config: unknown field '" + key + "'");
    }
  }
  try {
    if (j.contains("problem")) cfg.problem = problem_source_from_json(j.at("problem"), cfg.problem);
    if (j.contains("ranks")) cfg.ranks = j.at("ranks").get<std::vector<Index>>();
    if (j.contains("families")) {
      cfg.families = parse_sweep_families(j.at("families").get<std::vector<std::string>>());
    }
    if (j.contains("divergence") || j.contains("order")) {
      const std::string family =
          j.contains("divergence") ? j.at("divergence").get<std::string>()
                                   : std::string(cfg.divergence.name().substr(
                                         0, cfg.divergence.name().find('(')));
      std::optional<double> order;
      if (j.contains("order") && !j.at("order").is_null()) order = j.at("order").get<double>();
      cfg.divergence = DivergenceSpec::parse(family, order);
    }
    if (j.contains("mc_samples")) {
      const auto n = j.at("mc_samples").get<long long>();
      if (n < 0) throw InputError("config: mc_samples must be nonnegative");
      cfg.mc_samples = static_cast<std::uint64_t>(n);
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    if (j.contains("plot") && !j.at("plot").is_null()) cfg.plot = j.at("plot").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (cfg.output != "csv" && cfg.output != "json") {
    throw InputError("config: output must be 'csv' or 'json'");
  }
  return cfg;
}

LossTable run_sweep(const ExperimentConfig& cfg) { return run_sweep(build_problem(cfg.problem), cfg); }

LossTable run_sweep(const InverseProblem& p, const ExperimentConfig& cfg) {
  cfg.divergence.validate();
  const Index n = p.data_dim();
  std::vector<Index> ranks = cfg.ranks;
  if (ranks.empty()) {
    for (Index r = 0; r <= n; ++r) ranks.push_back(r);
  }
  for (Index r : ranks) {
    if (r < 0 || r > n) {
      throw InputError("rank " + std::to_string(r) + " outside 0.." + std::to_string(n));
    }
  }

  const PosteriorSpectrum spec = spectrum(p);
  LossTable table;
  table.rank_h = spec.rank;

  const bool mc = cfg.mc_samples > 0;
  Mat draws;
  Mat exact_operator;
  Mat data_factor;
  Mat c_pos;
  Eigen::PartialPivLU<Mat> s_pos_core;
  Vec inv_std;
  if (mc) {
    const CounterRng rng(cfg.seed, kDataStream);
    draws.resize(n, static_cast<Index>(cfg.mc_samples));
    for (Index k = 0; k < draws.cols(); ++k) {
      draws.col(k) = rng.normal_vector(static_cast<std::uint64_t>(k), n);
    }
    exact_operator = posterior_mean_operator(p);
    data_factor = Eigen::LLT<Mat>(data_covariance(p)).matrixL();
    c_pos = posterior_covariance(p);
    inv_std = p.prior().std_devs().cwiseInverse();
    s_pos_core.compute(inv_std.asDiagonal() * spec.s_pos);
  }

  const std::string div_name = cfg.divergence.name();
  for (Index r : ranks) {
    for (SweepFamily fam : cfg.families) {
      LossRow row;
      row.rank = r;
      row.family = fam;
      row.lambda_tail_head = tail_head(spec, r);
      switch (fam) {
        case SweepFamily::cov: {
          row.divergence = div_name;
          row.closed_form = covariance_loss(spec, r, cfg.divergence);
          row.unique = truncation_is_unique(spec.ratios, r);
          break;
        }
        case SweepFamily::mean1:
        case SweepFamily::mean2: {
          const MeanFamily mf = fam == SweepFamily::mean1 ? MeanFamily::structure_preserving
                                                          : MeanFamily::structure_ignoring;
          const OptimalMean mean = optimal_mean(spec, p, mf, r);
          row.divergence = div_name;
          row.closed_form = mean_divergence_loss(r, mf, spec, cfg.divergence);
          row.unique = mean.unique;
          if (mc && quadratic_mean_term(cfg.divergence)) {
            // ||S_pos^{-1} (A - A_pos) L_y z||^2
            const Mat shift = (mean.a_opt - exact_operator) * data_factor;
            const Mat whitened = s_pos_core.solve(inv_std.asDiagonal() * shift);
            const Welford acc = average_quadratic(column_factor(whitened), draws, 1.0, 0.0);
            row.mc_estimate = acc.mean;
            row.mc_stderr = acc.stderr_of_mean();
          }
          break;
        }
        case SweepFamily::joint1:
        case SweepFamily::joint2: {
          const MeanFamily mf = fam == SweepFamily::joint1 ? MeanFamily::structure_preserving
                                                           : MeanFamily::structure_ignoring;
          const JointApproximation joint = joint_approximation(spec, p, mf, r);
          row.divergence = DivergenceSpec::kl_reverse().name();
          row.closed_form = joint.loss;
          row.unique = joint.unique;
          if (mc) {
            const DivergenceEvaluator eval(c_pos, joint.covariance.covariance,
                                           DivergenceSpec::kl_reverse());
            const Mat shift = (exact_operator - joint.mean.a_opt) * data_factor;
            const Welford acc = average_quadratic(column_factor(eval.whitened_map(shift)), draws,
                                                  0.5, eval.covariance_term());
            row.mc_estimate = acc.mean;
            row.mc_stderr = acc.stderr_of_mean();
          }
          break;
        }
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string to_csv(const LossTable& table) {
  std::string out = "rank,family,divergence,closed_form,mc_estimate,mc_stderr,unique\n";
  for (const LossRow& row : table.rows) {
    out += std::to_string(row.rank);
    out += ',';
    out += sweep_family_name(row.family);
    out += ',';
    out += row.divergence;
    out += ',';
    out += format_double(row.closed_form);
    out += ',';
    if (row.mc_estimate) out += format_double(*row.mc_estimate);
    out += ',';
    if (row.mc_stderr) out += format_double(*row.mc_stderr);
    out += ',';
    out += row.unique ? "true" : "false";
    out += '\n';
  }
  return out;
}

Json to_json(const LossTable& table) {
  Json rows = Json::array();
  for (const LossRow& row : table.rows) {
    rows.push_back({{"rank", row.rank},
                    {"family", std::string(sweep_family_name(row.family))},
                    {"divergence", row.divergence},
                    {"closed_form", row.closed_form},
                    {"mc_estimate", row.mc_estimate ? Json(*row.mc_estimate) : Json(nullptr)},
                    {"mc_stderr", row.mc_stderr ? Json(*row.mc_stderr) : Json(nullptr)},
                    {"unique", row.unique},
                    {"lambda_tail_head", row.lambda_tail_head}});
  }
  return {{"rank_h", table.rank_h}, {"rows", rows}};
}

std::string loss_plot_svg(const LossTable& table) {
  constexpr double width = 640, height = 400, left = 70, right = 130, top = 20, bottom = 50;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double rmin = 0, rmax = 1, lmin = 0, lmax = 0;
  bool any = false;
  for (const LossRow& row : table.rows) {
    if (!(row.closed_form > 0.0) || !std::isfinite(row.closed_form)) continue;
    const double lg = std::log10(row.closed_form);
    const double r = static_cast<double>(row.rank);
    series[std::string(sweep_family_name(row.family))].emplace_back(r, lg);
    if (!any) {
      rmin = rmax = r;
      lmin = lmax = lg;
      any = true;
    }
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    lmin = std::min(lmin, lg);
    lmax = std::max(lmax, lg);
  }
  lmin = std::floor(lmin);
  lmax = std::ceil(lmax);
  if (lmax <= lmin) lmax = lmin + 1;
  if (rmax <= rmin) rmax = rmin + 1;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double r) { return left + pw * (r - rmin) / (rmax - rmin); };
  auto py = [&](double lg) { return top + ph * (lmax - lg) / (lmax - lmin); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
                    "font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = lmin; e <= lmax; e += std::max(1.0, std::ceil((lmax - lmin) / 8))) {
    svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(e) + 4) +
           "\" text-anchor=\"end\">1e" + std::to_string(static_cast<int>(e)) + "</text>\n";
    svg += "<line x1=\"" + num(left) + "\" x2=\"" + num(left + pw) + "\" y1=\"" + num(py(e)) +
           "\" y2=\"" + num(py(e)) + "\" stroke=\"#ddd\"/>\n";
  }
  const double step = std::max(1.0, std::ceil((rmax - rmin) / 10));
  for (double r = rmin; r <= rmax; r += step) {
    svg += "<text x=\"" + num(px(r)) + "\" y=\"" + num(top + ph + 16) +
           "\" text-anchor=\"middle\">" + std::to_string(static_cast<int>(r)) + "</text>\n";
  }
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 12) +
         "\" text-anchor=\"middle\">rank r</text>\n";
  svg += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" transform=\"rotate(-90 16 " +
         num(top + ph / 2) + ")\" text-anchor=\"middle\">closed-form loss</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::size_t idx = 0;
  for (const auto& [name, pts] : series) {
    const char* color = colors[idx % 5];
    std::string path;
    for (const auto& [r, lg] : pts) path += num(px(r)) + "," + num(py(lg)) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + path + "\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(idx);
    svg += "<line x1=\"" + num(width - right + 10) + "\" x2=\"" + num(width - right + 30) +
           "\" y1=\"" + num(ly - 4) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + num(width - right + 36) + "\" y=\"" + num(ly) + "\">" + name +
           "</text>\n";
    ++idx;
  }
  svg += "</svg>\n";
  return svg;
}

SpectrumReport spectrum_report(const InverseProblem& p) {
  const PosteriorSpectrum spec = spectrum(p);
  SpectrumReport out;
  out.rank_h = spec.rank;
  const Index count = std::min(p.param_dim(), p.data_dim());
  for (Index i = 0; i < count; ++i) {
    out.rows.push_back({i + 1, spec.lambdas(i), spec.ratios(i), spec.variance_ratio(i)});
  }
  return out;
}

std::string to_csv(const SpectrumReport& report) {
  std::string out = "index,lambda,ratio,variance_ratio\n";
  for (const SpectrumRow& row : report.rows) {
    out += std::to_string(row.index) + ',' + format_double(row.lambda) + ',' +
           format_double(row.ratio) + ',' + format_double(row.variance_ratio) + '\n';
  }
  return out;
}

Json to_json(const SpectrumReport& report) {
  Json rows = Json::array();
  for (const SpectrumRow& row : report.rows) {
    rows.push_back({{"index", row.index},
                    {"lambda", row.lambda},
                    {"ratio", row.ratio},
                    {"variance_ratio", row.variance_ratio}});
  }
  return {{"rank_h", report.rank_h}, {"rows", rows}};
}

ProjectionComparison project_and_compare(const InverseProblem& p, Index r, std::uint64_t seed) {
  const PosteriorSpectrum spec = spectrum(p);
  const ProjectedProblem projected = optimal_projector(spec, p, r);
  ProjectionComparison out;
  out.rank = r;
  out.y = sample_data(p, std::nullopt, seed);
  const Posterior post = posterior(projected.problem, out.y);
  const OptimalMean mean = optimal_mean(spec, p, MeanFamily::structure_ignoring, r);
  const OptimalCovariance cov = optimal_covariance(spec, p.prior(), r);
  out.mean_diff = (post.mean - mean.a_opt * out.y).cwiseAbs().maxCoeff();
  out.cov_diff = max_abs_diff(post.covariance, cov.covariance);
  return out;
}

Json to_json(const ProjectionComparison& cmp) {
  return {{"rank", cmp.rank},
          {"mean_max_abs_diff", cmp.mean_diff},
          {"cov_max_abs_diff", cmp.cov_diff},
          {"y", vector_to_json(cmp.y)}};
}

}  // namespace lrpost
