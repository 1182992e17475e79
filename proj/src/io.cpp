#include "lrpost/io.hpp"

#include <fstream>
#include <set>

#include "lrpost/errors.hpp"

namespace lrpost {

namespace {

void require_keys(const Json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw InputError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw InputError(std::string(what) + ": unknown field '" + key + "'");
    }
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Mat matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InputError(std::string(what) + ": expected a 2-D array");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().is_array() ? j.front().size() : 0);
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw InputError(std::string(what) + ": rows must be arrays of equal length");
    }
    for (Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InputError(std::string(what) + ": entries must be numbers");
      out(i, c) = v.get<double>();
    }
  }
  return out;
}

Json vector_to_json(const Vec& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array");
  Vec out(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(std::string(what) + ": entries must be numbers");
    out(static_cast<Index>(i)) = j[i].get<double>();
  }
  return out;
}

Json problem_to_json(const InverseProblem& p) {
  Json meta = p.meta().is_object() ? p.meta() : Json::object();
  meta["basis"] = p.prior().basis;
  return {{"prior_variances", vector_to_json(p.prior().variances)},
          {"g", matrix_to_json(p.g())},
          {"noise_cov", matrix_to_json(p.noise_cov())},
          {"meta", meta}};
}

InverseProblem problem_from_json(const Json& j) {
  require_keys(j, {"prior_variances", "g", "noise_cov", "meta"}, "problem");
  for (const char* key : {"prior_variances", "g", "noise_cov"}) {
    if (!j.contains(key)) throw InputError(std::string("problem: missing field '") + key + "'");
  }
  SpectralPrior prior;
  prior.variances = vector_from_json(j.at("prior_variances"), "prior_variances");
  Json meta = j.value("meta", Json::object());
  if (meta.is_object() && meta.contains("basis") && meta["basis"].is_string()) {
    prior.basis = meta["basis"].get<std::string>();
    meta.erase("basis");
  }
  return InverseProblem(matrix_from_json(j.at("g"), "g"),
                        matrix_from_json(j.at("noise_cov"), "noise_cov"), std::move(prior),
                        std::move(meta));
}

DeconvolutionConfig deconvolution_config_from_json(const Json& j) {
  require_keys(j,
               {"m", "n", "kernel_eigs", "prior_coeffs", "breakpoints", "weight_fn",
                "weight_coeffs"},
               "deconvolution config");
  DeconvolutionConfig cfg;
  cfg.m = get_or<Index>(j, "m", cfg.m);
  cfg.n = get_or<Index>(j, "n", cfg.n);
  cfg.kernel_eigs = get_or(j, "kernel_eigs", cfg.kernel_eigs);
  cfg.prior_coeffs = get_or(j, "prior_coeffs", cfg.prior_coeffs);
  cfg.breakpoints = get_or(j, "breakpoints", cfg.breakpoints);
  cfg.weight_fn = get_or(j, "weight_fn", cfg.weight_fn);
  cfg.weight_coeffs = get_or(j, "weight_coeffs", cfg.weight_coeffs);
  return cfg;
}

Json deconvolution_config_to_json(const DeconvolutionConfig& cfg) {
  return {{"m", cfg.m},
          {"n", cfg.n},
          {"kernel_eigs", cfg.kernel_eigs},
          {"prior_coeffs", cfg.prior_coeffs},
          {"breakpoints", cfg.breakpoints},
          {"weight_fn", cfg.weight_fn},
          {"weight_coeffs", cfg.weight_coeffs}};
}

HeatConfig heat_config_from_json(const Json& j) {
  require_keys(j, {"m", "n", "s", "T", "observation_points", "seed"}, "heat config");
  HeatConfig cfg;
  cfg.m = get_or<Index>(j, "m", cfg.m);
  cfg.n = get_or<Index>(j, "n", cfg.n);
  cfg.s = get_or(j, "s", cfg.s);
  cfg.horizon = get_or(j, "T", cfg.horizon);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  if (j.contains("observation_points")) {
    for (const Json& pt : j.at("observation_points")) {
      if (!pt.is_array() || pt.size() != 2) {
        throw InputError("heat config: observation points are [x, t] pairs");
      }
      cfg.observation_points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
  }
  return cfg;
}

Json heat_config_to_json(const HeatConfig& cfg) {
  Json points = Json::array();
  for (const auto& [x, t] : cfg.observation_points) points.push_back({x, t});
  return {{"m", cfg.m},   {"n", cfg.n},       {"s", cfg.s},
          {"T", cfg.horizon}, {"seed", cfg.seed}, {"observation_points", points}};
}

Json approximation_to_json(const OptimalMean& mean) {
  return {{"family", std::string(family_name(mean.family))},
          {"rank", mean.rank},
          {"loss_closed_form", mean.closed_form_loss},
          {"a_opt", matrix_to_json(mean.a_opt)},
          {"cov_update", Json::array()},
          {"unique", mean.unique}};
}

Json approximation_to_json(const OptimalCovariance& cov, double loss) {
  return {{"family", "cov"},
          {"rank", cov.rank},
          {"loss_closed_form", loss},
          {"a_opt", Json::array()},
          {"cov_update", matrix_to_json(cov.update_vectors)},
          {"unique", cov.unique}};
}

Json approximation_to_json(const JointApproximation& joint) {
  return {{"family", joint.mean.family == MeanFamily::structure_preserving ? "joint1" : "joint2"},
          {"rank", joint.mean.rank},
          {"loss_closed_form", joint.loss},
          {"a_opt", matrix_to_json(joint.mean.a_opt)},
          {"cov_update", matrix_to_json(joint.covariance.update_vectors)},
          {"unique", joint.unique}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace lrpost
