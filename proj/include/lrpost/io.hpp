#pragma once

#include <string>

#include <json.hpp>

#include "lrpost/bayes_linear.hpp"
#include "lrpost/lowrank.hpp"
#include "lrpost/problems.hpp"

namespace lrpost {

using Json = nlohmann::json;

/// Row-major nested arrays.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j, const char* what);
Json vector_to_json(const Vec& v);
Vec vector_from_json(const Json& j, const char* what);

/// {prior_variances, g, noise_cov, meta}; the prior basis label is kept in
/// meta.basis.
Json problem_to_json(const InverseProblem& p);
InverseProblem problem_from_json(const Json& j);

DeconvolutionConfig deconvolution_config_from_json(const Json& j);
Json deconvolution_config_to_json(const DeconvolutionConfig& cfg);
HeatConfig heat_config_from_json(const Json& j);
Json heat_config_to_json(const HeatConfig& cfg);

/// {family, rank, loss_closed_form, a_opt, cov_update, unique}. Covariance
/// approximations export a_opt as an empty array; mean approximations export
/// an empty cov_update.
Json approximation_to_json(const OptimalMean& mean);
Json approximation_to_json(const OptimalCovariance& cov, double loss);
Json approximation_to_json(const JointApproximation& joint);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lrpost
