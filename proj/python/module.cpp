#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lrpost/bench.hpp"
#include "lrpost/errors.hpp"
#include "lrpost/io.hpp"
#include "lrpost/lowrank.hpp"
#include "lrpost/problems.hpp"

namespace py = pybind11;
using namespace lrpost;

namespace {

InverseProblem make_problem(const Mat& g, const Mat& noise_cov, const Vec& prior_variances) {
  SpectralPrior prior;
  prior.variances = prior_variances;
  return InverseProblem(g, noise_cov, prior);
}

DivergenceSpec divergence_spec(const std::string& family, std::optional<double> order) {
  return DivergenceSpec::parse(family, order);
}

py::dict spectrum_dict(const PosteriorSpectrum& s) {
  py::dict out;
  out["lambdas"] = s.lambdas;
  out["ratios"] = s.ratios;
  out["w"] = s.w;
  out["phi"] = s.phi;
  out["rank"] = s.rank;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimal low-rank approximations of linear Gaussian posteriors";

  auto base = py::register_exception<Error>(m, "LrpostError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<NumericalIntegrationError>(m, "NumericalIntegrationError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<InverseProblem>(m, "Problem")
      .def(py::init(&make_problem), py::arg("g"), py::arg("noise_cov"), py::arg("prior_variances"))
      .def_property_readonly("g", &InverseProblem::g)
      .def_property_readonly("noise_cov", &InverseProblem::noise_cov)
      .def_property_readonly("prior_variances",
                             [](const InverseProblem& p) { return p.prior().variances; })
      .def_property_readonly("param_dim", &InverseProblem::param_dim)
      .def_property_readonly("data_dim", &InverseProblem::data_dim)
      .def("to_json", [](const InverseProblem& p) { return problem_to_json(p).dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return problem_from_json(Json::parse(text)); });

  m.def("heat_problem", [](const std::string& config_json) {
    return build_heat(heat_config_from_json(Json::parse(config_json)));
  }, py::arg("config_json") = "{}");
  m.def("deconvolution_problem", [](const std::string& config_json) {
    return build_deconvolution(deconvolution_config_from_json(Json::parse(config_json)));
  }, py::arg("config_json") = "{}");
  m.def("sample_data", &sample_data, py::arg("problem"), py::arg("x_true") = std::nullopt,
        py::arg("seed") = 0);

  m.def("posterior_covariance", &posterior_covariance);
  m.def("posterior_mean_operator", &posterior_mean_operator);
  m.def("posterior", [](const InverseProblem& p, const Vec& y) {
    const Posterior post = posterior(p, y);
    return py::make_tuple(post.mean, post.covariance);
  });
  m.def("spectrum", [](const InverseProblem& p) { return spectrum_dict(spectrum(p)); });

  m.def("optimal_covariance", [](const InverseProblem& p, Index r) {
    const OptimalCovariance c = optimal_covariance(spectrum(p), p.prior(), r);
    return py::make_tuple(c.covariance, c.unique);
  });
  m.def("covariance_loss",
        [](const InverseProblem& p, Index r, const std::string& family, std::optional<double> order) {
          return covariance_loss(spectrum(p), r, divergence_spec(family, order));
        },
        py::arg("problem"), py::arg("rank"), py::arg("divergence") = "kl_reverse",
        py::arg("order") = std::nullopt);
  m.def("optimal_mean", [](const InverseProblem& p, Index r, const std::string& family) {
    const OptimalMean mean = optimal_mean(spectrum(p), p, parse_mean_family(family), r);
    return py::make_tuple(mean.a_opt, mean.closed_form_loss, mean.unique);
  }, py::arg("problem"), py::arg("rank"), py::arg("family") = "mean2");
  m.def("mean_loss_hs_oracle", [](const InverseProblem& p, const Mat& a) {
    return mean_loss_hs_oracle(a, spectrum(p), p);
  });
  m.def("joint_loss", [](const InverseProblem& p, Index r, const std::string& family) {
    return joint_approximation(spectrum(p), p, parse_mean_family(family), r).loss;
  }, py::arg("problem"), py::arg("rank"), py::arg("family") = "mean2");

  m.def("divergence",
        [](const Vec& m2, const Mat& c2, const Vec& m1, const Mat& c1, const std::string& family,
           std::optional<double> order) {
          return divergence(GaussianMeasure::from_covariance(m2, c2),
                            GaussianMeasure::from_covariance(m1, c1), divergence_spec(family, order));
        },
        py::arg("mean2"), py::arg("cov2"), py::arg("mean1"), py::arg("cov1"),
        py::arg("divergence") = "kl_reverse", py::arg("order") = std::nullopt);

  m.def("sweep_csv", [](const std::string& config_json) {
    return to_csv(run_sweep(experiment_config_from_json(Json::parse(config_json))));
  }, py::arg("config_json") = "{}");
  m.def("sweep_problem_csv", [](const InverseProblem& p, const std::string& config_json) {
    return to_csv(run_sweep(p, experiment_config_from_json(Json::parse(config_json))));
  }, py::arg("problem"), py::arg("config_json") = "{}");
}
