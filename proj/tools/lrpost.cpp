#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrpost/bench.hpp"
#include "lrpost/errors.hpp"

namespace {

using namespace lrpost;

struct Flags {
  std::string config;
  std::string problem;
  std::vector<Index> ranks;
  std::vector<std::string> families;
  std::string divergence;
  std::optional<double> order;
  long long mc_samples = -1;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string out;
  std::string plot;
  Index rank = -1;
};

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = experiment_config_from_json(read_json_file(f.config), cfg);
  Json overrides = Json::object();
  if (!f.problem.empty()) overrides["problem"] = f.problem;
  if (!f.ranks.empty()) overrides["ranks"] = f.ranks;
  if (!f.families.empty()) overrides["families"] = f.families;
  if (!f.divergence.empty()) overrides["divergence"] = f.divergence;
  if (f.order) overrides["order"] = *f.order;
  if (f.mc_samples >= 0) overrides["mc_samples"] = f.mc_samples;
  if (f.seed) overrides["seed"] = *f.seed;
  if (!f.output.empty()) overrides["output"] = f.output;
  if (!f.plot.empty()) overrides["plot"] = f.plot;
  return experiment_config_from_json(overrides, cfg);
}

void emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(f.out, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--problem", f.problem, "heat, deconvolution, or a problem JSON file");
  cmd->add_option("--out", f.out, "Write output to this file instead of stdout");
}

void add_output(CLI::App* cmd, Flags& f) {
  cmd->add_option("--output", f.output, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal low-rank posterior approximation for linear Gaussian inverse problems"};
  app.require_subcommand(1);
  Flags f;

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Eigenvalues lambda_i, d_i and variance ratios");
  add_common(spectrum_cmd, f);
  add_output(spectrum_cmd, f);

  auto* sweep_cmd = app.add_subcommand("sweep", "Closed-form and Monte Carlo losses over ranks");
  add_common(sweep_cmd, f);
  add_output(sweep_cmd, f);
  sweep_cmd->add_option("--ranks", f.ranks, "Comma-separated ranks (default 0..n)")
      ->delimiter(',');
  sweep_cmd->add_option("--families", f.families, "cov,mean1,mean2,joint1,joint2 or joint")
      ->delimiter(',');
  sweep_cmd->add_option("--divergence", f.divergence,
                        "kl_reverse, kl_forward, renyi, amari or hellinger");
  sweep_cmd->add_option("--order", f.order, "Order for renyi and amari, in (0, 1)");
  sweep_cmd->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples, 0 to skip");
  sweep_cmd->add_option("--seed", f.seed, "Seed for the Monte Carlo data stream");
  sweep_cmd->add_option("--plot", f.plot, "Write an SVG loss-vs-rank plot to this path");

  auto* project_cmd =
      app.add_subcommand("project", "Compare the projected problem with the optimal pair");
  add_common(project_cmd, f);
  project_cmd->add_option("--rank", f.rank, "Projector rank r")->required();
  project_cmd->add_option("--seed", f.seed, "Seed for the sampled data");

  auto* problem_cmd = app.add_subcommand("problem", "Problem utilities");
  problem_cmd->require_subcommand(1);
  auto* emit_cmd = problem_cmd->add_subcommand("emit", "Write the canonical problem JSON");
  add_common(emit_cmd, f);

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(f);
    if (spectrum_cmd->parsed()) {
      const SpectrumReport report = spectrum_report(build_problem(cfg.problem));
      emit(f, cfg.output == "json" ? dump(to_json(report)) : to_csv(report));
    } else if (sweep_cmd->parsed()) {
      const LossTable table = run_sweep(cfg);
      emit(f, cfg.output == "json" ? dump(to_json(table)) : to_csv(table));
      if (cfg.plot) write_text_file(*cfg.plot, loss_plot_svg(table));
    } else if (project_cmd->parsed()) {
      emit(f, dump(to_json(project_and_compare(build_problem(cfg.problem), f.rank, cfg.seed))));
    } else if (emit_cmd->parsed()) {
      emit(f, dump(problem_to_json(build_problem(cfg.problem))));
    }
  } catch (const lrpost::Error& e) {
    std::fprintf(stderr, "lrpost: %s\n", e.what());
    return 2;
  }
  return 0;
}
