// Command line front end: figure experiments, probes, free-probability checks
// and reference curves. Exit codes: 0 success, 2 configuration error,
// 3 numerical non-convergence.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htrm/htrm.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::string seed, trials, n, workers, out;
  bool no_cache = false;
};

htrm::RunConfig build_config(const Flags& f, const std::string& experiment) {
  htrm::RunConfig cfg;
  if (!f.config.empty()) htrm::apply_config_file(cfg, f.config);
  cfg.experiment = experiment;
  // flags of the same names as config keys are applied last
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw htrm::InvalidConfig("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!f.seed.empty()) cfg.set("seed", f.seed);
  if (!f.trials.empty()) cfg.set("trials", f.trials);
  if (!f.n.empty()) cfg.set("n", f.n);
  if (!f.workers.empty()) cfg.set("workers", f.workers);
  if (!f.out.empty()) cfg.set("out", f.out);
  if (f.no_cache) cfg.cache = false;
  return cfg;
}

int run(const Flags& f, const std::string& experiment, const std::string& stem) {
  const auto cfg = build_config(f, experiment);
  const auto result = htrm::run_experiment(cfg);
  for (const auto& p : htrm::write_result(cfg.output_dir, stem, result)) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed random matrix laboratory"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "key = value configuration file");
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--trials", f.trials, "number of draws");
  app.add_option("--n", f.n, "matrix dimension");
  app.add_option("--workers", f.workers, "worker threads (0: all hardware threads)");
  app.add_option("--out", f.out, "output directory");
  app.add_flag("--no-cache", f.no_cache, "do not read or write eigenvalue caches");
  app.add_option("--set", f.sets, "any other configuration key, as key=value");

  std::string figure;
  auto* fig = app.add_subcommand("figure", "run a figure experiment");
  fig->add_option("name", figure, "experiment name")->required()->check(CLI::IsMember(htrm::figure_names()));
  std::string density;
  auto* ref = app.add_subcommand("reference", "tabulate a reference curve");
  ref->add_option("density", density, "curve name")->required();
  auto* scan = app.add_subcommand("transition-scan", "spacing statistics across base points N^gamma");
  auto* poisson = app.add_subcommand("poisson-probe", "within-cluster spacings against e^-s as L grows");
  auto* saturation = app.add_subcommand("saturation-probe", "mean extreme unfolded positions against N");
  auto* freeprob = app.add_subcommand("freeprob-check", "numerical R- and S-transform checks");
  for (auto* sub : {fig, ref, scan, poisson, saturation, freeprob}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fig) return run(f, figure, figure);
    if (*ref) {
      f.sets.push_back("density=" + density);
      return run(f, "reference", "reference-" + density);
    }
    if (*scan) return run(f, "transition-scan", "transition-scan");
    if (*poisson) return run(f, "poisson-probe", "poisson-probe");
    if (*saturation) return run(f, "saturation-probe", "saturation-probe");
    if (*freeprob) return run(f, "freeprob-check", "freeprob-check");
  } catch (const htrm::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const htrm::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return 3;
  } catch (const htrm::ContourSeparationError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
