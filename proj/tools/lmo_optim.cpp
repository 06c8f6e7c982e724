#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lmo_optim/harness.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kOracle = 3 };

struct Globals {
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void emit(const Globals& g, const std::string& file, const std::string& text) {
  std::cout << text;
  if (g.out.empty()) return;
  std::filesystem::create_directories(g.out);
  std::ofstream(std::filesystem::path(g.out) / file) << text;
}

lmo::ConfigDoc load(const std::string& path, lmo::ConfigKind expected) {
  lmo::ConfigDoc doc = lmo::parse_config(path);
  if (doc.kind != expected)
    throw lmo::InvalidArgument("config '" + path + "' has kind '" + lmo::to_string(doc.kind) +
                               "', expected '" + lmo::to_string(expected) + "'");
  return doc;
}

void apply_globals(const Globals& g, lmo::RunSpec& spec) {
  if (g.seed) {
    spec.seed = *g.seed;
    spec.optimizer.base_seed = *g.seed;
  }
  if (!g.out.empty()) spec.output_path = g.out;
}

int cmd_run(const Globals& g, const std::string& path) {
  lmo::ConfigDoc doc = load(path, lmo::ConfigKind::run);
  apply_globals(g, doc.run);
  lmo::RunOptions opt;
  opt.out_dir = doc.run.output_path;
  opt.quiet = g.quiet;
  opt.keep_rows = false;
  const lmo::RunRecord rec = lmo::run_training(doc.run, opt);
  if (!rec.ok()) {
    std::cerr << "run failed at step " << rec.failure->step << ": " << rec.failure->reason << "\n";
    return kRuntime;
  }
  if (!g.quiet) {
    std::cout << "steps " << rec.summary.steps_completed << "  initial_loss "
              << rec.summary.initial_loss << "  best_loss " << rec.summary.best_loss
              << "  final_loss " << rec.summary.final_loss << "  total_flops "
              << rec.summary.total_flops << "\n";
    if (!opt.out_dir.empty()) std::cout << "wrote " << (opt.out_dir / "run.csv").string() << "\n";
  }
  return kOk;
}

int cmd_sweep(const Globals& g, const std::string& path) {
  lmo::ConfigDoc doc = load(path, lmo::ConfigKind::sweep);
  apply_globals(g, doc.run);
  lmo::SweepOptions opt;
  opt.out_dir = doc.run.output_path;
  opt.quiet = g.quiet;
  const lmo::SweepResult res = lmo::run_sweep(doc.sweep(), opt);
  if (!g.quiet) std::cout << lmo::sweep_table_csv(res);
  if (!res.best) {
    std::cerr << "every sweep cell failed\n";
    return kRuntime;
  }
  const auto& c = res.cells[*res.best];
  if (!g.quiet)
    std::cout << "best cell " << c.index << ": P=" << c.period.to_string()
              << " eta_M=" << c.eta_muon << " eta_L=" << c.eta_lion
              << " best_loss=" << c.best_loss << "\n";
  return kOk;
}

int cmd_oracle(const Globals& g, double perturb, int sweeps) {
  lmo::OracleOptions opt;
  opt.quintic_perturbation = perturb;
  opt.jacobi_max_sweeps = sweeps;
  if (g.seed) opt.seed = *g.seed;
  bool ok = true;
  for (const auto& c : lmo::oracle_selfcheck(opt)) {
    ok &= c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
  }
  return ok ? kOk : kOracle;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LionMuon / SignMuon optimizer toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out", g.out, "output directory")->option_text("DIR");
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  std::string config;
  auto* run = app.add_subcommand("run", "train one configuration");
  run->add_option("config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  auto* sweep = app.add_subcommand("sweep", "grid sweep over P and learning rates");
  sweep->add_option("config", config, "sweep config (JSON)")->required()->check(CLI::ExistingFile);
  auto* theory = app.add_subcommand("theory", "bound, optimal parameters and phi scan");
  theory->add_option("config", config, "theory config (JSON)")->required()->check(CLI::ExistingFile);
  auto* flops = app.add_subcommand("flops", "FLOP breakdown for a transformer shape");
  flops->add_option("config", config, "flops config (JSON)")->required()->check(CLI::ExistingFile);
  auto* oracle = app.add_subcommand("oracle", "linear-algebra self-check");
  double perturb = 0.0;
  int sweeps = 60;
  oracle->add_option("--perturb-quintic", perturb, "relative change to the quintic coefficients");
  oracle->add_option("--jacobi-sweeps", sweeps, "Jacobi sweep cap")->check(CLI::PositiveNumber);
  auto* ref = app.add_subcommand("config-reference", "print the configuration reference");
  auto* canon = app.add_subcommand("normalize", "print a config with every default filled in");
  canon->add_option("config", config, "config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(g, config);
    if (*sweep) return cmd_sweep(g, config);
    if (*theory) {
      emit(g, "theory.json", lmo::theory_report_json(load(config, lmo::ConfigKind::theory).theory));
      return kOk;
    }
    if (*flops) {
      emit(g, "flops.json", lmo::flops_report_json(load(config, lmo::ConfigKind::flops).flops));
      return kOk;
    }
    if (*oracle) return cmd_oracle(g, perturb, sweeps);
    if (*ref) {
      emit(g, "config_reference.md", lmo::config_reference());
      return kOk;
    }
    if (*canon) {
      std::cout << lmo::serialize_config(lmo::parse_config(config));
      return kOk;
    }
  } catch (const lmo::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
