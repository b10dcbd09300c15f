#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "silo/experiment.hpp"
#include "silo/schedule.hpp"
#include "silo/theory.hpp"
#include "silo/threads.hpp"

namespace {

using nlohmann::json;
using namespace silo;

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string emit = "csv";
};

// Applies the CLI overrides to both the parsed struct and the echoed
// document, so run.json always reflects the effective run.
ExperimentConfig load_with_overrides(const RunArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (a.seed.has_value()) {
    cfg.seed = *a.seed;
    cfg.raw["seed"] = *a.seed;
  }
  if (!a.out.empty()) {
    cfg.out_dir = a.out;
    cfg.raw["out_dir"] = a.out;
  }
  return cfg;
}

void emit_report(const ExperimentConfig& cfg, const RunReport& report,
                 const std::string& emit) {
  if (emit == "json") {
    json doc;
    doc["config"] = cfg.raw;
    doc["cycles"] = report_to_json(report);
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::cout << "cycle,lambda_percent,max_lr,epochs_run,best_val_acc,test_acc,"
               "train_loss,grad_std,hidden_std,ewg\n";
  for (const CycleReport& c : report.cycles) {
    std::cout << c.cycle << ',' << format_double(c.lambda_percent) << ','
              << format_double(c.max_lr) << ',' << c.epochs_run << ','
              << format_double(c.best_val_acc) << ','
              << format_double(c.test_acc) << ','
              << format_double(c.train_loss) << ','
              << format_double(c.grad_hist.std) << ','
              << format_double(c.hidden_hist.std) << ','
              << format_double(c.ewg) << '\n';
  }
}

int cmd_run(const RunArgs& a, bool dense_only) {
  ExperimentConfig cfg = load_with_overrides(a);
  if (dense_only) {
    cfg.cycles = 0;
    cfg.raw["pruning"]["cycles"] = 0;
  }
  const RunReport report = run_experiment(cfg);
  emit_report(cfg, report, a.emit);
  std::fprintf(stderr, "wrote %s/{cycles.csv,run.json,checkpoint_*.json}\n",
               cfg.out_dir.c_str());
  return 0;
}

struct ScheduleArgs {
  std::string spec;  // JSON file path, or inline JSON when it starts with '{'
  std::string kind = "silo";
  double lr = 0.04;
  double lr0 = 0.04;
  std::size_t total_steps = 1000;
  double max_lr = 0.1;
  std::size_t warmup_steps = 0;
  std::vector<std::size_t> drop_steps;
  double drop_factor = 10.0;
  double lo = 0.01;
  double hi = 0.1;
  std::size_t step_size = 100;
  double epsilon = 0.04;
  double delta = 0.06;
  double beta = 5.0;
  std::size_t q = 1;
  double p = 0.2;
  std::size_t cycles = 13;
  std::size_t steps = 0;
  std::string emit = "csv";
};

ScheduleSpec schedule_from_args(const ScheduleArgs& a) {
  if (!a.spec.empty()) {
    json doc;
    if (!a.spec.empty() && a.spec.front() == '{') {
      doc = json::parse(a.spec);
    } else {
      std::ifstream in(a.spec);
      if (!in) throw std::runtime_error("schedule: cannot open " + a.spec);
      doc = json::parse(in);
    }
    return parse_schedule_spec(doc);
  }
  ScheduleSpec s;
  if (a.kind == "constant") {
    s.kind = ScheduleKind::constant;
    s.lr = a.lr;
  } else if (a.kind == "linear_decay" || a.kind == "cosine") {
    s.kind = a.kind == "cosine" ? ScheduleKind::cosine
                                : ScheduleKind::linear_decay;
    s.lr0 = a.lr0;
    s.total_steps = a.total_steps;
  } else if (a.kind == "warmup") {
    s.kind = ScheduleKind::warmup;
    s.max_lr = a.max_lr;
    s.warmup_steps = a.warmup_steps;
    s.drop_steps = a.drop_steps;
    s.drop_factor = a.drop_factor;
  } else if (a.kind == "cyclical") {
    s.kind = ScheduleKind::cyclical;
    s.lo = a.lo;
    s.hi = a.hi;
    s.step_size = a.step_size;
  } else if (a.kind == "silo") {
    s.kind = ScheduleKind::silo;
    s.epsilon = a.epsilon;
    s.delta = a.delta;
    s.beta = a.beta;
    s.q = a.q;
    s.rate_p = a.p;
    s.warmup_steps = a.warmup_steps;
    s.drop_steps = a.drop_steps;
    s.drop_factor = a.drop_factor;
  } else {
    throw std::invalid_argument("schedule: unknown kind \"" + a.kind + "\"");
  }
  validate_schedule(s);
  return s;
}

int cmd_schedule(const ScheduleArgs& a) {
  const ScheduleSpec spec = schedule_from_args(a);
  if (a.steps > 0) {
    // Per-step trace across cycles, for plotting.
    if (a.emit == "json") {
      json rows = json::array();
      for (std::size_t m = 0; m <= a.cycles; ++m) {
        for (std::size_t t = 0; t < a.steps; ++t) {
          rows.push_back(json{{"cycle", m},
                              {"step", t},
                              {"lr", lr_at(spec, {m, t}, t)}});
        }
      }
      std::cout << rows.dump(2) << '\n';
    } else {
      std::cout << "cycle,step,lr\n";
      for (std::size_t m = 0; m <= a.cycles; ++m) {
        for (std::size_t t = 0; t < a.steps; ++t) {
          std::cout << m << ',' << t << ','
                    << format_double(lr_at(spec, {m, t}, t)) << '\n';
        }
      }
    }
    return 0;
  }
  // Per-cycle peaks.
  if (a.emit == "json") {
    json rows = json::array();
    for (std::size_t m = 0; m <= a.cycles; ++m) {
      rows.push_back(json{{"cycle", m}, {"max_lr", schedule_peak_lr(spec, m)}});
    }
    std::cout << rows.dump(2) << '\n';
  } else {
    std::cout << "cycle,max_lr\n";
    for (std::size_t m = 0; m <= a.cycles; ++m) {
      std::cout << m << ',' << format_double(schedule_peak_lr(spec, m))
                << '\n';
    }
  }
  return 0;
}

struct TheoryArgs {
  double sigma_x = 1.0;
  double sigma_w = 1.0;
  std::size_t d = 10;
  double p = 0.2;
  std::size_t k_max = 25;
  std::size_t depth = 1;
  double big_k = 1.0;
  double gamma_const = 1.0;
  std::size_t mc_samples = 0;
  std::size_t mc_width = 4096;
  std::uint64_t seed = 1;
  std::string emit = "csv";
};

int cmd_theory(const TheoryArgs& a) {
  TheoryParams base;
  base.sigma_x = a.sigma_x;
  base.sigma_w = a.sigma_w;
  base.d = a.d;
  base.p = a.p;
  base.depth = a.depth;
  base.big_k = a.big_k;
  base.gamma_const = a.gamma_const;

  const bool with_mc = a.mc_samples > 0;
  const Rng root(a.seed);

  json rows = json::array();
  if (a.emit != "json") {
    std::cout << (with_mc ? "k,lower_bound,adapted_alpha,mc_estimate\n"
                          : "k,lower_bound,adapted_alpha\n");
  }
  for (std::size_t k = 0; k <= a.k_max; ++k) {
    TheoryParams params = base;
    params.k = k;
    const double bound = corollary1_lower_bound(params);
    const double alpha = adapted_alpha(params, k);
    double mc = 0.0;
    if (with_mc) {
      mc = mc_activation_energy(params, a.mc_width, a.mc_samples,
                                root.child(k));
    }
    if (a.emit == "json") {
      json row{{"k", k}, {"lower_bound", bound}, {"adapted_alpha", alpha}};
      if (with_mc) row["mc_estimate"] = mc;
      rows.push_back(std::move(row));
    } else {
      std::cout << k << ',' << format_double(bound) << ','
                << format_double(alpha);
      if (with_mc) std::cout << ',' << format_double(mc);
      std::cout << '\n';
    }
  }
  if (a.emit == "json") std::cout << rows.dump(2) << '\n';
  return 0;
}

struct OracleArgs {
  RunArgs run;
  std::size_t grid_points = 8;
  std::vector<double> grid;
  bool serial = false;
};

int cmd_oracle(const OracleArgs& a) {
  const ExperimentConfig cfg = load_with_overrides(a.run);
  const std::vector<double> grid =
      a.grid.empty() ? default_oracle_grid(a.grid_points) : a.grid;
  std::fprintf(stderr, "oracle: %zu candidates x %zu cycles = %zu trainings\n",
               grid.size(), cfg.cycles + 1, grid.size() * (cfg.cycles + 1));

  const OracleResult res = oracle_search(cfg, grid, !a.serial);
  std::filesystem::create_directories(cfg.out_dir);
  write_oracle_csv(cfg.out_dir + "/oracle.csv", res);

  if (a.run.emit == "json") {
    json rows = json::array();
    for (const OracleCycle& c : res.cycles) {
      rows.push_back(json{{"cycle", c.cycle},
                          {"best_max_lr", c.best_max_lr},
                          {"interval_lo", c.interval_lo},
                          {"interval_hi", c.interval_hi},
                          {"silo_max_lr", c.silo_max_lr},
                          {"val_acc", c.val_acc}});
    }
    std::cout << json{{"grid", res.grid}, {"cycles", rows}}.dump(2) << '\n';
  } else {
    std::cout << "cycle,best_max_lr,interval_lo,interval_hi,silo_max_lr\n";
    for (const OracleCycle& c : res.cycles) {
      std::cout << c.cycle << ',' << format_double(c.best_max_lr) << ','
                << format_double(c.interval_lo) << ','
                << format_double(c.interval_hi) << ','
                << format_double(c.silo_max_lr) << '\n';
    }
  }
  std::fprintf(stderr, "wrote %s/oracle.csv\n", cfg.out_dir.c_str());
  return 0;
}

struct HistArgs {
  std::string run_dir;
  std::string out;
  std::string emit = "csv";
};

int cmd_hist(const HistArgs& a) {
  const std::vector<DistributionReport> reports =
      gradient_distribution_report(a.run_dir);
  const std::string out_dir = a.out.empty() ? a.run_dir : a.out;
  std::filesystem::create_directories(out_dir);
  for (const DistributionReport& r : reports) {
    const std::string m = std::to_string(r.cycle);
    write_histogram_csv(out_dir + "/hist_grad_" + m + ".csv", r.gradients);
    write_histogram_csv(out_dir + "/hist_hidden_" + m + ".csv", r.hidden);
  }
  if (a.emit == "json") {
    json rows = json::array();
    for (const DistributionReport& r : reports) {
      rows.push_back(json{{"cycle", r.cycle},
                          {"gradients", histogram_to_json(r.gradients)},
                          {"hidden", histogram_to_json(r.hidden)}});
    }
    std::cout << rows.dump(2) << '\n';
  } else {
    std::cout << "cycle,grad_std,hidden_std\n";
    for (const DistributionReport& r : reports) {
      std::cout << r.cycle << ',' << format_double(r.gradients.std) << ','
                << format_double(r.hidden.std) << '\n';
    }
  }
  std::fprintf(stderr, "wrote %s/hist_{grad,hidden}_<cycle>.csv\n",
               out_dir.c_str());
  return 0;
}

void add_emit(CLI::App* cmd, std::string& emit) {
  cmd->add_option("--emit", emit, "Output format on stdout")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void add_run_args(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "Experiment config (JSON)")
      ->required();
  cmd->add_option("--out", a.out, "Output directory (overrides config)");
  cmd->add_option("--seed", a.seed, "Seed override");
  add_emit(cmd, a.emit);
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();

  CLI::App app{"Iterative-pruning laboratory with an s-shaped max-lr schedule"};
  app.require_subcommand(1);

  RunArgs train_args;
  CLI::App* train =
      app.add_subcommand("train", "Train the dense network (no pruning)");
  add_run_args(train, train_args);

  RunArgs prune_args;
  CLI::App* prune =
      app.add_subcommand("prune", "Run the iterative pruning experiment");
  add_run_args(prune, prune_args);

  ScheduleArgs sched_args;
  CLI::App* sched =
      app.add_subcommand("schedule", "Evaluate a learning-rate schedule");
  sched->add_option("--spec", sched_args.spec,
                    "schedule JSON (file path, or inline starting with '{'); "
                    "overrides the flags below");
  sched->add_option("--kind", sched_args.kind,
                    "constant|linear_decay|cosine|warmup|cyclical|silo")
      ->capture_default_str();
  sched->add_option("--lr", sched_args.lr, "constant: learning rate")
      ->capture_default_str();
  sched->add_option("--lr0", sched_args.lr0, "linear_decay/cosine: initial lr")
      ->capture_default_str();
  sched->add_option("--total-steps", sched_args.total_steps,
                    "linear_decay/cosine: steps to zero")
      ->capture_default_str();
  sched->add_option("--max-lr", sched_args.max_lr, "warmup: peak lr")
      ->capture_default_str();
  sched->add_option("--warmup-steps", sched_args.warmup_steps,
                    "warmup/silo: linear ramp length")
      ->capture_default_str();
  sched->add_option("--drop-steps", sched_args.drop_steps,
                    "warmup/silo: steps after which lr divides by the factor");
  sched->add_option("--drop-factor", sched_args.drop_factor,
                    "warmup/silo: divisor per drop")
      ->capture_default_str();
  sched->add_option("--lo", sched_args.lo, "cyclical: low lr")
      ->capture_default_str();
  sched->add_option("--hi", sched_args.hi, "cyclical: high lr")
      ->capture_default_str();
  sched->add_option("--step-size", sched_args.step_size,
                    "cyclical: half-period in steps")
      ->capture_default_str();
  sched->add_option("--epsilon", sched_args.epsilon, "silo: base max lr")
      ->capture_default_str();
  sched->add_option("--delta", sched_args.delta, "silo: max lr gain")
      ->capture_default_str();
  sched->add_option("--beta", sched_args.beta, "silo: s-curve steepness")
      ->capture_default_str();
  sched->add_option("--q", sched_args.q, "silo: cycles before the ramp")
      ->capture_default_str();
  sched->add_option("--p", sched_args.p, "silo: pruning rate")
      ->capture_default_str();
  sched->add_option("--cycles", sched_args.cycles,
                    "emit rows for cycles 0..M")
      ->capture_default_str();
  sched->add_option("--steps", sched_args.steps,
                    "emit a per-step (cycle, step, lr) trace instead of peaks");
  add_emit(sched, sched_args.emit);

  TheoryArgs theory_args;
  CLI::App* theory =
      app.add_subcommand("theory", "Activation-energy lower bounds per cycle");
  theory->add_option("--sigma-x", theory_args.sigma_x, "input std")
      ->capture_default_str();
  theory->add_option("--sigma-w", theory_args.sigma_w, "weight std")
      ->capture_default_str();
  theory->add_option("--d", theory_args.d, "input dimension")
      ->capture_default_str();
  theory->add_option("--p", theory_args.p, "pruning rate per cycle")
      ->capture_default_str();
  theory->add_option("--k-max", theory_args.k_max, "emit rows for k = 0..k_max")
      ->capture_default_str();
  theory->add_option("--depth", theory_args.depth, "hidden depth of the bound")
      ->capture_default_str();
  theory->add_option("--big-k", theory_args.big_k,
                     "target weight-gradient energy")
      ->capture_default_str();
  theory->add_option("--gamma-const", theory_args.gamma_const,
                     "free constant of the energy bound")
      ->capture_default_str();
  theory->add_option("--mc-samples", theory_args.mc_samples,
                     "add a finite-width Monte-Carlo column (0 = off)");
  theory->add_option("--mc-width", theory_args.mc_width,
                     "hidden width of the Monte-Carlo net")
      ->capture_default_str();
  theory->add_option("--seed", theory_args.seed, "Monte-Carlo seed")
      ->capture_default_str();
  add_emit(theory, theory_args.emit);

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Grid-search the best peak lr per pruning cycle");
  add_run_args(oracle, oracle_args.run);
  oracle->add_option("--grid-points", oracle_args.grid_points,
                     "log-spaced candidates in [1e-4, 1e-1]")
      ->capture_default_str();
  oracle->add_option("--grid", oracle_args.grid,
                     "explicit ascending candidate lrs (overrides "
                     "--grid-points)");
  oracle->add_flag("--serial", oracle_args.serial,
                   "train candidates one at a time");

  HistArgs hist_args;
  CLI::App* hist = app.add_subcommand(
      "hist", "Recompute per-cycle gradient/hidden histograms from a run");
  hist->add_option("--run", hist_args.run_dir, "finished run directory")
      ->required();
  hist->add_option("--out", hist_args.out,
                   "where to write hist CSVs (default: the run directory)");
  add_emit(hist, hist_args.emit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) return cmd_run(train_args, true);
    if (prune->parsed()) return cmd_run(prune_args, false);
    if (sched->parsed()) return cmd_schedule(sched_args);
    if (theory->parsed()) return cmd_theory(theory_args);
    if (oracle->parsed()) return cmd_oracle(oracle_args);
    if (hist->parsed()) return cmd_hist(hist_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
