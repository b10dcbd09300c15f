#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "silo/experiment.hpp"
#include "silo/rng.hpp"
#include "silo/run.hpp"
#include "silo/schedule.hpp"

using nlohmann::json;
using silo::ExperimentConfig;

namespace {

json base_config(const std::string& out_dir) {
  return json{
      {"dataset",
       {{"kind", "synthetic"}, {"n", 400}, {"dim", 6}, {"classes", 3},
        {"sigma_x", 1.0}}},
      {"arch", {{"hidden", {12}}, {"activation", "relu"}}},
      {"schedule",
       {{"kind", "silo"}, {"epsilon", 0.05}, {"delta", 0.05}, {"beta", 5.0},
        {"q", 1}, {"p", 0.2}}},
      {"pruning",
       {{"method", "global_magnitude"}, {"rate", 0.2}, {"cycles", 2},
        {"epochs", 3}, {"batch", 32}, {"patience", 5},
        {"scoring_size", 128}}},
      {"seed", 3},
      {"out_dir", out_dir}};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_rejects(json doc, const std::string& needle) {
  try {
    (void)silo::parse_experiment_config(doc);
    FAIL_CHECK("config accepted; expected rejection mentioning \"" << needle
                                                                   << "\"");
  } catch (const std::invalid_argument& e) {
    CAPTURE(e.what());
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("config defaults and field mapping") {
  json doc = base_config("unused");
  doc.erase("out_dir");
  const ExperimentConfig cfg = silo::parse_experiment_config(doc);
  CHECK(cfg.dataset.kind == silo::DataKind::synthetic);
  CHECK(cfg.dataset.n == 400);
  CHECK(cfg.hidden == std::vector<std::size_t>({12}));
  CHECK(cfg.activation == silo::Activation::relu);
  CHECK(cfg.split.train_fraction == 0.8);
  CHECK(cfg.split.val_fraction == 0.1);
  CHECK(cfg.optimizer.kind == silo::OptimizerKind::sgd_momentum);
  CHECK(cfg.optimizer.momentum == 0.9);
  CHECK(cfg.schedule.kind == silo::ScheduleKind::silo);
  CHECK(cfg.schedule.epsilon == 0.05);
  CHECK(cfg.schedule.rate_p == 0.2);
  CHECK(cfg.method.kind == silo::PruneKind::global_magnitude);
  CHECK(cfg.rate == 0.2);
  CHECK(cfg.cycles == 2);
  CHECK(cfg.epochs == 3);
  CHECK(cfg.scoring_size == 128);
  CHECK(cfg.seed == 3);
  CHECK(cfg.out_dir == "run_out");  // default when omitted
  CHECK_FALSE(cfg.rewind_epoch.has_value());

  const silo::PruneRunConfig rc = silo::to_run_config(cfg, 6, 3);
  CHECK(rc.layer_sizes == std::vector<std::size_t>({6, 12, 3}));
  CHECK(rc.rate_p == 0.2);
  CHECK(rc.cycles == 2);
  CHECK(rc.seed == 3);
}

TEST_CASE("config rejects unknown keys at every level") {
  json doc = base_config("x");
  doc["surprise"] = 1;
  expect_rejects(doc, "surprise");

  doc = base_config("x");
  doc["dataset"]["extra"] = 1;
  expect_rejects(doc, "dataset");

  doc = base_config("x");
  doc["arch"]["depth"] = 3;
  expect_rejects(doc, "arch");

  doc = base_config("x");
  doc["schedule"]["lr"] = 0.1;  // not a silo-schedule key
  expect_rejects(doc, "schedule");

  doc = base_config("x");
  doc["pruning"]["momentum"] = 0.9;
  expect_rejects(doc, "pruning");

  doc = base_config("x");
  doc["optimizer"] = {{"kind", "adam"}, {"rho", 0.9}};  // rho is rmsprop-only
  expect_rejects(doc, "optimizer");

  doc = base_config("x");
  doc["init"] = {{"mode", "training"}, {"sigma_w", 1.0}};  // theory-only knob
  expect_rejects(doc, "init");

  doc = base_config("x");
  doc["split"] = {{"train_fraction", 0.8}, {"val_fraction", 0.1}, {"pad", 1}};
  expect_rejects(doc, "split");
}

TEST_CASE("config rejects out-of-range values with the offending path") {
  json doc = base_config("x");
  doc["pruning"]["rate"] = 0.0;
  expect_rejects(doc, "pruning.rate");

  doc = base_config("x");
  doc["pruning"]["rate"] = 1.0;
  expect_rejects(doc, "pruning.rate");

  doc = base_config("x");
  doc["pruning"]["epochs"] = 0;
  expect_rejects(doc, "pruning.epochs");

  doc = base_config("x");
  doc["pruning"]["batch"] = 0;
  expect_rejects(doc, "pruning.batch");

  doc = base_config("x");
  doc["pruning"]["patience"] = 0;
  expect_rejects(doc, "pruning.patience");

  doc = base_config("x");
  doc["pruning"]["rewind_epoch"] = 0;
  expect_rejects(doc, "pruning.rewind_epoch");

  doc = base_config("x");
  doc["pruning"]["scoring_size"] = 0;
  expect_rejects(doc, "pruning.scoring_size");

  // gradient_batch_size is a global_gradient-only knob.
  doc = base_config("x");
  doc["pruning"]["gradient_batch_size"] = 64;
  expect_rejects(doc, "gradient_batch_size");
  doc["pruning"]["method"] = "global_gradient";
  CHECK_NOTHROW((void)silo::parse_experiment_config(doc));

  doc = base_config("x");
  doc["arch"]["hidden"] = json::array();
  expect_rejects(doc, "arch.hidden");

  doc = base_config("x");
  doc["arch"]["hidden"] = {16, 0};
  expect_rejects(doc, "arch.hidden");

  doc = base_config("x");
  doc.erase("seed");
  expect_rejects(doc, "seed");

  doc = base_config("x");
  doc["dataset"]["kind"] = "parquet";
  expect_rejects(doc, "dataset.kind");

  doc = base_config("x");
  doc["dataset"] = {{"kind", "mnist_idx"}, {"images", "a"}};
  expect_rejects(doc, "labels");

  doc = base_config("x");
  doc["dataset"] = {{"kind", "cifar10_bin"}};
  expect_rejects(doc, "path");

  doc = base_config("x");
  doc["split"] = {{"train_fraction", 0.9}, {"val_fraction", 0.1}};
  expect_rejects(doc, "split");

  doc = base_config("x");
  doc["init"] = {{"mode", "theory"}, {"bias_layers", {true}}};  // need 2
  expect_rejects(doc, "bias_layers");

  doc = base_config("x");
  doc["pruning"]["epochs"] = 2.5;  // counts must be integers
  expect_rejects(doc, "pruning.epochs");

  doc = base_config("x");
  doc["seed"] = -4;
  expect_rejects(doc, "seed");
}

TEST_CASE("standalone schedule block parser") {
  const silo::ScheduleSpec c =
      silo::parse_schedule_spec(json{{"kind", "constant"}, {"lr", 0.04}});
  CHECK(c.kind == silo::ScheduleKind::constant);
  CHECK(c.lr == 0.04);

  const silo::ScheduleSpec s = silo::parse_schedule_spec(
      json{{"kind", "silo"}, {"epsilon", 0.04}, {"delta", 0.06}, {"p", 0.2},
           {"warmup_steps", 100}});
  CHECK(s.kind == silo::ScheduleKind::silo);
  CHECK(s.beta == 5.0);  // default
  CHECK(s.q == 1);       // default
  CHECK(s.warmup_steps == 100);

  CHECK_THROWS_AS((void)silo::parse_schedule_spec(
                      json{{"kind", "warp"}, {"lr", 0.1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)silo::parse_schedule_spec(json{{"kind", "silo"},
                                                       {"epsilon", 0.04},
                                                       {"delta", 0.06},
                                                       {"p", 1.5}}),
                  std::invalid_argument);
}

TEST_CASE("experiment run: reports, files, and reproducibility") {
  namespace fs = std::filesystem;
  fs::remove_all("tmp_run_a");
  fs::remove_all("tmp_run_b");

  const ExperimentConfig cfg_a =
      silo::parse_experiment_config(base_config("tmp_run_a"));
  const silo::RunReport report = silo::run_experiment(cfg_a);

  // Cycle 0 is dense; cycles prune 20% each.
  REQUIRE(report.cycles.size() == 3);
  CHECK(report.cycles[0].lambda_percent == 100.0);
  CHECK(report.cycles[1].lambda_percent ==
        doctest::Approx(80.0).epsilon(0.02));
  CHECK(report.cycles[2].lambda_percent ==
        doctest::Approx(64.0).epsilon(0.02));

  // The reported max_lr column is the schedule's per-cycle peak.
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(report.cycles[m].max_lr ==
          silo::schedule_peak_lr(cfg_a.schedule, m));
    CHECK(report.cycles[m].cycle == m);
    CHECK(report.cycles[m].epochs_run >= 1);
    CHECK(report.cycles[m].best_epoch >= 1);
    CHECK(report.cycles[m].best_val_acc >= 0.0);
    CHECK(report.cycles[m].best_val_acc <= 1.0);
    CHECK(report.cycles[m].grad_hist.n > 0);
    CHECK(report.cycles[m].hidden_hist.n > 0);
  }

  for (const char* name :
       {"cycles.csv", "run.json", "checkpoint_0.json", "checkpoint_1.json",
        "checkpoint_2.json", "hist_grad_0.csv", "hist_hidden_2.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(fs::path("tmp_run_a") / name));
  }

  // Identical config (other than out_dir) reproduces cycles.csv bytes.
  json doc_b = base_config("tmp_run_b");
  const silo::RunReport rb =
      silo::run_experiment(silo::parse_experiment_config(doc_b));
  (void)rb;
  CHECK(slurp("tmp_run_a/cycles.csv") == slurp("tmp_run_b/cycles.csv"));

  // run.json embeds the config document and one entry per cycle.
  json run_doc = json::parse(slurp("tmp_run_a/run.json"));
  CHECK(run_doc.at("config") == cfg_a.raw);
  REQUIRE(run_doc.at("cycles").size() == 3);
  for (const auto& c : run_doc["cycles"]) {
    for (const char* key :
         {"cycle", "lambda_percent", "max_lr", "epochs_run", "best_epoch",
          "best_val_acc", "test_acc", "train_loss", "ewg", "grad_hist",
          "hidden_hist"}) {
      CAPTURE(key);
      REQUIRE(c.contains(key));
    }
  }

  // The cycles.csv header is part of the output contract.
  const std::string csv = slurp("tmp_run_a/cycles.csv");
  CHECK(csv.rfind("cycle,lambda_percent,max_lr,epochs_run,best_val_acc,"
                  "test_acc,train_loss,grad_std,hidden_std,ewg\n",
                  0) == 0);

  // Distribution report recomputed from disk matches the in-memory run.
  const std::vector<silo::DistributionReport> reps =
      silo::gradient_distribution_report("tmp_run_a");
  REQUIRE(reps.size() == 3);
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(reps[m].cycle == m);
    CHECK(reps[m].gradients.mean == report.cycles[m].grad_hist.mean);
    CHECK(reps[m].gradients.std == report.cycles[m].grad_hist.std);
    CHECK(reps[m].gradients.counts == report.cycles[m].grad_hist.counts);
    CHECK(reps[m].hidden.std == report.cycles[m].hidden_hist.std);
    CHECK(reps[m].hidden.counts == report.cycles[m].hidden_hist.counts);
  }

  // A missing checkpoint is reported by name.
  fs::remove("tmp_run_a/checkpoint_1.json");
  try {
    (void)silo::gradient_distribution_report("tmp_run_a");
    FAIL_CHECK("expected missing-checkpoint error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("checkpoint") != std::string::npos);
  }
}

TEST_CASE("scoring subset is a deterministic fixed-size sample") {
  silo::Rng rng(8);
  const silo::Dataset ds = silo::make_synthetic_gaussian(rng, 100, 4, 3, 1.0);

  const silo::Dataset s1 = silo::scoring_subset(ds, 32, 11);
  const silo::Dataset s2 = silo::scoring_subset(ds, 32, 11);
  REQUIRE(s1.size() == 32);
  REQUIRE(s1.features.data == s2.features.data);
  REQUIRE(s1.labels == s2.labels);

  const silo::Dataset other = silo::scoring_subset(ds, 32, 12);
  CHECK(other.features.data != s1.features.data);

  // Larger than the set: the whole set.
  const silo::Dataset all = silo::scoring_subset(ds, 500, 11);
  CHECK(all.size() == 100);

  // Every subset row is a source row.
  for (std::size_t i = 0; i < s1.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < ds.size() && !found; ++j) {
      bool same = ds.labels[j] == s1.labels[i];
      for (std::size_t c = 0; same && c < 4; ++c) {
        same = ds.features(j, c) == s1.features(i, c);
      }
      found = same;
    }
    REQUIRE(found);
  }
}

TEST_CASE("peak-lr oracle invariants") {
  json doc = base_config("tmp_oracle");
  doc["pruning"]["cycles"] = 1;
  doc["pruning"]["epochs"] = 2;
  const ExperimentConfig cfg = silo::parse_experiment_config(doc);

  const std::vector<double> grid = {0.02, 0.05, 0.1};
  const silo::OracleResult serial = silo::oracle_search(cfg, grid, false);
  const silo::OracleResult parallel = silo::oracle_search(cfg, grid, true);

  REQUIRE(serial.grid == grid);
  REQUIRE(serial.cycles.size() == 2);
  for (const silo::OracleCycle& c : serial.cycles) {
    REQUIRE(c.val_acc.size() == grid.size());
    // Best is a grid member attaining the max accuracy, first on ties.
    double best_acc = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (c.val_acc[i] > best_acc) {
        best_acc = c.val_acc[i];
        best_idx = i;
      }
    }
    CHECK(c.best_max_lr == grid[best_idx]);
    CHECK(c.interval_lo <= c.best_max_lr);
    CHECK(c.interval_hi >= c.best_max_lr);
    // Interval endpoints are grid values within the tolerance of the best.
    CHECK(std::count(grid.begin(), grid.end(), c.interval_lo) == 1);
    CHECK(std::count(grid.begin(), grid.end(), c.interval_hi) == 1);
    // The schedule's own peak column matches the silo curve.
    CHECK(c.silo_max_lr == silo::schedule_peak_lr(cfg.schedule, c.cycle));
  }

  // Parallel candidate training reduces to identical results.
  REQUIRE(parallel.cycles.size() == serial.cycles.size());
  for (std::size_t m = 0; m < serial.cycles.size(); ++m) {
    CHECK(parallel.cycles[m].best_max_lr == serial.cycles[m].best_max_lr);
    CHECK(parallel.cycles[m].interval_lo == serial.cycles[m].interval_lo);
    CHECK(parallel.cycles[m].interval_hi == serial.cycles[m].interval_hi);
    REQUIRE(parallel.cycles[m].val_acc == serial.cycles[m].val_acc);
  }

  // Degenerate grid: both entries equal, best is that value.
  const silo::OracleResult flat =
      silo::oracle_search(cfg, {0.05, 0.05}, false);
  CHECK(flat.cycles[0].best_max_lr == 0.05);
  CHECK(flat.cycles[0].interval_lo == 0.05);
  CHECK(flat.cycles[0].interval_hi == 0.05);

  // Bad grids and non-silo schedules are rejected.
  CHECK_THROWS_AS((void)silo::oracle_search(cfg, {0.1}, false),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)silo::oracle_search(cfg, {0.1, 0.05}, false),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)silo::oracle_search(cfg, {0.0, 0.1}, false),
                  std::invalid_argument);
  json constant = base_config("tmp_oracle2");
  constant["schedule"] = {{"kind", "constant"}, {"lr", 0.05}};
  const ExperimentConfig ccfg = silo::parse_experiment_config(constant);
  CHECK_THROWS_AS((void)silo::oracle_search(ccfg, grid, false),
                  std::invalid_argument);
}

TEST_CASE("oracle grid and csv formats") {
  const std::vector<double> grid = silo::default_oracle_grid();
  REQUIRE(grid.size() == 8);
  CHECK(grid.front() == 1e-4);
  CHECK(grid.back() == 1e-1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    REQUIRE(grid[i] > grid[i - 1]);
    // Log-spaced: constant ratio 10^(3/7).
    const double ratio = grid[i] / grid[i - 1];
    REQUIRE(std::fabs(ratio - std::pow(10.0, 3.0 / 7.0)) <= 1e-9);
  }

  CHECK(silo::format_double(0.5) == "0.5");
  CHECK(silo::format_double(100.0) == "100");
  CHECK(silo::format_double(0.0) == "0");

  silo::OracleResult res;
  res.grid = {0.01, 0.1};
  silo::OracleCycle c;
  c.cycle = 0;
  c.best_max_lr = 0.1;
  c.interval_lo = 0.01;
  c.interval_hi = 0.1;
  c.silo_max_lr = 0.05;
  c.val_acc = {0.5, 0.75};
  res.cycles.push_back(c);
  std::filesystem::create_directories("tmp_oracle_csv");
  silo::write_oracle_csv("tmp_oracle_csv/oracle.csv", res);
  const std::string csv = slurp("tmp_oracle_csv/oracle.csv");
  CHECK(csv ==
        "cycle,best_max_lr,interval_lo,interval_hi,silo_max_lr\n"
        "0,0.1,0.01,0.1,0.05\n");

  silo::HistogramSummary h;
  h.bin_edges = {0.0, 0.5, 1.0};
  h.counts = {3, 4};
  h.mean = 0.5;
  h.std = 0.25;
  h.n = 7;
  silo::write_histogram_csv("tmp_oracle_csv/hist.csv", h);
  CHECK(slurp("tmp_oracle_csv/hist.csv") ==
        "bin_lo,bin_hi,count\n"
        "0,0.5,3\n"
        "0.5,1,4\n");
}
