#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "silo/dataset.hpp"
#include "silo/run.hpp"

namespace silo {

enum class DataKind { synthetic, mnist_idx, cifar10_bin };

struct DatasetSpec {
  DataKind kind = DataKind::synthetic;

  // synthetic
  std::size_t n = 2000;
  std::size_t dim = 16;
  std::size_t classes = 4;
  double sigma_x = 1.0;

  // mnist_idx
  std::string images;
  std::string labels;

  // cifar10_bin
  std::string path;

  // any kind: keep only the first `limit` samples (before splitting)
  std::optional<std::size_t> limit;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  SplitSpec split;
  std::vector<std::size_t> hidden;
  Activation activation = Activation::relu;
  InitOptions init;
  OptimizerSpec optimizer;
  ScheduleSpec schedule;
  PruneMethod method;
  double rate = 0.2;
  std::size_t cycles = 0;
  std::size_t epochs = 10;
  std::size_t batch = 128;
  std::size_t patience = 10;
  std::optional<std::size_t> rewind_epoch;
  std::size_t scoring_size = 1024;
  std::uint64_t seed = 0;
  std::string out_dir = "run_out";

  nlohmann::json raw;  // the validated document, echoed into run.json
};

// Parses and schema-checks a config document. Unknown keys anywhere in the
// document are rejected, as are out-of-range values (pruning rate outside
// (0,1), split fractions that leave no test data, zero epochs or batch).
// Throws std::invalid_argument with the offending path in the message.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::string& path);

// The "schedule" block of a config document, parsed standalone (used by the
// CLI's --spec option). Validated before return.
ScheduleSpec parse_schedule_spec(const nlohmann::json& doc);

// Materializes the configured dataset. Synthetic data is generated from
// stream 500 of the config seed, so a config file fully determines the run.
Dataset load_experiment_dataset(const ExperimentConfig& cfg);

// Assembles the training-run config once the data dimensions are known.
PruneRunConfig to_run_config(const ExperimentConfig& cfg,
                             std::size_t input_dim, std::size_t classes);

// Full pipeline: load -> split -> run_iterative_pruning. Writes cycles.csv,
// run.json, checkpoint_<m>.json, hist_grad_<m>.csv and hist_hidden_<m>.csv
// under cfg.out_dir (created if absent) and returns the in-memory report.
RunReport run_experiment(const ExperimentConfig& cfg);

struct OracleCycle {
  std::size_t cycle = 0;
  double best_max_lr = 0.0;
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  double silo_max_lr = 0.0;     // the schedule's own peak, for comparison
  std::vector<double> val_acc;  // per grid candidate, grid order
};

struct OracleResult {
  std::vector<double> grid;
  std::vector<OracleCycle> cycles;
};

// `points` log-spaced values from 1e-4 to 1e-1 inclusive, ascending.
std::vector<double> default_oracle_grid(std::size_t points = 8);

// Grid search for the best peak learning rate, one search per pruning cycle:
// every candidate retrains the same cycle from the same (pruned) weights with
// the same data order; only the peak lr differs. Best = highest validation
// accuracy, ties to the smaller lr; interval = [min, max] grid values within
// 0.5 accuracy percentage points of the best. The best candidate's weights
// seed the next cycle. Costs |grid| x (cycles+1) trainings. Requires a silo
// schedule in the config (it fixes the within-cycle warmup shape and the
// comparison column). With `parallel`, candidates of one cycle run
// concurrently; results are reduced in grid order either way.
OracleResult oracle_search(const ExperimentConfig& cfg,
                           const std::vector<double>& grid, bool parallel);

struct DistributionReport {
  std::size_t cycle = 0;
  HistogramSummary gradients;
  HistogramSummary hidden;
};

// Recomputes per-cycle gradient/hidden histograms from a finished run
// directory (run.json + checkpoint_<m>.json), rebuilding the dataset and the
// scoring subset from the embedded config. Throws on missing checkpoints.
std::vector<DistributionReport> gradient_distribution_report(
    const std::string& run_dir);

// All CSVs share one float format (printf %.10g) so reruns byte-match.
std::string format_double(double v);
void write_cycles_csv(const std::string& path, const RunReport& report);
void write_oracle_csv(const std::string& path, const OracleResult& oracle);
void write_histogram_csv(const std::string& path, const HistogramSummary& h);
void write_run_json(const std::string& path, const ExperimentConfig& cfg,
                    const RunReport& report);

nlohmann::json report_to_json(const RunReport& report);
nlohmann::json histogram_to_json(const HistogramSummary& h);

}  // namespace silo
