#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "silo/dataset.hpp"
#include "silo/histogram.hpp"
#include "silo/network.hpp"
#include "silo/optimizer.hpp"
#include "silo/pruning.hpp"
#include "silo/schedule.hpp"

namespace silo {

struct PruneRunConfig {
  std::vector<std::size_t> layer_sizes;  // [d, hidden..., classes]
  Activation activation = Activation::relu;
  InitOptions init;
  OptimizerSpec optimizer;
  ScheduleSpec schedule;
  PruneMethod method;
  double rate_p = 0.2;
  std::size_t cycles = 0;       // prunings after the dense cycle (L)
  std::size_t epochs = 10;      // per cycle (t)
  std::size_t batch = 128;
  std::size_t patience = 10;    // early stopping on validation loss
  std::optional<std::size_t> rewind_epoch;  // IMP: snapshot epoch of cycle 0
  std::size_t scoring_size = 1024;  // fixed subset for scores + histograms
  std::uint64_t seed = 0;
};

struct CycleReport {
  std::size_t cycle = 0;
  double lambda_percent = 100.0;
  double max_lr = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;       // 1-based epoch with best validation loss
  double best_val_acc = 0.0;        // accuracy at that epoch
  double test_acc = 0.0;            // early-stop top-1 at that epoch
  double train_loss = 0.0;          // mean train loss of the last epoch
  double ewg = 0.0;                 // E_WG of the last epoch
  HistogramSummary grad_hist;       // mean gradients over active weights
  HistogramSummary hidden_hist;     // hidden activations over the scoring set
};

struct RunReport {
  std::vector<CycleReport> cycles;
};

struct TrainOutcome {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  double last_train_loss = 0.0;
  double last_ewg = 0.0;
};

// Trains one cycle with the schedule rewound to step 0, early-stops on
// validation loss (patience epochs, min-delta 0), then restores the best-
// validation weights into `net`. Epoch data order comes from children of
// `cycle_rng`. When `rewind_snapshot` is nonnull and cycle is 0, the weights
// at the end of epoch min(rewind_epoch, epochs) are captured into it.
TrainOutcome train_cycle(MaskedNetwork& net, const PruneRunConfig& cfg,
                         const Dataset& train, const Dataset& val,
                         std::size_t cycle, const Rng& cycle_rng,
                         NetSnapshot* rewind_snapshot);

// Prune -> freeze -> retrain, cycle 0 dense, then `cycles` pruned cycles.
// Each cycle rewinds the LR schedule to step 0 (SILO additionally advances
// its peak by the cycle index), trains with early stopping, restores the
// best-validation weights, and reports on that converged net. Deterministic
// per config+seed. When `out_checkpoints` is nonnull, the converged net of
// every cycle is saved as <dir>/checkpoint_<m>.json.
RunReport run_iterative_pruning(const PruneRunConfig& config,
                                const Dataset& train, const Dataset& val,
                                const Dataset& test,
                                const std::string* checkpoint_dir = nullptr);

// Per-cycle gradient/hidden histograms of a converged net over a scoring
// set: mean gradients at active positions and all hidden activations,
// Sturges binned.
HistogramSummary gradient_histogram(const MaskedNetwork& net,
                                    const Dataset& scoring);
HistogramSummary hidden_histogram(const MaskedNetwork& net,
                                  const Dataset& scoring);

// The fixed scoring subset of a training set (first scoring_size entries of
// a seeded permutation; the whole set when smaller).
Dataset scoring_subset(const Dataset& train, std::size_t scoring_size,
                       std::uint64_t seed);

}  // namespace silo
