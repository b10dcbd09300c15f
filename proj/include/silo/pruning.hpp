#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "silo/dataset.hpp"
#include "silo/network.hpp"

namespace silo {

enum class PruneKind {
  global_magnitude,
  layer_magnitude,
  global_gradient,
  lamp,
  l1_neuron
};

struct PruneMethod {
  PruneKind kind = PruneKind::global_magnitude;
  // global_gradient: size of the fixed scoring subset (one full pass).
  std::size_t gradient_batch_size = 1024;
};

// A scored active weight position. Lower score prunes earlier; prune_step
// breaks score ties by ascending (layer, row, col).
struct WeightScore {
  std::size_t layer = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  double score = 0.0;
};

// Scores every active weight. global_magnitude: |w|. layer_magnitude:
// within-layer ascending rank of |w| (ties by flat index) divided by the
// layer's active count, so a global cut takes an equal fraction per layer.
// global_gradient: |w * g| with g the mean gradient of one full pass over
// `data`. lamp: w^2 / (trailing sum of w^2 over same-layer active weights
// with magnitude >= |w|, ties by index). Throws when a data-dependent method
// is called without data. l1_neuron is structured; use prune_neurons_l1.
std::vector<WeightScore> score_weights(const MaskedNetwork& net,
                                       const PruneMethod& method,
                                       const Dataset* data = nullptr);

// Masks (and zeroes) the floor(p * active) lowest-scored weights.
void prune_step(MaskedNetwork& net, std::vector<WeightScore> scores,
                double rate_p);

// Structured variant: per hidden layer, removes the floor(p * active)
// neurons with the smallest sum of |incoming active weight| (ties by neuron
// index), zeroing their incoming rows and outgoing columns. Throws if a
// hidden layer has no active neurons left.
void prune_neurons_l1(MaskedNetwork& net, double rate_p);

// Percent of weights remaining, biases excluded: 100 * active / total.
double lambda_of(const MaskedNetwork& net);

// Mean gradient per parameter over one full pass of `data` (chunked, no
// optimizer steps); the gradient field of global_gradient scoring and of the
// per-cycle gradient histograms.
Gradients mean_gradients(const MaskedNetwork& net, const Dataset& data);

struct NetSnapshot {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

NetSnapshot take_snapshot(const MaskedNetwork& net);

// IMP rewind: active weights (and all biases) restored from the snapshot;
// masked weights stay exactly 0. Optimizer state is the caller's to reset
// (training loops build a fresh one each cycle).
void rewind_to_snapshot(MaskedNetwork& net, const NetSnapshot& snapshot);

}  // namespace silo
