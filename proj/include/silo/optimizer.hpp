#pragma once

#include <cstddef>
#include <vector>

#include "silo/matrix.hpp"
#include "silo/network.hpp"

namespace silo {

enum class OptimizerKind { sgd_momentum, adam, rmsprop };

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::sgd_momentum;
  double momentum = 0.9;       // sgd_momentum
  double weight_decay = 1e-4;  // coupled L2, weights only, never biases
  double beta1 = 0.9;          // adam
  double beta2 = 0.999;        // adam
  double epsilon = 1e-8;       // adam / rmsprop
  double rho = 0.9;            // rmsprop
};

// Velocity / first-moment buffers in m1, second moments in m2 (adam,
// rmsprop). Buffers at masked positions are never touched; pruning resets
// state wholesale anyway.
struct OptimizerState {
  OptimizerSpec spec;
  std::vector<Matrix> m1, m2;
  std::vector<std::vector<double>> bias_m1, bias_m2;
  long step_count = 0;  // adam bias correction

  static OptimizerState create(const MaskedNetwork& net,
                               const OptimizerSpec& spec);
};

// One descent step on the active weights and all biases. Masked weights stay
// exactly 0: their gradients arrive as 0 and the update loop skips them, so
// neither the decay term nor stale buffers can revive a pruned weight.
// Throws on non-finite lr.
void optimizer_step(MaskedNetwork& net, OptimizerState& state,
                    const Gradients& grads, double lr);

}  // namespace silo
