#include "silo/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace silo {

OptimizerState OptimizerState::create(const MaskedNetwork& net,
                                      const OptimizerSpec& spec) {
  OptimizerState s;
  s.spec = spec;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    s.m1.emplace_back(net.weights[l].rows, net.weights[l].cols);
    s.m2.emplace_back(net.weights[l].rows, net.weights[l].cols);
    s.bias_m1.emplace_back(net.biases[l].size(), 0.0);
    s.bias_m2.emplace_back(net.biases[l].size(), 0.0);
  }
  return s;
}

void optimizer_step(MaskedNetwork& net, OptimizerState& state,
                    const Gradients& grads, double lr) {
  if (!std::isfinite(lr)) {
    throw std::invalid_argument("optimizer_step: non-finite learning rate");
  }
  const OptimizerSpec& sp = state.spec;
  state.step_count += 1;

  // Adam bias-correction factors for this step.
  const double bc1 =
      1.0 - std::pow(sp.beta1, static_cast<double>(state.step_count));
  const double bc2 =
      1.0 - std::pow(sp.beta2, static_cast<double>(state.step_count));

  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& w = net.weights[l];
    const auto& mask = net.masks[l];
    const auto& gw = grads.weights[l];
    auto& m1 = state.m1[l];
    auto& m2 = state.m2[l];

    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask.data[i] == 0.0) continue;  // pruned weights stay frozen at 0
      const double g = gw.data[i] + sp.weight_decay * w.data[i];
      switch (sp.kind) {
        case OptimizerKind::sgd_momentum: {
          m1.data[i] = sp.momentum * m1.data[i] + g;
          w.data[i] -= lr * m1.data[i];
          break;
        }
        case OptimizerKind::adam: {
          m1.data[i] = sp.beta1 * m1.data[i] + (1.0 - sp.beta1) * g;
          m2.data[i] = sp.beta2 * m2.data[i] + (1.0 - sp.beta2) * g * g;
          const double mhat = m1.data[i] / bc1;
          const double vhat = m2.data[i] / bc2;
          w.data[i] -= lr * mhat / (std::sqrt(vhat) + sp.epsilon);
          break;
        }
        case OptimizerKind::rmsprop: {
          m2.data[i] = sp.rho * m2.data[i] + (1.0 - sp.rho) * g * g;
          w.data[i] -= lr * g / (std::sqrt(m2.data[i]) + sp.epsilon);
          break;
        }
      }
    }

    auto& b = net.biases[l];
    const auto& gb = grads.biases[l];
    auto& bm1 = state.bias_m1[l];
    auto& bm2 = state.bias_m2[l];
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double g = gb[i];  // no decay on biases
      switch (sp.kind) {
        case OptimizerKind::sgd_momentum: {
          bm1[i] = sp.momentum * bm1[i] + g;
          b[i] -= lr * bm1[i];
          break;
        }
        case OptimizerKind::adam: {
          bm1[i] = sp.beta1 * bm1[i] + (1.0 - sp.beta1) * g;
          bm2[i] = sp.beta2 * bm2[i] + (1.0 - sp.beta2) * g * g;
          b[i] -= lr * (bm1[i] / bc1) / (std::sqrt(bm2[i] / bc2) + sp.epsilon);
          break;
        }
        case OptimizerKind::rmsprop: {
          bm2[i] = sp.rho * bm2[i] + (1.0 - sp.rho) * g * g;
          b[i] -= lr * g / (std::sqrt(bm2[i]) + sp.epsilon);
          break;
        }
      }
    }
  }
}

}  // namespace silo
