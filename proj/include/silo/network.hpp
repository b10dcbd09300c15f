#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "silo/dataset.hpp"
#include "silo/matrix.hpp"
#include "silo/rng.hpp"

namespace silo {

enum class Activation { relu, gelu };

// Weight init family: `theory` draws weights and (optionally, per layer)
// biases from N(0, sigma_w^2) as the bound derivations assume; `training`
// uses He-style N(0, 2/fan_in) weights with zero biases.
enum class InitMode { theory, training };

// Fully connected net with a 0/1 mask per weight. Invariant maintained by
// every operation here: mask == 0 implies weight == exactly 0. Weights are
// stored in x out; biases are never masked.
struct MaskedNetwork {
  std::vector<std::size_t> layer_sizes;  // [d, hidden..., classes]
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::vector<Matrix> masks;
  Activation activation = Activation::relu;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }

  std::size_t total_weights() const;
  std::size_t active_weights() const;
};

struct InitOptions {
  InitMode mode = InitMode::training;
  double sigma_w = 1.0;               // theory mode only
  // theory mode: which layers get N(0, sigma_w^2) biases (default: all).
  // Layers whose flag is false get zero biases.
  std::vector<bool> bias_layers;
};

MaskedNetwork init_network(Rng& rng, const std::vector<std::size_t>& sizes,
                           Activation act, const InitOptions& opts);

struct ForwardTrace {
  Matrix input;                 // the batch the trace was built from
  std::vector<Matrix> pre;      // Z per layer (batch x layer_out)
  std::vector<Matrix> post;     // activations per hidden layer
  Matrix probs;                 // softmax output (batch x classes)
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

ForwardTrace forward(const MaskedNetwork& net, const Matrix& batch);

// Mean cross-entropy over the batch plus gradients; gradients are zeroed at
// masked positions. The trace must come from forward() on this net.
std::pair<double, Gradients> loss_and_backward(const MaskedNetwork& net,
                                               const ForwardTrace& trace,
                                               const std::vector<int>& labels);

// Top-1 accuracy (argmax ties -> lowest class index) and mean loss.
std::pair<double, double> evaluate(const MaskedNetwork& net,
                                   const Dataset& ds);

double gelu(double x);
double gelu_derivative(double x);

// Zeroes weights wherever mask == 0 (repair/enforcement utility).
void apply_masks(MaskedNetwork& net);

// JSON checkpoint (format "silo-network", version 1): layer_sizes,
// activation, then per layer row-major weights, biases, mask. Load validates
// shapes, finiteness, 0/1 masks, and the masked-zero invariant.
void save_network(const MaskedNetwork& net, const std::string& path);
MaskedNetwork load_network(const std::string& path);

}  // namespace silo
