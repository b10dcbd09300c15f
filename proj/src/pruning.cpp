#include "silo/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace silo {

std::vector<WeightScore> score_weights(const MaskedNetwork& net,
                                       const PruneMethod& method,
                                       const Dataset* data) {
  std::vector<WeightScore> scores;
  scores.reserve(net.active_weights());

  auto emit_active = [&](auto&& score_of) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const Matrix& w = net.weights[l];
      const Matrix& m = net.masks[l];
      for (std::size_t r = 0; r < w.rows; ++r) {
        for (std::size_t c = 0; c < w.cols; ++c) {
          if (m(r, c) == 0.0) continue;
          scores.push_back(WeightScore{l, r, c, score_of(l, r, c)});
        }
      }
    }
  };

  switch (method.kind) {
    case PruneKind::global_magnitude: {
      emit_active([&](std::size_t l, std::size_t r, std::size_t c) {
        return std::fabs(net.weights[l](r, c));
      });
      break;
    }
    case PruneKind::layer_magnitude: {
      // Ascending |w| rank within the layer (ties by flat index), normalized
      // by the layer's active count; rank information only, so a global cut
      // lands proportionally in every layer.
      std::vector<std::vector<double>> rank_score(net.layer_count());
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const Matrix& w = net.weights[l];
        const Matrix& m = net.masks[l];
        std::vector<std::pair<double, std::size_t>> active;
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (m.data[i] != 0.0) active.emplace_back(std::fabs(w.data[i]), i);
        }
        std::sort(active.begin(), active.end());
        rank_score[l].assign(w.size(), 0.0);
        for (std::size_t pos = 0; pos < active.size(); ++pos) {
          rank_score[l][active[pos].second] =
              static_cast<double>(pos + 1) /
              static_cast<double>(active.size());
        }
      }
      emit_active([&](std::size_t l, std::size_t r, std::size_t c) {
        return rank_score[l][r * net.weights[l].cols + c];
      });
      break;
    }
    case PruneKind::global_gradient: {
      if (data == nullptr) {
        throw std::invalid_argument(
            "score_weights: global_gradient needs scoring data");
      }
      const Dataset* scoring = data;
      Dataset truncated;
      if (method.gradient_batch_size > 0 &&
          data->size() > method.gradient_batch_size) {
        std::vector<std::size_t> rows(method.gradient_batch_size);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        truncated = take_rows(*data, rows);
        scoring = &truncated;
      }
      const Gradients g = mean_gradients(net, *scoring);
      emit_active([&](std::size_t l, std::size_t r, std::size_t c) {
        return std::fabs(net.weights[l](r, c) * g.weights[l](r, c));
      });
      break;
    }
    case PruneKind::lamp: {
      // score(u) = w_u^2 / sum of w_v^2 over active v in the same layer with
      // (|w_v|, index) >= (|w_u|, index): suffix sums in ascending-magnitude
      // order.
      std::vector<std::vector<double>> lamp_score(net.layer_count());
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const Matrix& w = net.weights[l];
        const Matrix& m = net.masks[l];
        std::vector<std::pair<double, std::size_t>> active;
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (m.data[i] != 0.0) active.emplace_back(std::fabs(w.data[i]), i);
        }
        std::sort(active.begin(), active.end());
        lamp_score[l].assign(w.size(), 0.0);
        double suffix = 0.0;
        for (std::size_t pos = active.size(); pos-- > 0;) {
          const double wv = w.data[active[pos].second];
          suffix += wv * wv;
          lamp_score[l][active[pos].second] = wv * wv / suffix;
        }
      }
      emit_active([&](std::size_t l, std::size_t r, std::size_t c) {
        return lamp_score[l][r * net.weights[l].cols + c];
      });
      break;
    }
    case PruneKind::l1_neuron:
      throw std::invalid_argument(
          "score_weights: l1_neuron is structured; use prune_neurons_l1");
  }
  return scores;
}

void prune_step(MaskedNetwork& net, std::vector<WeightScore> scores,
                double rate_p) {
  if (!(rate_p > 0.0 && rate_p < 1.0)) {
    throw std::invalid_argument("prune_step: rate must be in (0,1)");
  }
  const auto n_prune = static_cast<std::size_t>(
      rate_p * static_cast<double>(scores.size()));
  if (n_prune == 0) return;
  std::sort(scores.begin(), scores.end(),
            [](const WeightScore& a, const WeightScore& b) {
              return std::tie(a.score, a.layer, a.row, a.col) <
                     std::tie(b.score, b.layer, b.row, b.col);
            });
  for (std::size_t i = 0; i < n_prune; ++i) {
    const WeightScore& s = scores[i];
    net.masks[s.layer](s.row, s.col) = 0.0;
    net.weights[s.layer](s.row, s.col) = 0.0;
  }
}

void prune_neurons_l1(MaskedNetwork& net, double rate_p) {
  if (!(rate_p > 0.0 && rate_p < 1.0)) {
    throw std::invalid_argument("prune_neurons_l1: rate must be in (0,1)");
  }
  // Hidden layer h owns weight matrices h (incoming) and h+1 (outgoing).
  for (std::size_t h = 0; h + 1 < net.layer_count(); ++h) {
    const Matrix& w_in = net.weights[h];
    const Matrix& m_in = net.masks[h];
    const std::size_t neurons = w_in.cols;

    std::vector<std::pair<double, std::size_t>> active;  // (L1, neuron)
    for (std::size_t j = 0; j < neurons; ++j) {
      bool alive = false;
      double l1 = 0.0;
      for (std::size_t i = 0; i < w_in.rows; ++i) {
        if (m_in(i, j) != 0.0) {
          alive = true;
          l1 += std::fabs(w_in(i, j));
        }
      }
      if (alive) active.emplace_back(l1, j);
    }
    if (active.empty()) {
      throw std::runtime_error("prune_neurons_l1: hidden layer has no active "
                               "neurons");
    }
    const auto n_remove = static_cast<std::size_t>(
        rate_p * static_cast<double>(active.size()));
    if (n_remove >= active.size()) {
      throw std::runtime_error("prune_neurons_l1: layer would reach 0 neurons");
    }
    std::sort(active.begin(), active.end());
    for (std::size_t idx = 0; idx < n_remove; ++idx) {
      const std::size_t j = active[idx].second;
      for (std::size_t i = 0; i < net.weights[h].rows; ++i) {
        net.masks[h](i, j) = 0.0;
        net.weights[h](i, j) = 0.0;
      }
      for (std::size_t o = 0; o < net.weights[h + 1].cols; ++o) {
        net.masks[h + 1](j, o) = 0.0;
        net.weights[h + 1](j, o) = 0.0;
      }
    }
  }
}

double lambda_of(const MaskedNetwork& net) {
  return 100.0 * static_cast<double>(net.active_weights()) /
         static_cast<double>(net.total_weights());
}

Gradients mean_gradients(const MaskedNetwork& net, const Dataset& data) {
  if (data.size() == 0) {
    throw std::invalid_argument("mean_gradients: empty data");
  }
  Gradients acc;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    acc.weights.emplace_back(net.weights[l].rows, net.weights[l].cols);
    acc.biases.emplace_back(net.biases[l].size(), 0.0);
  }

  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t take = std::min(kChunk, data.size() - start);
    Matrix x(take, data.dim());
    std::vector<int> y(take);
    for (std::size_t i = 0; i < take; ++i) {
      const double* src = data.features.row(start + i);
      std::copy(src, src + data.dim(), x.row(i));
      y[i] = data.labels[start + i];
    }
    const ForwardTrace t = forward(net, x);
    auto [loss, g] = loss_and_backward(net, t, y);
    (void)loss;
    // Chunk gradients are per-sample means; weight by chunk size so the
    // total is the mean over the full pass.
    const double w = static_cast<double>(take);
    for (std::size_t l = 0; l < acc.weights.size(); ++l) {
      for (std::size_t i = 0; i < acc.weights[l].size(); ++i) {
        acc.weights[l].data[i] += w * g.weights[l].data[i];
      }
      for (std::size_t i = 0; i < acc.biases[l].size(); ++i) {
        acc.biases[l][i] += w * g.biases[l][i];
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t l = 0; l < acc.weights.size(); ++l) {
    for (auto& v : acc.weights[l].data) v *= inv_n;
    for (auto& v : acc.biases[l]) v *= inv_n;
  }
  return acc;
}

NetSnapshot take_snapshot(const MaskedNetwork& net) {
  return NetSnapshot{net.weights, net.biases};
}

void rewind_to_snapshot(MaskedNetwork& net, const NetSnapshot& snapshot) {
  if (snapshot.weights.size() != net.layer_count()) {
    throw std::invalid_argument("rewind: layer count mismatch");
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (!snapshot.weights[l].same_shape(net.weights[l]) ||
        snapshot.biases[l].size() != net.biases[l].size()) {
      throw std::invalid_argument("rewind: shape mismatch");
    }
    for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
      net.weights[l].data[i] = net.masks[l].data[i] != 0.0
                                   ? snapshot.weights[l].data[i]
                                   : 0.0;
    }
    net.biases[l] = snapshot.biases[l];
  }
}

}  // namespace silo
