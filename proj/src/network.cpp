#include "silo/network.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "silo/special.hpp"

namespace silo {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double relu(double x) { return x > 0.0 ? x : 0.0; }

double activate(Activation act, double x) {
  return act == Activation::relu ? relu(x) : gelu(x);
}

double activate_derivative(Activation act, double x) {
  if (act == Activation::relu) return x > 0.0 ? 1.0 : 0.0;
  return gelu_derivative(x);
}

void softmax_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = m.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < m.cols; ++j) row[j] /= sum;
  }
}

std::string activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "gelu";
}

Activation activation_from_name(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "gelu") return Activation::gelu;
  throw std::runtime_error("unknown activation: " + s);
}

}  // namespace

double gelu(double x) {
  // x * Phi(x) with the exact normal CDF.
  return x * 0.5 * erfc(-x * kInvSqrt2);
}

double gelu_derivative(double x) {
  const double phi_cdf = 0.5 * erfc(-x * kInvSqrt2);
  const double phi_pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return phi_cdf + x * phi_pdf;
}

std::size_t MaskedNetwork::total_weights() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  return n;
}

std::size_t MaskedNetwork::active_weights() const {
  std::size_t n = 0;
  for (const auto& m : masks) {
    for (double v : m.data) n += (v != 0.0);
  }
  return n;
}

MaskedNetwork init_network(Rng& rng, const std::vector<std::size_t>& sizes,
                           Activation act, const InitOptions& opts) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("init_network: need at least 2 layer sizes");
  }
  MaskedNetwork net;
  net.layer_sizes = sizes;
  net.activation = act;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t fan_in = sizes[l];
    const std::size_t fan_out = sizes[l + 1];
    const double sigma =
        opts.mode == InitMode::theory
            ? opts.sigma_w
            : std::sqrt(2.0 / static_cast<double>(fan_in));
    net.weights.push_back(gaussian_matrix(rng, fan_in, fan_out, sigma));
    net.masks.emplace_back(fan_in, fan_out, 1.0);

    std::vector<double> b(fan_out, 0.0);
    const bool gaussian_bias =
        opts.mode == InitMode::theory &&
        (opts.bias_layers.empty() || (l < opts.bias_layers.size() &&
                                      opts.bias_layers[l]));
    if (gaussian_bias) {
      for (auto& v : b) v = rng.gaussian() * opts.sigma_w;
    }
    net.biases.push_back(std::move(b));
  }
  return net;
}

ForwardTrace forward(const MaskedNetwork& net, const Matrix& batch) {
  if (batch.cols != net.input_dim()) {
    throw std::invalid_argument("forward: batch width != input size");
  }
  ForwardTrace t;
  t.input = batch;
  const Matrix* h = &t.input;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Matrix z = matmul(*h, net.weights[l]);
    add_row_vector(z, net.biases[l]);
    t.pre.push_back(std::move(z));
    if (l + 1 < net.layer_count()) {
      Matrix a = t.pre.back();
      for (auto& v : a.data) v = activate(net.activation, v);
      t.post.push_back(std::move(a));
      h = &t.post.back();
    } else {
      t.probs = t.pre.back();
      softmax_rows(t.probs);
    }
  }
  return t;
}

std::pair<double, Gradients> loss_and_backward(
    const MaskedNetwork& net, const ForwardTrace& trace,
    const std::vector<int>& labels) {
  const std::size_t batch = trace.input.rows;
  const std::size_t classes = net.output_dim();
  if (labels.size() != batch) {
    throw std::invalid_argument("loss_and_backward: label count != batch");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw std::invalid_argument("loss_and_backward: label out of range");
    }
  }

  const double inv_batch = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  // dL/dZ_last = (A - Y) / batch for mean cross-entropy after softmax.
  Matrix delta = trace.probs;
  for (std::size_t i = 0; i < batch; ++i) {
    double* row = delta.row(i);
    loss -= std::log(std::max(row[labels[i]], 1e-300));
    row[labels[i]] -= 1.0;
    for (std::size_t j = 0; j < classes; ++j) row[j] *= inv_batch;
  }
  loss *= inv_batch;

  Gradients g;
  g.weights.resize(net.layer_count());
  g.biases.resize(net.layer_count());
  for (std::size_t li = net.layer_count(); li-- > 0;) {
    const Matrix& h_in = li == 0 ? trace.input : trace.post[li - 1];
    g.weights[li] = matmul_at_b(h_in, delta);
    auto& gw = g.weights[li];
    const Matrix& mask = net.masks[li];
    for (std::size_t i = 0; i < gw.size(); ++i) gw.data[i] *= mask.data[i];

    auto& gb = g.biases[li];
    gb.assign(delta.cols, 0.0);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const double* row = delta.row(r);
      for (std::size_t j = 0; j < delta.cols; ++j) gb[j] += row[j];
    }

    if (li > 0) {
      Matrix dh = matmul_a_bt(delta, net.weights[li]);
      const Matrix& z = trace.pre[li - 1];
      for (std::size_t i = 0; i < dh.size(); ++i) {
        dh.data[i] *= activate_derivative(net.activation, z.data[i]);
      }
      delta = std::move(dh);
    }
  }
  return {loss, std::move(g)};
}

std::pair<double, double> evaluate(const MaskedNetwork& net,
                                   const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  constexpr std::size_t kChunk = 256;
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < ds.size(); start += kChunk) {
    const std::size_t take = std::min(kChunk, ds.size() - start);
    Matrix x(take, ds.dim());
    for (std::size_t i = 0; i < take; ++i) {
      const double* src = ds.features.row(start + i);
      std::copy(src, src + ds.dim(), x.row(i));
    }
    const ForwardTrace t = forward(net, x);
    for (std::size_t i = 0; i < take; ++i) {
      const double* row = t.probs.row(i);
      std::size_t best = 0;
      for (std::size_t j = 1; j < t.probs.cols; ++j) {
        if (row[j] > row[best]) best = j;
      }
      const int label = ds.labels[start + i];
      correct += (static_cast<std::size_t>(label) == best);
      loss_sum -= std::log(std::max(row[label], 1e-300));
    }
  }
  const auto n = static_cast<double>(ds.size());
  return {static_cast<double>(correct) / n, loss_sum / n};
}

void apply_masks(MaskedNetwork& net) {
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& w = net.weights[l];
    const auto& m = net.masks[l];
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m.data[i] == 0.0) w.data[i] = 0.0;
    }
  }
}

void save_network(const MaskedNetwork& net, const std::string& path) {
  nlohmann::json j;
  j["format"] = "silo-network";
  j["version"] = 1;
  j["activation"] = activation_name(net.activation);
  j["layer_sizes"] = net.layer_sizes;
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    nlohmann::json layer;
    layer["weights"] = net.weights[l].data;
    layer["biases"] = net.biases[l];
    nlohmann::json mask = nlohmann::json::array();
    for (double v : net.masks[l].data) mask.push_back(v != 0.0 ? 1 : 0);
    layer["mask"] = std::move(mask);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

MaskedNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;

  if (j.value("format", "") != "silo-network" || j.value("version", 0) != 1) {
    throw std::runtime_error("checkpoint: unrecognized format/version");
  }
  MaskedNetwork net;
  net.activation = activation_from_name(j.at("activation").get<std::string>());
  net.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  if (net.layer_sizes.size() < 2) {
    throw std::runtime_error("checkpoint: fewer than 2 layer sizes");
  }
  const auto& layers = j.at("layers");
  if (layers.size() + 1 != net.layer_sizes.size()) {
    throw std::runtime_error("checkpoint: layer count mismatch");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::size_t fan_in = net.layer_sizes[l];
    const std::size_t fan_out = net.layer_sizes[l + 1];
    Matrix w(fan_in, fan_out);
    Matrix m(fan_in, fan_out);
    const auto wdata = layers[l].at("weights").get<std::vector<double>>();
    const auto mdata = layers[l].at("mask").get<std::vector<int>>();
    auto b = layers[l].at("biases").get<std::vector<double>>();
    if (wdata.size() != w.size() || mdata.size() != w.size() ||
        b.size() != fan_out) {
      throw std::runtime_error("checkpoint: layer shape mismatch");
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!std::isfinite(wdata[i])) {
        throw std::runtime_error("checkpoint: non-finite weight");
      }
      if (mdata[i] != 0 && mdata[i] != 1) {
        throw std::runtime_error("checkpoint: mask entry not 0/1");
      }
      if (mdata[i] == 0 && wdata[i] != 0.0) {
        throw std::runtime_error("checkpoint: masked weight is nonzero");
      }
      w.data[i] = wdata[i];
      m.data[i] = mdata[i];
    }
    for (double v : b) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("checkpoint: non-finite bias");
      }
    }
    net.weights.push_back(std::move(w));
    net.masks.push_back(std::move(m));
    net.biases.push_back(std::move(b));
  }
  return net;
}

}  // namespace silo
