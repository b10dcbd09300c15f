#include <cstdlib>
#include <cstdio>
#include "silo/run.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "silo/theory.hpp"

namespace silo {

TrainOutcome train_cycle(MaskedNetwork& net, const PruneRunConfig& cfg,
                         const Dataset& train, const Dataset& val,
                         std::size_t cycle, const Rng& cycle_rng,
                         NetSnapshot* rewind_snapshot) {
  OptimizerState opt = OptimizerState::create(net, cfg.optimizer);
  const ScheduleState sched_state{cycle, 0};

  TrainOutcome out;
  double best_val_loss = std::numeric_limits<double>::infinity();
  NetSnapshot best = take_snapshot(net);
  std::size_t since_best = 0;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<Matrix> epoch_start = net.weights;

    BatchStream batches =
        iterate_batches(train, cfg.batch, cycle_rng.child(epoch).seed());
    Matrix x;
    std::vector<int> y;
    double loss_sum = 0.0;
    while (batches.next(x, y)) {
      const ForwardTrace trace = forward(net, x);
      auto [loss, grads] = loss_and_backward(net, trace, y);
      optimizer_step(net, opt, grads,
                     lr_at(cfg.schedule, sched_state, step));
      loss_sum += loss * static_cast<double>(x.rows);
      ++step;
    }
    out.epochs_run = epoch;
    out.last_train_loss = loss_sum / static_cast<double>(train.size());
    out.last_ewg = measure_ewg(epoch_start, net.weights, net.masks);

    if (rewind_snapshot != nullptr && cycle == 0 &&
        epoch == std::min(cfg.rewind_epoch.value_or(1), cfg.epochs)) {
      *rewind_snapshot = take_snapshot(net);
    }

    const auto [val_acc, val_loss] = evaluate(net, val);
    if (std::getenv("SILO_DEBUG_VAL") != nullptr) {
      std::fprintf(stderr, "cyc %d ep %d val_loss %.6f val_acc %.4f train_loss %.6f\n",
                   cycle, epoch, val_loss, val_acc,
                   loss_sum / static_cast<double>(train.size()));
    }
    if (val_loss < best_val_loss) {
      best_val_loss = val_loss;
      best = take_snapshot(net);
      out.best_epoch = epoch;
      out.best_val_acc = val_acc;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  // The converged checkpoint is the best-validation net.
  rewind_to_snapshot(net, best);
  if (rewind_snapshot != nullptr && cycle == 0 &&
      rewind_snapshot->weights.empty()) {
    // Early stopping ended cycle 0 before the snapshot epoch; fall back to
    // the converged weights so IMP still has a rewind point.
    *rewind_snapshot = take_snapshot(net);
  }
  return out;
}

Dataset scoring_subset(const Dataset& train, std::size_t scoring_size,
                       std::uint64_t seed) {
  Rng rng(seed);
  auto perm = random_permutation(rng, train.size());
  perm.resize(std::min(scoring_size, train.size()));
  return take_rows(train, perm);
}

HistogramSummary gradient_histogram(const MaskedNetwork& net,
                                    const Dataset& scoring) {
  // All weight positions contribute, masked ones as exact zeros; the
  // histogram therefore narrows roughly with sqrt(lambda) under pruning.
  const Gradients g = mean_gradients(net, scoring);
  std::vector<double> values;
  values.reserve(net.total_weights());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& gw = g.weights[l];
    values.insert(values.end(), gw.data.begin(), gw.data.end());
  }
  return build_histogram(values, sturges_bin_count(values.size()));
}

HistogramSummary hidden_histogram(const MaskedNetwork& net,
                                  const Dataset& scoring) {
  std::vector<double> values;
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < scoring.size(); start += kChunk) {
    const std::size_t take = std::min(kChunk, scoring.size() - start);
    Matrix x(take, scoring.dim());
    for (std::size_t i = 0; i < take; ++i) {
      const double* src = scoring.features.row(start + i);
      std::copy(src, src + scoring.dim(), x.row(i));
    }
    const ForwardTrace t = forward(net, x);
    for (const Matrix& h : t.post) {
      values.insert(values.end(), h.data.begin(), h.data.end());
    }
  }
  return build_histogram(values, sturges_bin_count(values.size()));
}

RunReport run_iterative_pruning(const PruneRunConfig& cfg,
                                const Dataset& train, const Dataset& val,
                                const Dataset& test,
                                const std::string* checkpoint_dir) {
  if (!(cfg.rate_p > 0.0 && cfg.rate_p < 1.0)) {
    throw std::invalid_argument("run: pruning rate must be in (0,1)");
  }
  if (cfg.epochs == 0) throw std::invalid_argument("run: epochs must be >= 1");
  if (cfg.rewind_epoch.has_value() && *cfg.rewind_epoch == 0) {
    throw std::invalid_argument("run: rewind_epoch must be >= 1");
  }
  validate_schedule(cfg.schedule);

  Rng root(cfg.seed);
  Rng init_rng = root.child(0);
  MaskedNetwork net =
      init_network(init_rng, cfg.layer_sizes, cfg.activation, cfg.init);

  const Dataset scoring =
      scoring_subset(train, cfg.scoring_size, root.child(1).seed());

  NetSnapshot rewind_snapshot;
  const bool imp = cfg.rewind_epoch.has_value();

  RunReport report;
  for (std::size_t m = 0; m <= cfg.cycles; ++m) {
    if (m > 0) {
      if (cfg.method.kind == PruneKind::l1_neuron) {
        prune_neurons_l1(net, cfg.rate_p);
      } else {
        prune_step(net, score_weights(net, cfg.method, &scoring), cfg.rate_p);
      }
      if (imp) rewind_to_snapshot(net, rewind_snapshot);
    }

    const TrainOutcome t =
        train_cycle(net, cfg, train, val, m, root.child(100 + m),
                    imp ? &rewind_snapshot : nullptr);

    CycleReport r;
    r.cycle = m;
    r.lambda_percent = lambda_of(net);
    r.max_lr = schedule_peak_lr(cfg.schedule, m);
    r.epochs_run = t.epochs_run;
    r.best_epoch = t.best_epoch;
    r.best_val_acc = t.best_val_acc;
    r.test_acc = evaluate(net, test).first;
    r.train_loss = t.last_train_loss;
    r.ewg = t.last_ewg;
    r.grad_hist = gradient_histogram(net, scoring);
    r.hidden_hist = hidden_histogram(net, scoring);
    report.cycles.push_back(std::move(r));

    if (checkpoint_dir != nullptr) {
      save_network(net, *checkpoint_dir + "/checkpoint_" + std::to_string(m) +
                            ".json");
    }
  }
  return report;
}

}  // namespace silo
