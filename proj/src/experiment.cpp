#include "silo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace silo {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key \"" + it.key() + "\"");
  }
}

const json& require_key(const json& j, const std::string& where,
                        const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double get_number(const json& j, const std::string& where, const char* key) {
  return as_number(require_key(j, where, key), where + "." + key);
}

double get_number_or(const json& j, const std::string& where, const char* key,
                     double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, where + "." + key);
}

std::uint64_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number() && v.get<double>() < 0)) {
    fail(where, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::uint64_t get_count(const json& j, const std::string& where,
                        const char* key) {
  return as_count(require_key(j, where, key), where + "." + key);
}

std::uint64_t get_count_or(const json& j, const std::string& where,
                           const char* key, std::uint64_t fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : as_count(*it, where + "." + key);
}

std::string get_string(const json& j, const std::string& where,
                       const char* key) {
  const json& v = require_key(j, where, key);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::size_t> as_count_list(const json& v,
                                       const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  std::vector<std::size_t> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<std::size_t>(
        as_count(v[i], where + "[" + std::to_string(i) + "]")));
  }
  return out;
}

DatasetSpec parse_dataset(const json& j) {
  require_object(j, "dataset");
  DatasetSpec d;
  const std::string kind = get_string(j, "dataset", "kind");
  if (kind == "synthetic") {
    reject_unknown(j, "dataset",
                   {"kind", "n", "dim", "classes", "sigma_x", "limit"});
    d.kind = DataKind::synthetic;
    d.n = get_count_or(j, "dataset", "n", 2000);
    d.dim = get_count_or(j, "dataset", "dim", 16);
    d.classes = get_count_or(j, "dataset", "classes", 4);
    d.sigma_x = get_number_or(j, "dataset", "sigma_x", 1.0);
    if (d.n == 0) fail("dataset.n", "must be >= 1");
    if (d.dim == 0) fail("dataset.dim", "must be >= 1");
    if (d.classes < 2) fail("dataset.classes", "must be >= 2");
    if (!(d.sigma_x > 0.0)) fail("dataset.sigma_x", "must be > 0");
  } else if (kind == "mnist_idx") {
    reject_unknown(j, "dataset", {"kind", "images", "labels", "limit"});
    d.kind = DataKind::mnist_idx;
    d.images = get_string(j, "dataset", "images");
    d.labels = get_string(j, "dataset", "labels");
  } else if (kind == "cifar10_bin") {
    reject_unknown(j, "dataset", {"kind", "path", "limit"});
    d.kind = DataKind::cifar10_bin;
    d.path = get_string(j, "dataset", "path");
  } else {
    fail("dataset.kind", "unknown dataset kind \"" + kind + "\"");
  }
  if (j.contains("limit")) {
    d.limit = get_count(j, "dataset", "limit");
    if (*d.limit == 0) fail("dataset.limit", "must be >= 1");
  }
  return d;
}

SplitSpec parse_split(const json& j) {
  require_object(j, "split");
  reject_unknown(j, "split", {"train_fraction", "val_fraction", "shuffle_seed"});
  SplitSpec s;
  s.train_fraction = get_number_or(j, "split", "train_fraction", 0.8);
  s.val_fraction = get_number_or(j, "split", "val_fraction", 0.1);
  s.shuffle_seed = get_count_or(j, "split", "shuffle_seed", 0);
  if (!(s.train_fraction > 0.0) || !(s.val_fraction > 0.0) ||
      !(s.train_fraction + s.val_fraction < 1.0)) {
    fail("split", "fractions must be positive and leave a test remainder");
  }
  return s;
}

Activation parse_activation(const std::string& name,
                            const std::string& where) {
  if (name == "relu") return Activation::relu;
  if (name == "gelu") return Activation::gelu;
  fail(where, "unknown activation \"" + name + "\"");
}

InitOptions parse_init(const json& j, std::size_t layer_count) {
  require_object(j, "init");
  reject_unknown(j, "init", {"mode", "sigma_w", "bias_layers"});
  InitOptions o;
  const std::string mode = get_string(j, "init", "mode");
  if (mode == "training") {
    o.mode = InitMode::training;
    if (j.contains("sigma_w") || j.contains("bias_layers")) {
      fail("init", "sigma_w/bias_layers apply to theory mode only");
    }
  } else if (mode == "theory") {
    o.mode = InitMode::theory;
    o.sigma_w = get_number_or(j, "init", "sigma_w", 1.0);
    if (!(o.sigma_w > 0.0)) fail("init.sigma_w", "must be > 0");
    if (j.contains("bias_layers")) {
      const json& b = j["bias_layers"];
      if (!b.is_array()) fail("init.bias_layers", "expected an array");
      if (b.size() != layer_count) {
        fail("init.bias_layers", "expected one flag per weight layer (" +
                                     std::to_string(layer_count) + ")");
      }
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!b[i].is_boolean()) fail("init.bias_layers", "expected booleans");
        o.bias_layers.push_back(b[i].get<bool>());
      }
    }
  } else {
    fail("init.mode", "unknown mode \"" + mode + "\"");
  }
  return o;
}

OptimizerSpec parse_optimizer(const json& j) {
  require_object(j, "optimizer");
  OptimizerSpec o;
  const std::string kind = get_string(j, "optimizer", "kind");
  if (kind == "sgd_momentum") {
    reject_unknown(j, "optimizer", {"kind", "momentum", "weight_decay"});
    o.kind = OptimizerKind::sgd_momentum;
    o.momentum = get_number_or(j, "optimizer", "momentum", o.momentum);
    if (!(o.momentum >= 0.0 && o.momentum < 1.0)) {
      fail("optimizer.momentum", "must be in [0,1)");
    }
  } else if (kind == "adam") {
    reject_unknown(j, "optimizer",
                   {"kind", "beta1", "beta2", "epsilon", "weight_decay"});
    o.kind = OptimizerKind::adam;
    o.beta1 = get_number_or(j, "optimizer", "beta1", o.beta1);
    o.beta2 = get_number_or(j, "optimizer", "beta2", o.beta2);
    o.epsilon = get_number_or(j, "optimizer", "epsilon", o.epsilon);
    if (!(o.beta1 >= 0.0 && o.beta1 < 1.0)) {
      fail("optimizer.beta1", "must be in [0,1)");
    }
    if (!(o.beta2 >= 0.0 && o.beta2 < 1.0)) {
      fail("optimizer.beta2", "must be in [0,1)");
    }
    if (!(o.epsilon > 0.0)) fail("optimizer.epsilon", "must be > 0");
  } else if (kind == "rmsprop") {
    reject_unknown(j, "optimizer", {"kind", "rho", "epsilon", "weight_decay"});
    o.kind = OptimizerKind::rmsprop;
    o.rho = get_number_or(j, "optimizer", "rho", o.rho);
    o.epsilon = get_number_or(j, "optimizer", "epsilon", o.epsilon);
    if (!(o.rho >= 0.0 && o.rho < 1.0)) fail("optimizer.rho", "must be in [0,1)");
    if (!(o.epsilon > 0.0)) fail("optimizer.epsilon", "must be > 0");
  } else {
    fail("optimizer.kind", "unknown optimizer \"" + kind + "\"");
  }
  o.weight_decay = get_number_or(j, "optimizer", "weight_decay", o.weight_decay);
  if (!(o.weight_decay >= 0.0)) fail("optimizer.weight_decay", "must be >= 0");
  return o;
}

ScheduleSpec parse_schedule(const json& j) {
  require_object(j, "schedule");
  ScheduleSpec s;
  const std::string kind = get_string(j, "schedule", "kind");
  if (kind == "constant") {
    reject_unknown(j, "schedule", {"kind", "lr"});
    s.kind = ScheduleKind::constant;
    s.lr = get_number(j, "schedule", "lr");
  } else if (kind == "linear_decay" || kind == "cosine") {
    reject_unknown(j, "schedule", {"kind", "lr0", "total_steps"});
    s.kind = kind == "cosine" ? ScheduleKind::cosine : ScheduleKind::linear_decay;
    s.lr0 = get_number(j, "schedule", "lr0");
    s.total_steps = get_count(j, "schedule", "total_steps");
  } else if (kind == "cyclical") {
    reject_unknown(j, "schedule", {"kind", "lo", "hi", "step_size"});
    s.kind = ScheduleKind::cyclical;
    s.lo = get_number(j, "schedule", "lo");
    s.hi = get_number(j, "schedule", "hi");
    s.step_size = get_count(j, "schedule", "step_size");
  } else if (kind == "warmup" || kind == "silo") {
    if (kind == "warmup") {
      reject_unknown(j, "schedule",
                     {"kind", "max_lr", "warmup_steps", "drop_steps",
                      "drop_factor"});
      s.kind = ScheduleKind::warmup;
      s.max_lr = get_number(j, "schedule", "max_lr");
    } else {
      reject_unknown(j, "schedule",
                     {"kind", "epsilon", "delta", "beta", "q", "p",
                      "warmup_steps", "drop_steps", "drop_factor"});
      s.kind = ScheduleKind::silo;
      s.epsilon = get_number(j, "schedule", "epsilon");
      s.delta = get_number(j, "schedule", "delta");
      s.beta = get_number_or(j, "schedule", "beta", s.beta);
      s.q = get_count_or(j, "schedule", "q", s.q);
      s.rate_p = get_number(j, "schedule", "p");
    }
    s.warmup_steps = get_count_or(j, "schedule", "warmup_steps", 0);
    if (j.contains("drop_steps")) {
      s.drop_steps = as_count_list(j["drop_steps"], "schedule.drop_steps");
    }
    s.drop_factor = get_number_or(j, "schedule", "drop_factor", s.drop_factor);
  } else {
    fail("schedule.kind", "unknown schedule \"" + kind + "\"");
  }
  validate_schedule(s);
  return s;
}

PruneKind parse_prune_kind(const std::string& name) {
  if (name == "global_magnitude") return PruneKind::global_magnitude;
  if (name == "layer_magnitude") return PruneKind::layer_magnitude;
  if (name == "global_gradient") return PruneKind::global_gradient;
  if (name == "lamp") return PruneKind::lamp;
  if (name == "l1_neuron") return PruneKind::l1_neuron;
  fail("pruning.method", "unknown method \"" + name + "\"");
}

// Candidate schedules reuse the silo spec's within-cycle shape; only the
// peak differs.
ScheduleSpec warmup_shape_of(const ScheduleSpec& silo, double peak) {
  ScheduleSpec s;
  s.kind = ScheduleKind::warmup;
  s.max_lr = peak;
  s.warmup_steps = silo.warmup_steps;
  s.drop_steps = silo.drop_steps;
  s.drop_factor = silo.drop_factor;
  return s;
}

void prune_once(MaskedNetwork& net, const PruneRunConfig& cfg,
                const Dataset& scoring) {
  if (cfg.method.kind == PruneKind::l1_neuron) {
    prune_neurons_l1(net, cfg.rate_p);
  } else {
    prune_step(net, score_weights(net, cfg.method, &scoring), cfg.rate_p);
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc) {
  require_object(doc, "config");
  reject_unknown(doc, "config",
                 {"dataset", "split", "arch", "init", "optimizer", "schedule",
                  "pruning", "seed", "out_dir"});
  ExperimentConfig c;
  c.dataset = parse_dataset(require_key(doc, "config", "dataset"));
  if (doc.contains("split")) c.split = parse_split(doc["split"]);

  const json& arch = require_key(doc, "config", "arch");
  require_object(arch, "arch");
  reject_unknown(arch, "arch", {"hidden", "activation"});
  c.hidden = as_count_list(require_key(arch, "arch", "hidden"), "arch.hidden");
  if (c.hidden.empty()) fail("arch.hidden", "need at least one hidden layer");
  for (std::size_t h : c.hidden) {
    if (h == 0) fail("arch.hidden", "layer widths must be >= 1");
  }
  if (arch.contains("activation")) {
    c.activation =
        parse_activation(get_string(arch, "arch", "activation"), "arch.activation");
  }

  if (doc.contains("init")) c.init = parse_init(doc["init"], c.hidden.size() + 1);
  if (doc.contains("optimizer")) c.optimizer = parse_optimizer(doc["optimizer"]);
  c.schedule = parse_schedule(require_key(doc, "config", "schedule"));

  const json& pj = require_key(doc, "config", "pruning");
  require_object(pj, "pruning");
  reject_unknown(pj, "pruning",
                 {"method", "rate", "cycles", "epochs", "batch", "patience",
                  "rewind_epoch", "scoring_size", "gradient_batch_size"});
  c.method.kind = parse_prune_kind(get_string(pj, "pruning", "method"));
  if (pj.contains("gradient_batch_size")) {
    if (c.method.kind != PruneKind::global_gradient) {
      fail("pruning.gradient_batch_size", "applies to global_gradient only");
    }
    c.method.gradient_batch_size = get_count(pj, "pruning", "gradient_batch_size");
    if (c.method.gradient_batch_size == 0) {
      fail("pruning.gradient_batch_size", "must be >= 1");
    }
  }
  c.rate = get_number(pj, "pruning", "rate");
  if (!(c.rate > 0.0 && c.rate < 1.0)) fail("pruning.rate", "must be in (0,1)");
  c.cycles = get_count_or(pj, "pruning", "cycles", 0);
  c.epochs = get_count_or(pj, "pruning", "epochs", 10);
  c.batch = get_count_or(pj, "pruning", "batch", 128);
  c.patience = get_count_or(pj, "pruning", "patience", 10);
  if (c.epochs == 0) fail("pruning.epochs", "must be >= 1");
  if (c.batch == 0) fail("pruning.batch", "must be >= 1");
  if (c.patience == 0) fail("pruning.patience", "must be >= 1");
  if (pj.contains("rewind_epoch")) {
    c.rewind_epoch = get_count(pj, "pruning", "rewind_epoch");
    if (*c.rewind_epoch == 0) fail("pruning.rewind_epoch", "must be >= 1");
  }
  c.scoring_size = get_count_or(pj, "pruning", "scoring_size", 1024);
  if (c.scoring_size == 0) fail("pruning.scoring_size", "must be >= 1");

  c.seed = get_count(doc, "config", "seed");
  if (doc.contains("out_dir")) {
    c.out_dir = get_string(doc, "config", "out_dir");
    if (c.out_dir.empty()) fail("out_dir", "must be non-empty");
  }
  c.raw = doc;
  return c;
}

ScheduleSpec parse_schedule_spec(const json& doc) { return parse_schedule(doc); }

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return parse_experiment_config(doc);
}

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
  Dataset ds;
  switch (cfg.dataset.kind) {
    case DataKind::synthetic: {
      Rng rng = Rng(cfg.seed).child(500);
      ds = make_synthetic_gaussian(rng, cfg.dataset.n, cfg.dataset.dim,
                                   cfg.dataset.classes, cfg.dataset.sigma_x);
      break;
    }
    case DataKind::mnist_idx:
      ds = load_mnist_idx(cfg.dataset.images, cfg.dataset.labels);
      break;
    case DataKind::cifar10_bin:
      ds = load_cifar10_bin(cfg.dataset.path);
      break;
  }
  if (cfg.dataset.limit.has_value() && *cfg.dataset.limit < ds.size()) {
    std::vector<std::size_t> rows(*cfg.dataset.limit);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    ds = take_rows(ds, rows);
  }
  return ds;
}

PruneRunConfig to_run_config(const ExperimentConfig& cfg,
                             std::size_t input_dim, std::size_t classes) {
  PruneRunConfig r;
  r.layer_sizes.reserve(cfg.hidden.size() + 2);
  r.layer_sizes.push_back(input_dim);
  r.layer_sizes.insert(r.layer_sizes.end(), cfg.hidden.begin(),
                       cfg.hidden.end());
  r.layer_sizes.push_back(classes);
  r.activation = cfg.activation;
  r.init = cfg.init;
  r.optimizer = cfg.optimizer;
  r.schedule = cfg.schedule;
  r.method = cfg.method;
  r.rate_p = cfg.rate;
  r.cycles = cfg.cycles;
  r.epochs = cfg.epochs;
  r.batch = cfg.batch;
  r.patience = cfg.patience;
  r.rewind_epoch = cfg.rewind_epoch;
  r.scoring_size = cfg.scoring_size;
  r.seed = cfg.seed;
  return r;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  const Dataset ds = load_experiment_dataset(cfg);
  const SplitDataset parts = split_dataset(ds, cfg.split);
  const PruneRunConfig run_cfg = to_run_config(cfg, ds.dim(), ds.num_classes);

  std::filesystem::create_directories(cfg.out_dir);
  const RunReport report = run_iterative_pruning(run_cfg, parts.train,
                                                 parts.val, parts.test,
                                                 &cfg.out_dir);
  write_cycles_csv(cfg.out_dir + "/cycles.csv", report);
  write_run_json(cfg.out_dir + "/run.json", cfg, report);
  for (const CycleReport& c : report.cycles) {
    const std::string m = std::to_string(c.cycle);
    write_histogram_csv(cfg.out_dir + "/hist_grad_" + m + ".csv", c.grad_hist);
    write_histogram_csv(cfg.out_dir + "/hist_hidden_" + m + ".csv",
                        c.hidden_hist);
  }
  return report;
}

std::vector<double> default_oracle_grid(std::size_t points) {
  if (points < 2) {
    throw std::invalid_argument("oracle grid needs at least 2 points");
  }
  std::vector<double> grid(points);
  const double lo = -4.0;
  const double hi = -1.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = std::pow(10.0, lo + (hi - lo) * t);
  }
  grid.front() = 1e-4;
  grid.back() = 1e-1;
  return grid;
}

OracleResult oracle_search(const ExperimentConfig& cfg,
                           const std::vector<double>& grid, bool parallel) {
  if (grid.size() < 2) {
    throw std::invalid_argument("oracle: grid needs at least 2 points");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw std::invalid_argument("oracle: grid values must be finite and > 0");
    }
    if (i > 0 && grid[i] < grid[i - 1]) {
      throw std::invalid_argument("oracle: grid must be ascending");
    }
  }
  if (cfg.schedule.kind != ScheduleKind::silo) {
    throw std::invalid_argument(
        "oracle: config needs a silo schedule (it fixes the warmup shape "
        "and the comparison column)");
  }

  const Dataset ds = load_experiment_dataset(cfg);
  const SplitDataset parts = split_dataset(ds, cfg.split);
  const PruneRunConfig base = to_run_config(cfg, ds.dim(), ds.num_classes);
  if (!(base.rate_p > 0.0 && base.rate_p < 1.0)) {
    throw std::invalid_argument("oracle: pruning rate must be in (0,1)");
  }

  Rng root(base.seed);
  Rng init_rng = root.child(0);
  MaskedNetwork net =
      init_network(init_rng, base.layer_sizes, base.activation, base.init);
  const Dataset scoring =
      scoring_subset(parts.train, base.scoring_size, root.child(1).seed());

  const bool par = parallel;
  OracleResult res;
  res.grid = grid;
  res.cycles.reserve(base.cycles + 1);

  for (std::size_t m = 0; m <= base.cycles; ++m) {
    if (m > 0) prune_once(net, base, scoring);

    // All candidates start from the same pruned weights and share the same
    // epoch streams; the peak lr is the only difference. The schedule itself
    // is rewound each cycle (weights are not), matching how the silo runs
    // train.
    const Rng cycle_rng = root.child(100 + m);
    const std::int64_t n = static_cast<std::int64_t>(grid.size());
    std::vector<double> accs(grid.size(), 0.0);
    std::vector<MaskedNetwork> nets(grid.size());
    std::exception_ptr err = nullptr;

#pragma omp parallel for schedule(dynamic) if (par)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        PruneRunConfig cand = base;
        cand.schedule = warmup_shape_of(cfg.schedule, grid[i]);
        MaskedNetwork candidate_net = net;
        const TrainOutcome t = train_cycle(candidate_net, cand, parts.train,
                                           parts.val, m, cycle_rng, nullptr);
        accs[i] = t.best_val_acc;
        nets[i] = std::move(candidate_net);
      } catch (...) {
#pragma omp critical
        { err = std::current_exception(); }
      }
    }
    if (err) std::rethrow_exception(err);

    // Grid order; ties keep the first (smaller) lr.
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (accs[i] > accs[best]) best = i;
    }
    OracleCycle oc;
    oc.cycle = m;
    oc.best_max_lr = grid[best];
    oc.interval_lo = grid[best];
    oc.interval_hi = grid[best];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (accs[i] >= accs[best] - 0.005) {
        oc.interval_lo = std::min(oc.interval_lo, grid[i]);
        oc.interval_hi = std::max(oc.interval_hi, grid[i]);
      }
    }
    oc.silo_max_lr = schedule_peak_lr(cfg.schedule, m);
    oc.val_acc = std::move(accs);
    res.cycles.push_back(std::move(oc));

    net = std::move(nets[best]);
  }
  return res;
}

std::vector<DistributionReport> gradient_distribution_report(
    const std::string& run_dir) {
  std::ifstream in(run_dir + "/run.json");
  if (!in) throw std::runtime_error("report: cannot open " + run_dir + "/run.json");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("report: " + run_dir + "/run.json: " + e.what());
  }
  if (!doc.contains("config") || !doc.contains("cycles")) {
    throw std::runtime_error("report: run.json lacks config/cycles");
  }
  const ExperimentConfig cfg = parse_experiment_config(doc["config"]);

  const Dataset ds = load_experiment_dataset(cfg);
  const SplitDataset parts = split_dataset(ds, cfg.split);
  // Mirrors the run driver's scoring stream, so the histograms are computed
  // over the same fixed subset the run used.
  const Dataset scoring = scoring_subset(parts.train, cfg.scoring_size,
                                         Rng(cfg.seed).child(1).seed());

  std::vector<DistributionReport> out;
  out.reserve(doc["cycles"].size());
  for (std::size_t m = 0; m < doc["cycles"].size(); ++m) {
    const std::string path =
        run_dir + "/checkpoint_" + std::to_string(m) + ".json";
    if (!std::filesystem::exists(path)) {
      throw std::runtime_error("report: missing checkpoint " + path);
    }
    const MaskedNetwork net = load_network(path);
    DistributionReport r;
    r.cycle = m;
    r.gradients = gradient_histogram(net, scoring);
    r.hidden = hidden_histogram(net, scoring);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_cycles_csv(const std::string& path, const RunReport& report) {
  std::ofstream out = open_out(path);
  out << "cycle,lambda_percent,max_lr,epochs_run,best_val_acc,test_acc,"
         "train_loss,grad_std,hidden_std,ewg\n";
  for (const CycleReport& c : report.cycles) {
    out << c.cycle << ',' << format_double(c.lambda_percent) << ','
        << format_double(c.max_lr) << ',' << c.epochs_run << ','
        << format_double(c.best_val_acc) << ',' << format_double(c.test_acc)
        << ',' << format_double(c.train_loss) << ','
        << format_double(c.grad_hist.std) << ','
        << format_double(c.hidden_hist.std) << ',' << format_double(c.ewg)
        << '\n';
  }
}

void write_oracle_csv(const std::string& path, const OracleResult& oracle) {
  std::ofstream out = open_out(path);
  out << "cycle,best_max_lr,interval_lo,interval_hi,silo_max_lr\n";
  for (const OracleCycle& c : oracle.cycles) {
    out << c.cycle << ',' << format_double(c.best_max_lr) << ','
        << format_double(c.interval_lo) << ',' << format_double(c.interval_hi)
        << ',' << format_double(c.silo_max_lr) << '\n';
  }
}

void write_histogram_csv(const std::string& path, const HistogramSummary& h) {
  std::ofstream out = open_out(path);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out << format_double(h.bin_edges[b]) << ','
        << format_double(h.bin_edges[b + 1]) << ',' << h.counts[b] << '\n';
  }
}

nlohmann::json histogram_to_json(const HistogramSummary& h) {
  return json{{"bin_edges", h.bin_edges},
              {"counts", h.counts},
              {"mean", h.mean},
              {"std", h.std},
              {"n", h.n}};
}

nlohmann::json report_to_json(const RunReport& report) {
  json cycles = json::array();
  for (const CycleReport& c : report.cycles) {
    cycles.push_back(json{{"cycle", c.cycle},
                          {"lambda_percent", c.lambda_percent},
                          {"max_lr", c.max_lr},
                          {"epochs_run", c.epochs_run},
                          {"best_epoch", c.best_epoch},
                          {"best_val_acc", c.best_val_acc},
                          {"test_acc", c.test_acc},
                          {"train_loss", c.train_loss},
                          {"ewg", c.ewg},
                          {"grad_hist", histogram_to_json(c.grad_hist)},
                          {"hidden_hist", histogram_to_json(c.hidden_hist)}});
  }
  return cycles;
}

void write_run_json(const std::string& path, const ExperimentConfig& cfg,
                    const RunReport& report) {
  std::ofstream out = open_out(path);
  json doc;
  doc["config"] = cfg.raw;
  doc["cycles"] = report_to_json(report);
  out << doc.dump(2) << '\n';
}

}  // namespace silo
