#pragma once

#include <cstddef>
#include <vector>

#include "silo/theory.hpp"

namespace silo {

enum class ScheduleKind { constant, linear_decay, warmup, cyclical, cosine, silo };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;

  double lr = 0.0;  // constant

  double lr0 = 0.0;             // linear_decay, cosine
  std::size_t total_steps = 0;  // linear_decay, cosine

  // warmup (also the within-cycle shape for silo)
  double max_lr = 0.0;
  std::size_t warmup_steps = 0;
  std::vector<std::size_t> drop_steps;  // strictly ascending
  double drop_factor = 10.0;

  // cyclical
  double lo = 0.0;
  double hi = 0.0;
  std::size_t step_size = 0;

  // silo
  double epsilon = 0.0;
  double delta = 0.0;
  double beta = 5.0;
  std::size_t q = 1;
  double rate_p = 0.0;
};

// Position within a run: pruning cycle m plus the step inside that cycle.
// The schedule is rewound to step 0 at each cycle start; lr_at is a pure
// function of (spec, m, step).
struct ScheduleState {
  std::size_t cycle = 0;
  std::size_t step = 0;
};

// Throws std::invalid_argument on any violated field constraint.
void validate_schedule(const ScheduleSpec& spec);

// Peak learning rate for pruning cycle m:
//   m <= q:  epsilon
//   m >  q:  epsilon + delta * sigmoid(beta * logit(gamma)),
//            gamma = 1 - (1-p)^(m-q).
// Evaluated in log space (logit(gamma) = log1p(-om) - log(om) with
// om = (1-p)^(m-q)), so steep beta and gamma near 0 or 1 never overflow.
double silo_max_lr(double epsilon, double delta, double beta, std::size_t q,
                   double p, std::size_t m);

// The same sigmoid ramp addressed by gamma directly (exposed for the
// symmetry property: the ramp at gamma and 1-gamma sums to delta).
double silo_lr_from_gamma(double epsilon, double delta, double beta,
                          double gamma);

// Learning rate at `step` of cycle `state.cycle`. The explicit step argument
// is authoritative; state.step is carried by training loops for bookkeeping.
double lr_at(const ScheduleSpec& spec, const ScheduleState& state,
             std::size_t step);

// Peak lr the schedule can reach within cycle m (the max_lr column of
// per-cycle reports).
double schedule_peak_lr(const ScheduleSpec& spec, std::size_t m);

// Theory-adapted per-cycle step size sqrt(K / (gamma_const * C(k))) with
// C(k) = thm1_lower_bound; nondecreasing in k as the bound shrinks.
double adapted_alpha(const TheoryParams& params, std::size_t k);

}  // namespace silo
