#include "silo/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace silo {
namespace {

// sigmoid(u) evaluated through exp(-|u|) only, so both halves share the same
// rounding and sigmoid(u) + sigmoid(-u) == 1 to the last bit.
double stable_sigmoid(double u) {
  if (u >= 0.0) {
    const double e = std::exp(-u);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Warmup-with-drops shape shared by the warmup and silo kinds.
double warmup_lr(double max_lr, std::size_t warmup_steps,
                 const std::vector<std::size_t>& drop_steps,
                 double drop_factor, std::size_t step) {
  double lr;
  if (warmup_steps == 0 || step >= warmup_steps) {
    lr = max_lr;
  } else {
    lr = max_lr * (static_cast<double>(step) /
                   static_cast<double>(warmup_steps));
  }
  // A drop at step s takes effect from s+1 on, so a drop coinciding with the
  // end of warmup still lets the peak be reached.
  for (std::size_t s : drop_steps) {
    if (step > s) lr /= drop_factor;
  }
  return lr;
}

}  // namespace

void validate_schedule(const ScheduleSpec& spec) {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  switch (spec.kind) {
    case ScheduleKind::constant:
      if (spec.lr < 0.0) fail("schedule: lr must be >= 0");
      break;
    case ScheduleKind::linear_decay:
    case ScheduleKind::cosine:
      if (spec.lr0 < 0.0) fail("schedule: lr0 must be >= 0");
      if (spec.total_steps == 0) fail("schedule: total_steps must be >= 1");
      break;
    case ScheduleKind::warmup:
      if (spec.max_lr < 0.0) fail("schedule: max_lr must be >= 0");
      if (spec.drop_factor <= 0.0) fail("schedule: drop_factor must be > 0");
      for (std::size_t i = 1; i < spec.drop_steps.size(); ++i) {
        if (spec.drop_steps[i] <= spec.drop_steps[i - 1]) {
          fail("schedule: drop_steps must be strictly ascending");
        }
      }
      break;
    case ScheduleKind::cyclical:
      if (spec.lo < 0.0 || spec.hi < spec.lo) {
        fail("schedule: cyclical needs 0 <= lo <= hi");
      }
      if (spec.step_size == 0) fail("schedule: step_size must be >= 1");
      break;
    case ScheduleKind::silo:
      if (spec.epsilon < 0.0) fail("schedule: epsilon must be >= 0");
      if (spec.delta < 0.0) fail("schedule: delta must be >= 0");
      if (spec.beta <= 0.0) fail("schedule: beta must be > 0");
      if (!(spec.rate_p > 0.0 && spec.rate_p < 1.0)) {
        fail("schedule: p must be in (0,1)");
      }
      if (spec.drop_factor <= 0.0) fail("schedule: drop_factor must be > 0");
      for (std::size_t i = 1; i < spec.drop_steps.size(); ++i) {
        if (spec.drop_steps[i] <= spec.drop_steps[i - 1]) {
          fail("schedule: drop_steps must be strictly ascending");
        }
      }
      break;
  }
}

double silo_max_lr(double epsilon, double delta, double beta, std::size_t q,
                   double p, std::size_t m) {
  if (m <= q) return epsilon;
  // om = (1-p)^(m-q) = 1 - gamma, kept in closed form so logit(gamma) =
  // log1p(-om) - log(om) has no cancellation for gamma near 1; log(om) is
  // expanded as (m-q)*log1p(-p), exact in log space even when om underflows.
  const auto steps = static_cast<double>(m - q);
  const double log_om = steps * std::log1p(-p);
  const double om = std::exp(log_om);
  const double logit = std::log1p(-om) - log_om;
  return epsilon + delta * stable_sigmoid(beta * logit);
}

double silo_lr_from_gamma(double epsilon, double delta, double beta,
                          double gamma) {
  const double logit = std::log(gamma) - std::log1p(-gamma);
  return epsilon + delta * stable_sigmoid(beta * logit);
}

double lr_at(const ScheduleSpec& spec, const ScheduleState& state,
             std::size_t step) {
  switch (spec.kind) {
    case ScheduleKind::constant:
      return spec.lr;
    case ScheduleKind::linear_decay: {
      if (step >= spec.total_steps) return 0.0;
      return spec.lr0 * (1.0 - static_cast<double>(step) /
                                   static_cast<double>(spec.total_steps));
    }
    case ScheduleKind::warmup:
      return warmup_lr(spec.max_lr, spec.warmup_steps, spec.drop_steps,
                       spec.drop_factor, step);
    case ScheduleKind::cyclical: {
      const std::size_t period = 2 * spec.step_size;
      const std::size_t pos = step % period;
      const double span = spec.hi - spec.lo;
      if (pos <= spec.step_size) {
        return spec.lo + span * (static_cast<double>(pos) /
                                 static_cast<double>(spec.step_size));
      }
      return spec.hi - span * (static_cast<double>(pos - spec.step_size) /
                               static_cast<double>(spec.step_size));
    }
    case ScheduleKind::cosine: {
      if (step >= spec.total_steps) return 0.0;
      const double frac = static_cast<double>(step) /
                          static_cast<double>(spec.total_steps);
      return spec.lr0 * (1.0 + std::cos(M_PI * frac)) / 2.0;
    }
    case ScheduleKind::silo: {
      const double peak = silo_max_lr(spec.epsilon, spec.delta, spec.beta,
                                      spec.q, spec.rate_p, state.cycle);
      return warmup_lr(peak, spec.warmup_steps, spec.drop_steps,
                       spec.drop_factor, step);
    }
  }
  return 0.0;
}

double schedule_peak_lr(const ScheduleSpec& spec, std::size_t m) {
  switch (spec.kind) {
    case ScheduleKind::constant:
      return spec.lr;
    case ScheduleKind::linear_decay:
    case ScheduleKind::cosine:
      return spec.lr0;
    case ScheduleKind::warmup:
      return spec.max_lr;
    case ScheduleKind::cyclical:
      return spec.hi;
    case ScheduleKind::silo:
      return silo_max_lr(spec.epsilon, spec.delta, spec.beta, spec.q,
                         spec.rate_p, m);
  }
  return 0.0;
}

double adapted_alpha(const TheoryParams& params, std::size_t k) {
  TheoryParams at_k = params;
  at_k.k = k;
  const double c = thm1_lower_bound(at_k);
  if (!(c > 0.0)) {
    throw std::domain_error("adapted_alpha: C(params, k) must be positive");
  }
  return std::sqrt(params.big_k / (params.gamma_const * c));
}

}  // namespace silo
