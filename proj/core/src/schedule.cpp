#include "otdiff/schedule.hpp"

#include <cmath>

#include "otdiff/common.hpp"
#include "otdiff/digest.hpp"

namespace otdiff {

DiffusionSchedule::DiffusionSchedule(ScheduleKind kind, std::vector<double> sigma,
                                     std::vector<double> beta)
    : kind_(kind), steps_(sigma.size() - 1), sigma_(std::move(sigma)), beta_(std::move(beta)) {
  if (steps_ < 2) throw InputError("DiffusionSchedule: need at least 2 steps");
  for (std::size_t t = 1; t <= steps_; ++t) {
    if (!(sigma_[t] > 0.0) || !std::isfinite(sigma_[t])) {
      throw InputError("DiffusionSchedule: sigma_t must be positive for t >= 1");
    }
  }
  if (kind_ == ScheduleKind::VariancePreserving) {
    for (std::size_t t = 1; t <= steps_; ++t) {
      if (!(beta_[t] > 0.0 && beta_[t] < 1.0)) {
        throw InputError("DiffusionSchedule: beta_t must lie in (0,1)");
      }
    }
  }

  // Marginal statistics of the discrete chain:
  //   x_t = (1 + a_t) x_{t-1} + sigma_t z_t,  a_t = drift scale.
  mean_scale_.assign(steps_ + 1, 1.0);
  marginal_var_.assign(steps_ + 1, 0.0);
  for (std::size_t t = 1; t <= steps_; ++t) {
    const double contraction =
        kind_ == ScheduleKind::VariancePreserving ? 1.0 - 0.5 * beta_[t] : 1.0;
    mean_scale_[t] = mean_scale_[t - 1] * contraction;
    marginal_var_[t] = marginal_var_[t - 1] * contraction * contraction + sigma_[t] * sigma_[t];
  }
}

DiffusionSchedule DiffusionSchedule::variance_exploding(std::size_t steps, double sigma_min,
                                                        double sigma_max) {
  if (steps < 2) throw InputError("variance_exploding: need at least 2 steps");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) {
    throw InputError("variance_exploding: need 0 < sigma_min < sigma_max");
  }
  std::vector<double> sigma(steps + 1, 0.0);
  const double ratio = std::pow(sigma_max / sigma_min, 1.0 / static_cast<double>(steps - 1));
  for (std::size_t t = 1; t <= steps; ++t) {
    sigma[t] = sigma_min * std::pow(ratio, static_cast<double>(t - 1));
  }
  return DiffusionSchedule(ScheduleKind::VarianceExploding, std::move(sigma), {});
}

DiffusionSchedule DiffusionSchedule::variance_preserving(std::size_t steps, double beta_min,
                                                         double beta_max) {
  if (steps < 2) throw InputError("variance_preserving: need at least 2 steps");
  if (!(beta_min > 0.0) || !(beta_max > beta_min) || !(beta_max < 1.0)) {
    throw InputError("variance_preserving: need 0 < beta_min < beta_max < 1");
  }
  std::vector<double> beta(steps + 1, 0.0);
  std::vector<double> sigma(steps + 1, 0.0);
  for (std::size_t t = 1; t <= steps; ++t) {
    beta[t] = beta_min + (beta_max - beta_min) * static_cast<double>(t - 1) /
                             static_cast<double>(steps - 1);
    sigma[t] = std::sqrt(beta[t]);
  }
  return DiffusionSchedule(ScheduleKind::VariancePreserving, std::move(sigma), std::move(beta));
}

DiffusionSchedule DiffusionSchedule::custom_sigmas(std::vector<double> sigmas) {
  std::vector<double> sigma(sigmas.size() + 1, 0.0);
  for (std::size_t t = 0; t < sigmas.size(); ++t) sigma[t + 1] = sigmas[t];
  return DiffusionSchedule(ScheduleKind::VarianceExploding, std::move(sigma), {});
}

DiffusionSchedule DiffusionSchedule::custom_betas(std::vector<double> betas) {
  std::vector<double> beta(betas.size() + 1, 0.0);
  std::vector<double> sigma(betas.size() + 1, 0.0);
  for (std::size_t t = 0; t < betas.size(); ++t) {
    beta[t + 1] = betas[t];
    sigma[t + 1] = std::sqrt(betas[t]);
  }
  return DiffusionSchedule(ScheduleKind::VariancePreserving, std::move(sigma), std::move(beta));
}

void DiffusionSchedule::check_step(std::size_t t, bool allow_zero) const {
  if (t > steps_ || (t == 0 && !allow_zero)) {
    throw InputError("DiffusionSchedule: step index out of range");
  }
}

double DiffusionSchedule::sigma(std::size_t t) const {
  check_step(t, false);
  return sigma_[t];
}

double DiffusionSchedule::drift_scale(std::size_t t) const {
  check_step(t, false);
  return kind_ == ScheduleKind::VariancePreserving ? -0.5 * beta_[t] : 0.0;
}

double DiffusionSchedule::beta(std::size_t t) const {
  check_step(t, false);
  if (kind_ != ScheduleKind::VariancePreserving) {
    throw InputError("DiffusionSchedule: beta undefined for this schedule");
  }
  return beta_[t];
}

double DiffusionSchedule::marginal_variance(std::size_t t) const {
  check_step(t, true);
  return marginal_var_[t];
}

double DiffusionSchedule::mean_scale(std::size_t t) const {
  check_step(t, true);
  return mean_scale_[t];
}

std::uint64_t DiffusionSchedule::digest() const {
  Fnv1a64 h;
  h.update_u32(kind_ == ScheduleKind::VarianceExploding ? 0u : 1u);
  h.update_u64(steps_);
  h.update_doubles(sigma_);
  h.update_doubles(beta_);
  return h.value();
}

}  // namespace otdiff
