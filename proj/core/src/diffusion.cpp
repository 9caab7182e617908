#include "otdiff/diffusion.hpp"

#include "otdiff/common.hpp"
#include "otdiff/rng.hpp"

namespace otdiff {

void Trajectory::append(std::int64_t step, std::span<const double> state) {
  if (state.size() != dim_) throw InputError("Trajectory: state dimension mismatch");
  if (steps_.size() == 1) {
    // The second record fixes the direction; it only has to differ.
    if (step == steps_.back()) throw InputError("Trajectory: steps must be strictly monotone");
  } else if (steps_.size() >= 2) {
    const bool increasing = steps_[1] > steps_[0];
    if (increasing ? step <= steps_.back() : step >= steps_.back()) {
      throw InputError("Trajectory: steps must be strictly monotone");
    }
  }
  steps_.push_back(step);
  states_.insert(states_.end(), state.begin(), state.end());
}

void Trajectory::write_csv(std::ostream& out) const {
  out << "t";
  for (std::size_t k = 0; k < dim_; ++k) out << ",x" << k;
  out << "\n";
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    out << steps_[i];
    for (double v : state(i)) out << "," << format_double(v);
    out << "\n";
  }
}

void forward_step(std::span<const double> x, std::size_t t, const DiffusionSchedule& sched,
                  std::span<const double> z, std::span<double> out) {
  if (t >= sched.steps()) throw InputError("forward_step: step index out of range");
  if (x.size() != z.size() || x.size() != out.size()) {
    throw InputError("forward_step: dimension mismatch");
  }
  const double a = sched.drift_scale(t + 1);
  const double s = sched.sigma(t + 1);
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = x[k] + a * x[k] + s * z[k];
  }
}

std::vector<double> diffuse_to(std::span<const double> x0, std::size_t m,
                               const DiffusionSchedule& sched, std::uint64_t seed) {
  if (m < 1 || m > sched.steps()) throw InputError("diffuse_to: m out of range");
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> z(x0.size());
  Rng rng(seed);
  for (std::size_t t = 0; t < m; ++t) {
    rng.fill_normal(z);
    forward_step(x, t, sched, z, x);
  }
  return x;
}

void reverse_step(std::span<const double> x, std::size_t t, const DiffusionSchedule& sched,
                  std::span<const double> score, std::span<const double> z, std::span<double> out,
                  ReverseVariant variant) {
  if (t < 1 || t > sched.steps()) throw InputError("reverse_step: step index out of range");
  if (x.size() != score.size() || x.size() != z.size() || x.size() != out.size()) {
    throw InputError("reverse_step: dimension mismatch");
  }
  const double s = sched.sigma(t);
  const double s2 = s * s;
  if (variant == ReverseVariant::Langevin) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      out[k] = x[k] + s2 * score[k] + s * z[k];
    }
    return;
  }
  const double a = sched.drift_scale(t);
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = x[k] - (a * x[k] - s2 * score[k]) + s * z[k];
  }
}

}  // namespace otdiff
