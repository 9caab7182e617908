#include "otdiff/score_provider.hpp"

#include <algorithm>
#include <cmath>

#include "otdiff/binary_io.hpp"
#include "otdiff/common.hpp"

namespace otdiff {

double noise_var_at(const DiffusionSchedule& sched, std::size_t t) {
  return sched.marginal_variance(t);
}

double mean_scale_at(const DiffusionSchedule& sched, std::size_t t) {
  return sched.mean_scale(t);
}

GmmScoreOracle::GmmScoreOracle(GaussianMixture data, const DiffusionSchedule& sched)
    : data_(std::move(data)) {
  const std::size_t t_max = sched.steps();
  scaled_.reserve(t_max + 1);
  noise_var_.reserve(t_max + 1);
  for (std::size_t t = 0; t <= t_max; ++t) {
    scaled_.push_back(data_.scaled(sched.mean_scale(t)));
    noise_var_.push_back(sched.marginal_variance(t));
  }
}

void GmmScoreOracle::score(std::span<const double> x, std::size_t t,
                           std::span<double> out) const {
  if (t >= scaled_.size()) throw InputError("GmmScoreOracle: step out of range");
  scaled_[t].score(x, noise_var_[t], out);
}

const GaussianMixture& GmmScoreOracle::marginal_mixture(std::size_t t) const {
  if (t >= scaled_.size()) throw InputError("GmmScoreOracle: step out of range");
  return scaled_[t];
}

double GmmScoreOracle::marginal_noise_var(std::size_t t) const {
  if (t >= noise_var_.size()) throw InputError("GmmScoreOracle: step out of range");
  return noise_var_[t];
}

TabulatedScore::TabulatedScore(std::vector<Axis> axes, std::vector<std::uint32_t> step_values,
                               std::vector<double> values)
    : axes_(std::move(axes)), step_values_(std::move(step_values)), values_(std::move(values)) {
  if (axes_.empty()) throw InputError("TabulatedScore: needs at least one axis");
  if (step_values_.empty()) throw InputError("TabulatedScore: needs at least one step slice");
  for (const Axis& a : axes_) {
    if (a.nodes < 2 || !(a.hi > a.lo)) throw InputError("TabulatedScore: bad axis");
  }
  const std::size_t expected = step_values_.size() * node_count() * axes_.size();
  if (values_.size() != expected) throw InputError("TabulatedScore: values size mismatch");
  if (!all_finite(values_)) throw InputError("TabulatedScore: non-finite grid value");
}

std::size_t TabulatedScore::node_count() const {
  std::size_t n = 1;
  for (const Axis& a : axes_) n *= a.nodes;
  return n;
}

std::size_t TabulatedScore::max_step() const {
  return *std::max_element(step_values_.begin(), step_values_.end());
}

TabulatedScore TabulatedScore::tabulate(const ScoreProvider& src, std::vector<Axis> axes,
                                        std::vector<std::uint32_t> step_values) {
  if (src.dim() != axes.size()) throw InputError("tabulate: axis/provider dimension mismatch");
  const std::size_t d = axes.size();
  std::size_t nodes = 1;
  for (const Axis& a : axes) {
    if (a.nodes < 2 || !(a.hi > a.lo)) throw InputError("tabulate: bad axis");
    nodes *= a.nodes;
  }

  std::vector<double> values(step_values.size() * nodes * d, 0.0);
  std::vector<double> x(d);
  std::vector<double> s(d);
  for (std::size_t si = 0; si < step_values.size(); ++si) {
    for (std::size_t node = 0; node < nodes; ++node) {
      std::size_t rem = node;
      for (std::size_t k = d; k-- > 0;) {
        const Axis& a = axes[k];
        const std::size_t idx = rem % a.nodes;
        rem /= a.nodes;
        x[k] = a.lo + (a.hi - a.lo) * static_cast<double>(idx) /
                          static_cast<double>(a.nodes - 1);
      }
      src.score(x, step_values[si], s);
      std::copy(s.begin(), s.end(), values.begin() + static_cast<std::ptrdiff_t>((si * nodes + node) * d));
    }
  }
  return TabulatedScore(std::move(axes), std::move(step_values), std::move(values));
}

void TabulatedScore::interpolate(std::span<const double> x, const double* slice,
                                 std::span<double> out) const {
  const std::size_t d = axes_.size();
  // Cell index and fraction per axis; queries clamp to the grid boundary.
  std::vector<std::size_t> i0(d);
  std::vector<double> frac(d);
  for (std::size_t k = 0; k < d; ++k) {
    const Axis& a = axes_[k];
    const double u = (x[k] - a.lo) / (a.hi - a.lo) * static_cast<double>(a.nodes - 1);
    const double uc = std::clamp(u, 0.0, static_cast<double>(a.nodes - 1));
    std::size_t i = static_cast<std::size_t>(uc);
    if (i > a.nodes - 2) i = a.nodes - 2;
    i0[k] = i;
    frac[k] = std::clamp(uc - static_cast<double>(i), 0.0, 1.0);
  }

  std::vector<std::size_t> stride(d, 1);
  for (std::size_t k = d - 1; k-- > 0;) stride[k] = stride[k + 1] * axes_[k + 1].nodes;

  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t node = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool hi = (c >> k) & 1u;
      w *= hi ? frac[k] : 1.0 - frac[k];
      node += (i0[k] + (hi ? 1 : 0)) * stride[k];
    }
    if (w == 0.0) continue;
    const double* v = slice + node * d;
    for (std::size_t j = 0; j < d; ++j) out[j] += w * v[j];
  }
}

void TabulatedScore::score(std::span<const double> x, std::size_t t,
                           std::span<double> out) const {
  if (x.size() != axes_.size() || out.size() != axes_.size()) {
    throw InputError("TabulatedScore: dimension mismatch");
  }
  if (!all_finite(x)) throw InputError("TabulatedScore: non-finite input");
  const auto it = std::find(step_values_.begin(), step_values_.end(),
                            static_cast<std::uint32_t>(t));
  if (it == step_values_.end()) throw InputError("TabulatedScore: no slice for this step");
  const std::size_t si = static_cast<std::size_t>(it - step_values_.begin());
  interpolate(x, values_.data() + si * node_count() * axes_.size(), out);
}

void TabulatedScore::save(const std::filesystem::path& path) const {
  BinaryWriter w(path);
  w.write_magic("SGRD");
  w.write_u32(1);
  w.write_u32(static_cast<std::uint32_t>(axes_.size()));
  w.write_u32(static_cast<std::uint32_t>(step_values_.size()));
  for (const Axis& a : axes_) {
    w.write_u64(a.nodes);
    w.write_f64(a.lo);
    w.write_f64(a.hi);
  }
  for (std::uint32_t t : step_values_) w.write_u32(t);
  w.write_f64s(values_);
  w.close();
}

TabulatedScore TabulatedScore::load(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("SGRD");
  const std::uint32_t version = r.read_u32();
  if (version != 1) throw ConfigError("TabulatedScore: unsupported version");
  const std::uint32_t d = r.read_u32();
  const std::uint32_t n_t = r.read_u32();
  std::vector<Axis> axes(d);
  std::size_t nodes = 1;
  for (auto& a : axes) {
    a.nodes = r.read_u64();
    a.lo = r.read_f64();
    a.hi = r.read_f64();
    nodes *= a.nodes;
  }
  std::vector<std::uint32_t> steps(n_t);
  for (auto& t : steps) t = r.read_u32();
  std::vector<double> values = r.read_f64s(static_cast<std::size_t>(n_t) * nodes * d);
  return TabulatedScore(std::move(axes), std::move(steps), std::move(values));
}

}  // namespace otdiff
