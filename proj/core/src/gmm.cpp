#include "otdiff/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "otdiff/common.hpp"
#include "otdiff/rng.hpp"

namespace otdiff {

GaussianMixture::GaussianMixture(std::vector<GmmComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InputError("GaussianMixture: needs at least one component");
  dim_ = components_.front().mean.size();
  if (dim_ == 0) throw InputError("GaussianMixture: zero-dimensional mean");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_) throw InputError("GaussianMixture: inconsistent mean dimensions");
    if (!all_finite(c.mean)) throw InputError("GaussianMixture: non-finite mean");
    if (!(c.weight > 0.0)) throw InputError("GaussianMixture: weights must be positive");
    if (!(c.stddev > 0.0) || !std::isfinite(c.stddev)) {
      throw InputError("GaussianMixture: stddev must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("GaussianMixture: weights must sum to 1");
}

double GaussianMixture::log_weights(std::span<const double> x, double noise_var,
                                    std::span<double> out) const {
  if (x.size() != dim_) throw InputError("GaussianMixture: dimension mismatch");
  if (!all_finite(x)) throw InputError("GaussianMixture: non-finite input");
  if (!(noise_var >= 0.0)) throw InputError("GaussianMixture: negative noise variance");

  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const double var = c.stddev * c.stddev + noise_var;
    const double q = squared_distance(x, c.mean);
    out[k] = std::log(c.weight) - 0.5 * q / var -
             static_cast<double>(dim_) * (half_log_2pi + 0.5 * std::log(var));
    max_lw = std::max(max_lw, out[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) sum += std::exp(out[k] - max_lw);
  return max_lw + std::log(sum);
}

double GaussianMixture::log_density(std::span<const double> x, double noise_var) const {
  std::vector<double> lw(components_.size());
  return log_weights(x, noise_var, lw);
}

void GaussianMixture::responsibilities(std::span<const double> x, double noise_var,
                                       std::span<double> out) const {
  if (out.size() != components_.size()) {
    throw InputError("GaussianMixture: responsibilities output size mismatch");
  }
  const double lse = log_weights(x, noise_var, out);
  for (double& v : out) v = std::exp(v - lse);
}

void GaussianMixture::score(std::span<const double> x, double noise_var,
                            std::span<double> out) const {
  if (out.size() != dim_) throw InputError("GaussianMixture: score output size mismatch");
  std::vector<double> r(components_.size());
  responsibilities(x, noise_var, r);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const double inv_var = 1.0 / (c.stddev * c.stddev + noise_var);
    const double w = r[k] * inv_var;
    for (std::size_t j = 0; j < dim_; ++j) out[j] += w * (c.mean[j] - x[j]);
  }
}

GaussianMixture GaussianMixture::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("GaussianMixture: bad scale factor");
  std::vector<GmmComponent> comps = components_;
  for (auto& comp : comps) {
    for (double& m : comp.mean) m *= c;
    comp.stddev *= c;
  }
  return GaussianMixture(std::move(comps));
}

std::vector<double> GaussianMixture::mean() const {
  std::vector<double> m(dim_, 0.0);
  for (const auto& c : components_) {
    for (std::size_t j = 0; j < dim_; ++j) m[j] += c.weight * c.mean[j];
  }
  return m;
}

std::vector<double> GaussianMixture::sample(std::size_t n, std::uint64_t seed) const {
  std::vector<double> cumulative(components_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    acc += components_[k].weight;
    cumulative[k] = acc;
  }
  cumulative.back() = 1.0;

  std::vector<double> out(n * dim_);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
    const auto& c = components_[k];
    for (std::size_t j = 0; j < dim_; ++j) {
      out[i * dim_ + j] = c.mean[j] + c.stddev * rng.normal();
    }
  }
  return out;
}

std::vector<double> gmm_score(const GaussianMixture& gm, std::span<const double> x,
                              double noise_var) {
  std::vector<double> out(gm.dim());
  gm.score(x, noise_var, out);
  return out;
}

}  // namespace otdiff
