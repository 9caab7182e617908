#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace otdiff {

struct GmmComponent {
  double weight = 0.0;
  std::vector<double> mean;
  double stddev = 1.0;  // isotropic
};

/// Isotropic Gaussian mixture. Adding isotropic noise of variance v widens
/// every component to s_k^2 + v, so noised densities, responsibilities and
/// scores stay in closed form.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GmmComponent> components);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return components_.size(); }
  const GmmComponent& component(std::size_t k) const { return components_[k]; }

  /// log q_v(x) where q_v is the mixture convolved with N(0, v I).
  double log_density(std::span<const double> x, double noise_var) const;

  /// Posterior component responsibilities under q_v; log-sum-exp stabilized,
  /// sums to 1 within 1e-12.
  void responsibilities(std::span<const double> x, double noise_var,
                        std::span<double> out) const;

  /// Score of q_v: sum_k r_k(x) (mu_k - x) / (s_k^2 + v).
  void score(std::span<const double> x, double noise_var, std::span<double> out) const;

  /// Mixture of the affinely mapped variable c * X: means and stddevs scale by c.
  GaussianMixture scaled(double c) const;

  /// Mixture mean (weighted component means).
  std::vector<double> mean() const;

  /// n draws, row-major.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

 private:
  // Writes unnormalized log responsibilities to out, returns their log-sum.
  double log_weights(std::span<const double> x, double noise_var, std::span<double> out) const;

  std::vector<GmmComponent> components_;
  std::size_t dim_ = 0;
};

/// Free-function form of the mixture score.
std::vector<double> gmm_score(const GaussianMixture& gm, std::span<const double> x,
                              double noise_var);

}  // namespace otdiff
