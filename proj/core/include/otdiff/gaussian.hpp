#pragma once

#include <cmath>

namespace otdiff {

/// Standard normal CDF via erfc, accurate over the full double range.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

inline double normal_pdf(double x) { return 0.39894228040143267794 * std::exp(-0.5 * x * x); }

/// Inverse standard normal CDF. Acklam's rational approximation refined with
/// one Halley step against erfc; absolute error below 1e-14 on (0, 1).
double normal_quantile(double p);

}  // namespace otdiff
