#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace otdiff {

/// Minimal static scatter/line plot writer. Output is deterministic text so
/// artifact trees can be compared byte for byte.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_points(std::span<const double> xs, std::span<const double> ys,
                  const std::string& color, double radius = 1.5);
  void add_polyline(std::span<const double> xs, std::span<const double> ys,
                    const std::string& color);

  void save(const std::filesystem::path& path) const;

  /// Color palette used for class-colored scatters.
  static const std::string& palette(std::size_t k);

 private:
  struct Series {
    std::vector<double> xs, ys;
    std::string color;
    double radius = 0.0;  // 0 means polyline
  };

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace otdiff
