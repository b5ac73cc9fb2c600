#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fusetrack/grid.hpp"

namespace fusetrack {

// d channels of an M x N cell grid. Cell (0,0) is centered `origin_offset`
// patch pixels from the patch origin; adjacent cells are `stride` pixels apart.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  int stride = 1;
  double origin_offset = 0.0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int d, int rows, int cols, int cell_stride)
      : channels(d),
        height(rows),
        width(cols),
        stride(cell_stride),
        origin_offset(0.5 * (cell_stride - 1)),
        values(static_cast<std::size_t>(d) * rows * cols, 0.0) {
    if (d < 1 || rows < 1 || cols < 1 || cell_stride < 1) {
      fail(ErrorKind::invalid_argument, "feature map dimensions and stride must be positive");
    }
  }

  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }

  double& at(int l, int m, int n) { return values[l * plane_size() + static_cast<std::size_t>(m) * width + n]; }
  double at(int l, int m, int n) const { return values[l * plane_size() + static_cast<std::size_t>(m) * width + n]; }

  std::span<double> channel(int l) { return {values.data() + l * plane_size(), plane_size()}; }
  std::span<const double> channel(int l) const { return {values.data() + l * plane_size(), plane_size()}; }

  RealGrid channel_grid(int l) const {
    auto c = channel(l);
    return RealGrid(height, width, std::vector<double>(c.begin(), c.end()));
  }

  bool all_finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

}  // namespace fusetrack
