#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fusetrack/error.hpp"

namespace fusetrack {

using Complex = std::complex<double>;

// Dense row-major 2-D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width), values_(checked_size(height, width), fill) {}
  Grid(int height, int width, std::vector<T> values) : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != checked_size(height, width)) {
      fail(ErrorKind::dimension_mismatch, "grid payload does not match its dimensions");
    }
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  const T& operator()(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  bool same_shape(const Grid& other) const noexcept { return height_ == other.height_ && width_ == other.width_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int height, int width) {
    if (height < 1 || width < 1) fail(ErrorKind::invalid_argument, "grid dimensions must be positive");
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> values_;
};

using RealGrid = Grid<double>;
using Spectrum = Grid<Complex>;

// Non-negative remainder; frequency and circular-shift arithmetic all go through this.
constexpr int wrap_index(int i, int n) noexcept {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace fusetrack
