#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fusetrack/error.hpp"

namespace fusetrack {

// Interleaved multi-channel raster, row-major. Intensities are on the 0..255 scale.
template <typename T>
struct ImageT {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<T> data;

  ImageT() = default;
  ImageT(int h, int w, int c, T fill = T{})
      : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, fill) {}

  bool empty() const noexcept { return data.empty(); }

  T& at(int row, int col, int ch = 0) { return data[(static_cast<std::size_t>(row) * width + col) * channels + ch]; }
  const T& at(int row, int col, int ch = 0) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }

  // Border-replicating access.
  const T& clamped(int row, int col, int ch = 0) const {
    return at(std::clamp(row, 0, height - 1), std::clamp(col, 0, width - 1), ch);
  }

  friend bool operator==(const ImageT&, const ImageT&) = default;
};

using Image = ImageT<double>;
using Image8 = ImageT<std::uint8_t>;

inline Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) fail(ErrorKind::invalid_argument, "expected 1 or 3 channels");
  Image out(img.height, img.width, 1);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      out.at(r, c) = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
    }
  }
  return out;
}

// Bilinear sample at a continuous pixel-index position (pixel centers at integers), replicated border.
inline double sample_bilinear(const Image& img, double row, double col, int ch) {
  const double r0f = std::floor(row);
  const double c0f = std::floor(col);
  const int r0 = static_cast<int>(r0f);
  const int c0 = static_cast<int>(c0f);
  const double fr = row - r0f;
  const double fc = col - c0f;
  const double top = (1.0 - fc) * img.clamped(r0, c0, ch) + fc * img.clamped(r0, c0 + 1, ch);
  if (fr == 0.0) return top;
  const double bottom = (1.0 - fc) * img.clamped(r0 + 1, c0, ch) + fc * img.clamped(r0 + 1, c0 + 1, ch);
  return (1.0 - fr) * top + fr * bottom;
}

inline Image to_double(const Image8& img) {
  Image out(img.height, img.width, img.channels);
  std::copy(img.data.begin(), img.data.end(), out.data.begin());
  return out;
}

inline Image8 to_uint8(const Image& img) {
  Image8 out(img.height, img.width, img.channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(img.data[i]), 0L, 255L));
  }
  return out;
}

}  // namespace fusetrack
