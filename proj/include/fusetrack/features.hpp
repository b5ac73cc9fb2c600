#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "fusetrack/feature_map.hpp"
#include "fusetrack/image.hpp"
#include "fusetrack/metrics.hpp"

namespace fusetrack {

// Square crop of side `region_side` centered at `center`, bilinearly resampled to
// canonical_side x canonical_side. Out-of-frame pixels replicate the border.
inline Image sample_patch(const Image& frame, Point center, double region_side, int canonical_side) {
  if (frame.empty()) fail(ErrorKind::empty_frame, "cannot sample from an empty frame");
  if (!(region_side > 0.0) || canonical_side <= 0) fail(ErrorKind::invalid_argument, "patch sides must be positive");
  Image patch(canonical_side, canonical_side, frame.channels);
  const double step = region_side / canonical_side;
  const double top = center.y - 0.5 * region_side;
  const double left = center.x - 0.5 * region_side;
  std::vector<double> cols(canonical_side);
  for (int j = 0; j < canonical_side; ++j) cols[j] = left + (j + 0.5) * step - 0.5;
  for (int i = 0; i < canonical_side; ++i) {
    const double row = top + (i + 0.5) * step - 0.5;
    for (int j = 0; j < canonical_side; ++j) {
      for (int ch = 0; ch < frame.channels; ++ch) patch.at(i, j, ch) = sample_bilinear(frame, row, cols[j], ch);
    }
  }
  return patch;
}

namespace detail {

inline void require_divisible(const Image& patch, int cell) {
  if (cell < 1) fail(ErrorKind::invalid_argument, "cell size must be positive");
  if (patch.empty()) fail(ErrorKind::empty_frame, "empty patch");
  if (patch.height % cell != 0 || patch.width % cell != 0) {
    fail(ErrorKind::divisibility, "patch side " + std::to_string(patch.height) + "x" + std::to_string(patch.width) +
                                      " is not divisible by cell " + std::to_string(cell));
  }
}

}  // namespace detail

inline constexpr int kHogChannels = 31;

// Felzenszwalb-style HOG: 18 contrast-sensitive and 9 insensitive orientation
// channels, each normalized by the four 2x2 cell blocks that contain the cell
// and clipped at 0.2, followed by 4 gradient-energy (texture) channels.
// The output keeps one cell per `cell` pixels; blocks at the border reuse
// the clamped neighbor cells.
inline FeatureMap extract_hog(const Image& patch, int cell = 4) {
  detail::require_divisible(patch, cell);
  constexpr int kOrient = 9;
  constexpr double kEps = 1e-4;
  constexpr double kClip = 0.2;
  constexpr double kTextureGain = 0.2357;
  std::array<double, kOrient> uu{};
  std::array<double, kOrient> vv{};
  for (int o = 0; o < kOrient; ++o) {
    uu[o] = std::cos(o * std::numbers::pi / kOrient);
    vv[o] = std::sin(o * std::numbers::pi / kOrient);
  }

  const int H = patch.height;
  const int W = patch.width;
  const int rows = H / cell;
  const int cols = W / cell;
  std::vector<double> hist(static_cast<std::size_t>(rows) * cols * 2 * kOrient, 0.0);
  auto bin = [&](int r, int c, int o) -> double& { return hist[(static_cast<std::size_t>(r) * cols + c) * 2 * kOrient + o]; };

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double dx = 0.0;
      double dy = 0.0;
      double mag2 = -1.0;
      for (int ch = 0; ch < patch.channels; ++ch) {
        const double gx = patch.clamped(y, x + 1, ch) - patch.clamped(y, x - 1, ch);
        const double gy = patch.clamped(y + 1, x, ch) - patch.clamped(y - 1, x, ch);
        const double m2 = gx * gx + gy * gy;
        if (m2 > mag2) {
          mag2 = m2;
          dx = gx;
          dy = gy;
        }
      }
      if (mag2 <= 0.0) continue;

      double best = 0.0;
      int best_o = 0;
      for (int o = 0; o < kOrient; ++o) {
        const double dot = uu[o] * dx + vv[o] * dy;
        if (dot > best) {
          best = dot;
          best_o = o;
        } else if (-dot > best) {
          best = -dot;
          best_o = o + kOrient;
        }
      }
      const double mag = std::sqrt(mag2);

      const double xp = (x + 0.5) / cell - 0.5;
      const double yp = (y + 0.5) / cell - 0.5;
      const int ixp = static_cast<int>(std::floor(xp));
      const int iyp = static_cast<int>(std::floor(yp));
      const double vx0 = xp - ixp;
      const double vy0 = yp - iyp;
      const double vx1 = 1.0 - vx0;
      const double vy1 = 1.0 - vy0;
      const bool x0_ok = ixp >= 0;
      const bool y0_ok = iyp >= 0;
      const bool x1_ok = ixp + 1 < cols;
      const bool y1_ok = iyp + 1 < rows;
      if (y0_ok && x0_ok) bin(iyp, ixp, best_o) += vy1 * vx1 * mag;
      if (y0_ok && x1_ok) bin(iyp, ixp + 1, best_o) += vy1 * vx0 * mag;
      if (y1_ok && x0_ok) bin(iyp + 1, ixp, best_o) += vy0 * vx1 * mag;
      if (y1_ok && x1_ok) bin(iyp + 1, ixp + 1, best_o) += vy0 * vx0 * mag;
    }
  }

  std::vector<double> energy(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double e = 0.0;
      for (int o = 0; o < kOrient; ++o) {
        const double s = bin(r, c, o) + bin(r, c, o + kOrient);
        e += s * s;
      }
      energy[static_cast<std::size_t>(r) * cols + c] = e;
    }
  }
  auto energy_at = [&](int r, int c) {
    return energy[static_cast<std::size_t>(std::clamp(r, 0, rows - 1)) * cols + std::clamp(c, 0, cols - 1)];
  };

  FeatureMap out(kHogChannels, rows, cols, cell);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::array<double, 4> norm{};
      int k = 0;
      for (int br = -1; br <= 0; ++br) {
        for (int bc = -1; bc <= 0; ++bc) {
          const double block = energy_at(r + br, c + bc) + energy_at(r + br, c + bc + 1) +
                               energy_at(r + br + 1, c + bc) + energy_at(r + br + 1, c + bc + 1);
          norm[k++] = 1.0 / std::sqrt(block + kEps);
        }
      }
      std::array<double, 4> texture{};
      for (int o = 0; o < 2 * kOrient; ++o) {
        const double h = bin(r, c, o);
        double sum = 0.0;
        for (int b = 0; b < 4; ++b) {
          const double v = std::min(h * norm[b], kClip);
          sum += v;
          texture[b] += v;
        }
        out.at(o, r, c) = 0.5 * sum;
      }
      for (int o = 0; o < kOrient; ++o) {
        const double h = bin(r, c, o) + bin(r, c, o + kOrient);
        double sum = 0.0;
        for (int b = 0; b < 4; ++b) sum += std::min(h * norm[b], kClip);
        out.at(2 * kOrient + o, r, c) = 0.5 * sum;
      }
      for (int b = 0; b < 4; ++b) out.at(3 * kOrient + b, r, c) = kTextureGain * texture[b];
    }
  }
  return out;
}

// Color Names lookup: 32768 rows (5-bit R,G,B, index r + 32 g + 1024 b) x 11 probabilities.
class CNTable {
 public:
  static constexpr int kRows = 32768;
  static constexpr int kNames = 11;
  static constexpr std::size_t kFileBytes = static_cast<std::size_t>(kRows) * kNames * sizeof(float);

  CNTable() = default;
  explicit CNTable(std::vector<float> entries) : entries_(std::move(entries)) {
    if (entries_.size() != static_cast<std::size_t>(kRows) * kNames) {
      fail(ErrorKind::missing_table, "color-name table must hold 32768 x 11 entries");
    }
    for (float v : entries_) {
      if (!(v >= 0.0f && v <= 1.0f)) fail(ErrorKind::missing_table, "color-name entries must lie in [0,1]");
    }
  }

  bool valid() const noexcept { return !entries_.empty(); }

  static int index_of(int r, int g, int b) noexcept { return (r >> 3) + 32 * (g >> 3) + 1024 * (b >> 3); }

  std::span<const float> row(int index) const { return {entries_.data() + static_cast<std::size_t>(index) * kNames, kNames}; }
  std::span<const float> entries() const noexcept { return entries_; }

  static CNTable load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::missing_table, "cannot open color-name table " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != kFileBytes) {
      fail(ErrorKind::missing_table, "color-name table " + path.string() + " has " + std::to_string(bytes.size()) +
                                         " bytes, expected " + std::to_string(kFileBytes));
    }
    std::vector<float> entries(static_cast<std::size_t>(kRows) * kNames);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) bits = (bits << 8) | bytes[4 * i + b];
      entries[i] = std::bit_cast<float>(bits);
    }
    return CNTable(std::move(entries));
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io_error, "cannot write " + path.string());
    for (float v : entries_) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      const char le[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                          static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
      out.write(le, 4);
    }
  }

 private:
  std::vector<float> entries_;
};

inline FeatureMap extract_cn(const Image& patch, const CNTable& table, int cell = 4) {
  if (!table.valid()) fail(ErrorKind::missing_table, "no color-name table loaded");
  detail::require_divisible(patch, cell);
  if (patch.channels != 3) fail(ErrorKind::invalid_argument, "color names need an RGB patch");
  const int rows = patch.height / cell;
  const int cols = patch.width / cell;
  FeatureMap out(CNTable::kNames, rows, cols, cell);
  const double inv_area = 1.0 / (cell * cell);
  auto quantize = [](double v) { return static_cast<int>(std::clamp(std::lround(v), 0L, 255L)); };
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      const int idx = CNTable::index_of(quantize(patch.at(y, x, 0)), quantize(patch.at(y, x, 1)), quantize(patch.at(y, x, 2)));
      const auto probs = table.row(idx);
      for (int l = 0; l < CNTable::kNames; ++l) out.at(l, y / cell, x / cell) += probs[l] * inv_area;
    }
  }
  return out;
}

// Mean-pooled intensity mapped affinely from [0,255] to [-0.5,0.5].
inline FeatureMap extract_gray(const Image& patch, int cell = 4) {
  detail::require_divisible(patch, cell);
  const Image gray = to_gray(patch);
  const int rows = patch.height / cell;
  const int cols = patch.width / cell;
  FeatureMap out(1, rows, cols, cell);
  const double inv_area = 1.0 / (cell * cell);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double sum = 0.0;
      for (int y = r * cell; y < (r + 1) * cell; ++y) {
        for (int x = c * cell; x < (c + 1) * cell; ++x) sum += gray.at(y, x);
      }
      out.at(0, r, c) = sum * inv_area / 255.0 - 0.5;
    }
  }
  return out;
}

// Symmetric Hann window; zero at both ends.
inline std::vector<double> hann(int n) {
  std::vector<double> w(n, 1.0);
  if (n == 1) return w;
  for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
  return w;
}

inline FeatureMap apply_window(FeatureMap x) {
  const auto wr = hann(x.height);
  const auto wc = hann(x.width);
  for (int l = 0; l < x.channels; ++l) {
    for (int m = 0; m < x.height; ++m) {
      for (int n = 0; n < x.width; ++n) x.at(l, m, n) *= wr[m] * wc[n];
    }
  }
  return x;
}

}  // namespace fusetrack
