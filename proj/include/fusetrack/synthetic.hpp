#pragma once

// Procedurally rendered test sequences with exact ground truth: a square target
// textured with value noise over a smooth value-noise background.
// Both textures stay well above the pixel scale (several pixels per noise node)
// so bilinear patch resampling sees them without phase-dependent aliasing.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fusetrack/image.hpp"
#include "fusetrack/metrics.hpp"

namespace fusetrack {

enum class SyntheticKind { translate, zoom };

struct SyntheticParams {
  int frame_width = 480;
  int frame_height = 360;
  Rect first_box{60.0, 50.0, 40.0, 40.0};
  Point velocity{5.0, 3.0};  // translate: pixels per frame
  double zoom_factor = 1.02;  // zoom: size ratio between consecutive frames
  int texture_cells = 8;      // target texture: value noise with this many nodes per side

  static SyntheticParams defaults(SyntheticKind kind) {
    SyntheticParams p;
    if (kind == SyntheticKind::zoom) {
      p.frame_width = 400;
      p.frame_height = 400;
      p.first_box = {184.0, 184.0, 32.0, 32.0};
    }
    return p;
  }
};

struct SyntheticSequence {
  std::vector<Image8> frames;
  std::vector<Rect> ground_truth;
};

namespace detail {

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

class ValueNoise {
 public:
  ValueNoise(std::mt19937_64& rng, int width, int height, double spacing, double lo, double hi)
      : spacing_(spacing), cols_(static_cast<int>(width / spacing) + 2), rows_(static_cast<int>(height / spacing) + 2) {
    std::uniform_real_distribution<double> dist(lo, hi);
    nodes_.resize(static_cast<std::size_t>(cols_) * rows_);
    for (auto& n : nodes_) n = {dist(rng), dist(rng), dist(rng)};
  }

  double at(double x, double y, int ch) const {
    const double gx = std::clamp(x / spacing_, 0.0, cols_ - 1.001);
    const double gy = std::clamp(y / spacing_, 0.0, rows_ - 1.001);
    const int ix = static_cast<int>(gx);
    const int iy = static_cast<int>(gy);
    const double tx = smoothstep(gx - ix);
    const double ty = smoothstep(gy - iy);
    auto node = [&](int r, int c) { return nodes_[static_cast<std::size_t>(r) * cols_ + c][ch]; };
    const double top = (1 - tx) * node(iy, ix) + tx * node(iy, ix + 1);
    const double bottom = (1 - tx) * node(iy + 1, ix) + tx * node(iy + 1, ix + 1);
    return (1 - ty) * top + ty * bottom;
  }

 private:
  double spacing_;
  int cols_;
  int rows_;
  std::vector<std::array<double, 3>> nodes_;
};

}  // namespace detail

inline SyntheticSequence gen_synthetic(SyntheticKind kind, int frames, std::uint64_t seed,
                                       const SyntheticParams& params) {
  if (params.texture_cells < 1) fail(ErrorKind::invalid_argument, "texture_cells must be positive");
  if (frames < 2) fail(ErrorKind::invalid_argument, "a synthetic sequence needs at least two frames");
  std::mt19937_64 rng(seed);
  const int W = params.frame_width;
  const int H = params.frame_height;
  const detail::ValueNoise backdrop(rng, W, H, 28.0, 70.0, 180.0);
  Image background(H, W, 3);
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      for (int ch = 0; ch < 3; ++ch) background.at(r, c, ch) = backdrop.at(c + 0.5, r + 0.5, ch);
    }
  }
  // Target texture lives in box-relative coordinates so it scales with the box.
  const int T = params.texture_cells;
  const detail::ValueNoise texture(rng, T, T, 1.0, 10.0, 245.0);
  SyntheticSequence seq;
  constexpr int kSub = 4;
  for (int k = 0; k < frames; ++k) {
    Rect box = params.first_box;
    if (kind == SyntheticKind::translate) {
      box.x += k * params.velocity.x;
      box.y += k * params.velocity.y;
    } else {
      const double s = std::pow(params.zoom_factor, k);
      const double cx = box.x + 0.5 * box.w;
      const double cy = box.y + 0.5 * box.h;
      box.w *= s;
      box.h *= s;
      box.x = cx - 0.5 * box.w;
      box.y = cy - 0.5 * box.h;
    }
    Image img = background;
    const int r0 = std::max(0, static_cast<int>(std::floor(box.y)));
    const int r1 = std::min(H - 1, static_cast<int>(std::ceil(box.y + box.h)));
    const int c0 = std::max(0, static_cast<int>(std::floor(box.x)));
    const int c1 = std::min(W - 1, static_cast<int>(std::ceil(box.x + box.w)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        std::array<double, 3> acc{};
        for (int sy = 0; sy < kSub; ++sy) {
          for (int sx = 0; sx < kSub; ++sx) {
            const double px = c + (sx + 0.5) / kSub;
            const double py = r + (sy + 0.5) / kSub;
            const double u = (px - box.x) / box.w;
            const double v = (py - box.y) / box.h;
            if (u >= 0.0 && u < 1.0 && v >= 0.0 && v < 1.0) {
              for (int ch = 0; ch < 3; ++ch) acc[ch] += texture.at(u * T, v * T, ch);
            } else {
              for (int ch = 0; ch < 3; ++ch) acc[ch] += background.at(r, c, ch);
            }
          }
        }
        for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = acc[ch] / (kSub * kSub);
      }
    }
    seq.frames.push_back(to_uint8(img));
    seq.ground_truth.push_back(box);
  }
  return seq;
}

inline SyntheticSequence gen_synthetic(SyntheticKind kind, int frames, std::uint64_t seed) {
  return gen_synthetic(kind, frames, seed, SyntheticParams::defaults(kind));
}

}  // namespace fusetrack
