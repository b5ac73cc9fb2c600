#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "fusetrack/grid.hpp"
#include "fusetrack/image.hpp"

namespace fusetrack {

// Per-pixel displacement (pixels/frame) from the previous frame to the current one.
struct FlowField {
  RealGrid u;
  RealGrid v;

  int height() const noexcept { return u.height(); }
  int width() const noexcept { return u.width(); }
};

using MotionImage = Image8;

inline constexpr double kMotionGain = 16.0;
inline constexpr double kMotionOffset = 128.0;

// Channels: 0 = offset + gain*u, 1 = offset + gain*v, 2 = gain*|(u,v)|, each rounded and clamped to [0,255].
inline MotionImage flow_to_motion_image(const FlowField& flow, double gain = kMotionGain) {
  if (!(gain > 0.0)) fail(ErrorKind::invalid_argument, "motion-image gain must be positive");
  MotionImage out(flow.height(), flow.width(), 3);
  auto encode = [](double value) { return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L)); };
  for (int r = 0; r < flow.height(); ++r) {
    for (int c = 0; c < flow.width(); ++c) {
      const double u = flow.u(r, c);
      const double v = flow.v(r, c);
      out.at(r, c, 0) = encode(kMotionOffset + gain * u);
      out.at(r, c, 1) = encode(kMotionOffset + gain * v);
      out.at(r, c, 2) = encode(gain * std::sqrt(u * u + v * v));
    }
  }
  return out;
}

namespace detail {

struct FlowGradients {
  RealGrid ix, iy, it;
};

inline FlowGradients flow_gradients(const Image& prev, const Image& cur) {
  if (prev.height != cur.height || prev.width != cur.width) {
    fail(ErrorKind::dimension_mismatch, "flow frames differ in size");
  }
  if (prev.empty()) fail(ErrorKind::empty_frame, "flow needs non-empty frames");
  const Image a = to_gray(prev);
  const Image b = to_gray(cur);
  const int H = a.height;
  const int W = a.width;
  FlowGradients g{RealGrid(H, W), RealGrid(H, W), RealGrid(H, W)};
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const double dxa = 0.5 * (a.clamped(r, c + 1) - a.clamped(r, c - 1));
      const double dxb = 0.5 * (b.clamped(r, c + 1) - b.clamped(r, c - 1));
      const double dya = 0.5 * (a.clamped(r + 1, c) - a.clamped(r - 1, c));
      const double dyb = 0.5 * (b.clamped(r + 1, c) - b.clamped(r - 1, c));
      g.ix(r, c) = 0.5 * (dxa + dxb);
      g.iy(r, c) = 0.5 * (dya + dyb);
      g.it(r, c) = b.at(r, c) - a.at(r, c);
    }
  }
  return g;
}

// 8-neighbourhood smoothness weights: 1/6 for edge neighbours, 1/12 for diagonals.
struct Neighbor {
  int dr, dc;
  double w;
};
inline constexpr Neighbor kNeighbors[8] = {{-1, 0, 1.0 / 6}, {1, 0, 1.0 / 6},   {0, -1, 1.0 / 6},  {0, 1, 1.0 / 6},
                                           {-1, -1, 1.0 / 12}, {-1, 1, 1.0 / 12}, {1, -1, 1.0 / 12}, {1, 1, 1.0 / 12}};

}  // namespace detail

// Horn-Schunck energy: sum of squared brightness-constancy residuals plus
// smoothness^2 times the weighted squared differences over every neighbour pair.
inline double horn_schunck_energy(const Image& prev, const Image& cur, const FlowField& flow, double smoothness) {
  const auto g = detail::flow_gradients(prev, cur);
  const int H = g.ix.height();
  const int W = g.ix.width();
  double data = 0.0;
  double smooth = 0.0;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const double e = g.ix(r, c) * flow.u(r, c) + g.iy(r, c) * flow.v(r, c) + g.it(r, c);
      data += e * e;
      for (const auto& nb : detail::kNeighbors) {
        const int rr = r + nb.dr;
        const int cc = c + nb.dc;
        if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
        const double du = flow.u(r, c) - flow.u(rr, cc);
        const double dv = flow.v(r, c) - flow.v(rr, cc);
        smooth += 0.5 * nb.w * (du * du + dv * dv);  // each pair is visited twice
      }
    }
  }
  return data + smoothness * smoothness * smooth;
}

// Gauss-Seidel Horn-Schunck: each sweep replaces (u,v) at a pixel by the exact
// minimizer of the energy given its neighbours, so the energy never increases.
inline FlowField horn_schunck_flow(const Image& prev, const Image& cur, double smoothness, int iterations,
                                   const std::function<void(int, const FlowField&)>& on_iteration = {}) {
  if (!(smoothness > 0.0) || iterations < 1) fail(ErrorKind::invalid_argument, "smoothness > 0 and iterations >= 1");
  const auto g = detail::flow_gradients(prev, cur);
  const int H = g.ix.height();
  const int W = g.ix.width();
  FlowField flow{RealGrid(H, W), RealGrid(H, W)};
  const double a2 = smoothness * smoothness;
  for (int it = 0; it < iterations; ++it) {
    for (int r = 0; r < H; ++r) {
      for (int c = 0; c < W; ++c) {
        double wsum = 0.0;
        double ubar = 0.0;
        double vbar = 0.0;
        for (const auto& nb : detail::kNeighbors) {
          const int rr = r + nb.dr;
          const int cc = c + nb.dc;
          if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
          wsum += nb.w;
          ubar += nb.w * flow.u(rr, cc);
          vbar += nb.w * flow.v(rr, cc);
        }
        ubar /= wsum;
        vbar /= wsum;
        const double ix = g.ix(r, c);
        const double iy = g.iy(r, c);
        const double e0 = ix * ubar + iy * vbar + g.it(r, c);
        const double denom = a2 * wsum + ix * ix + iy * iy;
        flow.u(r, c) = ubar - ix * e0 / denom;
        flow.v(r, c) = vbar - iy * e0 / denom;
      }
    }
    if (on_iteration) on_iteration(it + 1, flow);
  }
  return flow;
}

}  // namespace fusetrack
