#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string>

#include "fusetrack/error.hpp"

namespace fusetrack {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box, top-left corner plus size, 0-based pixel coordinates.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const noexcept { return w * h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

inline double iou(const Rect& a, const Rect& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace detail {

inline void require_same_length(std::span<const Rect> traj, std::span<const Rect> gt) {
  if (traj.size() != gt.size() || traj.empty()) {
    fail(ErrorKind::length_mismatch, "trajectory has " + std::to_string(traj.size()) + " boxes, ground truth has " +
                                         std::to_string(gt.size()));
  }
}

}  // namespace detail

// Percentage of frames whose overlap strictly exceeds the threshold.
inline double overlap_precision(std::span<const Rect> traj, std::span<const Rect> gt, double threshold) {
  detail::require_same_length(traj, gt);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) hits += iou(traj[i], gt[i]) > threshold ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(traj.size());
}

struct SuccessCurve {
  static constexpr int kPoints = 21;
  std::array<double, kPoints> thresholds{};
  std::array<double, kPoints> op_percent{};
};

struct SuccessSummary {
  double auc = 0.0;  // in [0,1]
  SuccessCurve curve;
};

inline double success_threshold(int k) { return k / 20.0; }

inline SuccessSummary auc_success(std::span<const Rect> traj, std::span<const Rect> gt) {
  detail::require_same_length(traj, gt);
  SuccessSummary out;
  double sum = 0.0;
  for (int k = 0; k < SuccessCurve::kPoints; ++k) {
    out.curve.thresholds[k] = success_threshold(k);
    out.curve.op_percent[k] = overlap_precision(traj, gt, out.curve.thresholds[k]);
    sum += out.curve.op_percent[k];
  }
  out.auc = sum / SuccessCurve::kPoints / 100.0;
  return out;
}

}  // namespace fusetrack
