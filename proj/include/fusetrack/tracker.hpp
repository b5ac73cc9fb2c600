#pragma once

// Multi-feature tracking loop: one SRDCF per feature type, per-feature
// confidences fused on a pixel-dense grid by Fourier interpolation, five-scale
// search, detect-then-update.

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fusetrack/features.hpp"
#include "fusetrack/fmap.hpp"
#include "fusetrack/metrics.hpp"
#include "fusetrack/spectral.hpp"
#include "fusetrack/srdcf.hpp"

namespace fusetrack {

enum class FeatureKind { hog, cn, gray, external };

struct FeatureSpec {
  FeatureKind kind = FeatureKind::hog;
  int cell = 4;
  std::filesystem::path fmap_path;  // external only
};

// Cell size per hand-crafted feature kind.
struct FeatureCells {
  int hog = 4;
  int cn = 4;
  int gray = 4;
};

struct TrackerConfig {
  std::vector<FeatureSpec> features;
  FeatureCells cells;
  double region_area_factor = 5.0;  // training region area = factor^2 * target area
  int canonical_side = 224;
  int scale_count = 5;
  double scale_step = 1.02;
  double learning_rate = 0.01;
  LabelParams labels;
  double mu_min = 0.1;
  double eta = 3.0;
  SolverOptions first_solve{50, 1e-6};
  SolverOptions update_solve{5, 1e-6};
  std::filesystem::path cn_table;

  // Replaces the feature list, taking cell sizes from `cells`.
  void use_features(std::vector<FeatureSpec> specs) {
    for (auto& f : specs) {
      if (f.kind == FeatureKind::hog) f.cell = cells.hog;
      if (f.kind == FeatureKind::cn) f.cell = cells.cn;
      if (f.kind == FeatureKind::gray) f.cell = cells.gray;
    }
    features = std::move(specs);
  }

  void validate() const {
    if (features.empty()) fail(ErrorKind::empty_feature_list, "tracker needs at least one feature");
    if (scale_count < 1 || scale_count % 2 == 0) fail(ErrorKind::invalid_argument, "scale_count must be odd");
    if (!(scale_step > 1.0)) fail(ErrorKind::invalid_argument, "scale_step must exceed 1");
    if (!(region_area_factor > 0.0)) fail(ErrorKind::invalid_argument, "region_area_factor must be positive");
    if (canonical_side < 1) fail(ErrorKind::invalid_argument, "canonical_side must be positive");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail(ErrorKind::invalid_argument, "learning_rate in (0,1]");
    for (const auto& f : features) {
      if (f.kind != FeatureKind::external && (f.cell < 1 || canonical_side % f.cell != 0)) {
        fail(ErrorKind::divisibility, "canonical_side must be a multiple of every feature cell size");
      }
    }
  }
};

struct TargetState {
  Point center;
  double base_width = 0.0;  // size at scale 1
  double base_height = 0.0;
  double scale = 1.0;

  double width() const noexcept { return base_width * scale; }
  double height() const noexcept { return base_height * scale; }
  Rect box() const { return {center.x - 0.5 * width(), center.y - 0.5 * height(), width(), height()}; }
};

// Pixel-dense fused scores. Index (ref_row, ref_col) maps to `frame_center`;
// one index step is `frame_step` frame pixels.
struct ConfidenceMap {
  RealGrid scores;
  double ref_row = 0.0;
  double ref_col = 0.0;
  Point frame_center;
  double frame_step = 1.0;

  Point to_frame(int row, int col) const {
    return {frame_center.x + (col - ref_col) * frame_step, frame_center.y + (row - ref_row) * frame_step};
  }
};

struct StridedSpectrum {
  Spectrum spectrum;
  int stride = 1;
};

// Averages the per-feature confidences after interpolating each to rows x cols.
inline ConfidenceMap fuse_scores(const std::vector<StridedSpectrum>& confidences, int rows, int cols) {
  if (confidences.empty()) fail(ErrorKind::inconsistent_region, "nothing to fuse");
  ConfidenceMap out;
  out.scores = RealGrid(rows, cols);
  out.ref_row = 0.5 * rows;
  out.ref_col = 0.5 * cols;
  for (const auto& c : confidences) {
    const int M = c.spectrum.height();
    const int N = c.spectrum.width();
    if (std::abs(M * c.stride - rows) > c.stride || std::abs(N * c.stride - cols) > c.stride || M > rows || N > cols) {
      fail(ErrorKind::inconsistent_region, std::to_string(M) + "x" + std::to_string(N) + " cells at stride " +
                                               std::to_string(c.stride) + " do not cover a " + std::to_string(rows) +
                                               "x" + std::to_string(cols) + " region");
    }
    const RealGrid fine = idft2(zero_pad_interp(c.spectrum, rows, cols));
    for (std::size_t i = 0; i < fine.size(); ++i) out.scores[i] += fine[i];
  }
  const double inv = 1.0 / static_cast<double>(confidences.size());
  for (auto& v : out.scores.values()) v *= inv;
  return out;
}

struct GridPeak {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Row-major first occurrence of the maximum.
inline GridPeak argmax(const RealGrid& g) {
  GridPeak best{0, 0, g(0, 0)};
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      if (g(r, c) > best.value) best = {r, c, g(r, c)};
    }
  }
  return best;
}

struct Detection {
  TargetState state;
  ConfidenceMap map;  // fused map at the chosen scale
  int scale_index = 0;
  double peak = 0.0;
  // Per scale, the per-feature confidence spectra that were fused.
  std::vector<std::vector<StridedSpectrum>> responses;
};

class Tracker {
 public:
  static Tracker init(const Image& frame, const Rect& box, TrackerConfig cfg) {
    cfg.validate();
    if (frame.empty()) fail(ErrorKind::empty_frame, "initial frame is empty");
    if (!(box.w > 0.0) || !(box.h > 0.0)) fail(ErrorKind::degenerate_box, "initial box needs positive area");
    const Point c{box.x + 0.5 * box.w, box.y + 0.5 * box.h};
    if (c.x < 0.0 || c.y < 0.0 || c.x > frame.width || c.y > frame.height) {
      fail(ErrorKind::degenerate_box, "initial box lies outside the frame");
    }
    Tracker t(std::move(cfg));
    t.target_ = {c, box.w, box.h, 1.0};
    t.base_region_side_ = t.cfg_.region_area_factor * std::sqrt(box.w * box.h);

    const Image patch = sample_patch(frame, c, t.region_side(), t.cfg_.canonical_side);
    for (std::size_t j = 0; j < t.cfg_.features.size(); ++j) {
      const FeatureMap x = apply_window(t.extract(j, patch));
      const FeatureDescriptor desc = FeatureDescriptor::of(x);
      const double cells_per_pixel = static_cast<double>(t.cfg_.canonical_side) / t.region_side() / x.stride;
      const CellExtent extent{box.h * cells_per_pixel, box.w * cells_per_pixel};
      const CellPos center = center_cell(x.height, x.width);
      FeatureModel model{Filter::zero(desc), TrainingMemory(desc, t.cfg_.learning_rate),
                         make_labels(x.height, x.width, center, extent, t.cfg_.labels),
                         make_reg_weight(x.height, x.width, extent, t.cfg_.mu_min, t.cfg_.eta)};
      model.memory.update(x, model.labels);
      model.filter = solve_filter(model.memory, model.reg, t.cfg_.first_solve);
      t.models_.push_back(std::move(model));
    }
    return t;
  }

  const TargetState& target() const noexcept { return target_; }
  const TrackerConfig& config() const noexcept { return cfg_; }
  std::size_t frame_index() const noexcept { return frame_index_; }
  std::size_t feature_count() const noexcept { return models_.size(); }
  const TrainingMemory& memory(std::size_t j) const { return models_.at(j).memory; }
  const Filter& filter(std::size_t j) const { return models_.at(j).filter; }

  // Localizes the target in `frame` (taken as frame number `frame_index`)
  // without touching the model.
  Detection detect(const Image& frame, std::size_t frame_index) const {
    if (frame.empty()) fail(ErrorKind::empty_frame, "cannot detect in an empty frame");
    const int R = cfg_.canonical_side;
    const int mid = cfg_.scale_count / 2;
    Detection best;
    bool have_best = false;
    best.responses.resize(cfg_.scale_count);
    for (int k = 0; k < cfg_.scale_count; ++k) {
      const double factor = std::pow(cfg_.scale_step, k - mid);
      const double side = region_side() * factor;
      const Image patch = sample_patch(frame, target_.center, side, R);
      std::vector<StridedSpectrum> confidences;
      for (std::size_t j = 0; j < models_.size(); ++j) {
        const FeatureMap z = apply_window(extract(j, patch, frame_index));
        if (FeatureDescriptor::of(z) != models_[j].filter.desc) {
          fail(ErrorKind::dimension_mismatch, "feature " + std::to_string(j) + " changed shape between frames");
        }
        confidences.push_back({apply_filter(models_[j].filter, z), z.stride});
      }
      ConfidenceMap map = fuse_scores(confidences, R, R);
      map.frame_center = target_.center;
      map.frame_step = side / R;
      const GridPeak peak = argmax(map.scores);
      best.responses[k] = std::move(confidences);
      if (!have_best || peak.value > best.peak) {
        have_best = true;
        best.peak = peak.value;
        best.scale_index = k;
        best.state = target_;
        best.state.center = map.to_frame(peak.row, peak.col);
        best.state.center.x = std::clamp(best.state.center.x, 0.0, static_cast<double>(frame.width));
        best.state.center.y = std::clamp(best.state.center.y, 0.0, static_cast<double>(frame.height));
        best.state.scale = target_.scale * factor;
        best.map = std::move(map);
      }
    }
    return best;
  }

  Detection detect(const Image& frame) const { return detect(frame, frame_index_ + 1); }

  // Detect, move the target, then train on a sample at the new estimate.
  TargetState track(const Image& frame) {
    const std::size_t index = frame_index_ + 1;
    const Detection det = detect(frame, index);
    target_ = det.state;
    frame_index_ = index;
    const Image patch = sample_patch(frame, target_.center, region_side(), cfg_.canonical_side);
    for (std::size_t j = 0; j < models_.size(); ++j) {
      FeatureModel& m = models_[j];
      const FeatureMap x = apply_window(extract(j, patch, index));
      m.memory.update(x, m.labels);
      m.filter = solve_filter(m.memory, m.reg, cfg_.update_solve, &m.filter);
    }
    return target_;
  }

 private:
  struct FeatureModel {
    Filter filter;
    TrainingMemory memory;
    RealGrid labels;
    RegWeight reg;
  };

  explicit Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
    for (const auto& f : cfg_.features) {
      if (f.kind == FeatureKind::cn && !cn_table_) {
        cn_table_ = std::make_shared<const CNTable>(CNTable::load(cfg_.cn_table));
      }
      fmaps_.push_back(f.kind == FeatureKind::external ? std::make_shared<const FmapFile>(f.fmap_path) : nullptr);
    }
  }

  double region_side() const noexcept { return base_region_side_ * target_.scale; }

  FeatureMap extract(std::size_t j, const Image& patch, std::size_t frame_index = 0) const {
    const FeatureSpec& spec = cfg_.features[j];
    switch (spec.kind) {
      case FeatureKind::hog: return extract_hog(patch, spec.cell);
      case FeatureKind::cn: return extract_cn(patch, *cn_table_, spec.cell);
      case FeatureKind::gray: return extract_gray(patch, spec.cell);
      case FeatureKind::external: {
        FeatureMap x = fmaps_[j]->read(frame_index);
        const int R = cfg_.canonical_side;
        if (std::abs(x.height * x.stride - R) > x.stride || std::abs(x.width * x.stride - R) > x.stride) {
          fail(ErrorKind::inconsistent_region, fmaps_[j]->path().string() + " does not cover a " + std::to_string(R) +
                                                   " px patch");
        }
        return x;
      }
    }
    fail(ErrorKind::invalid_argument, "unknown feature kind");
  }

  TrackerConfig cfg_;
  TargetState target_;
  double base_region_side_ = 0.0;
  std::size_t frame_index_ = 0;
  std::vector<FeatureModel> models_;
  std::shared_ptr<const CNTable> cn_table_;
  std::vector<std::shared_ptr<const FmapFile>> fmaps_;
};

}  // namespace fusetrack
