// Tracks a rendered target through an in-memory synthetic sequence and prints
// the per-frame overlap with ground truth.

#include <cstdio>

#include "fusetrack/synthetic.hpp"
#include "fusetrack/tracker.hpp"

int main() {
  using namespace fusetrack;
  const SyntheticSequence seq = gen_synthetic(SyntheticKind::translate, 30, 7);

  TrackerConfig cfg;
  cfg.use_features({{FeatureKind::hog}, {FeatureKind::gray}});

  Tracker tracker = Tracker::init(to_double(seq.frames[0]), seq.ground_truth[0], cfg);
  for (std::size_t k = 1; k < seq.frames.size(); ++k) {
    const Rect box = tracker.track(to_double(seq.frames[k])).box();
    std::printf("frame %2zu  box %7.2f %7.2f %6.2f %6.2f  iou %.3f\n", k, box.x, box.y, box.w, box.h,
                iou(box, seq.ground_truth[k]));
  }
  return 0;
}
