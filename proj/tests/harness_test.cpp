#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fusetrack/config.hpp"
#include "fusetrack/sequence.hpp"
#include "fusetrack/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fusetrack {
namespace {

Rect random_rect(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 60.0);
  std::uniform_real_distribution<double> size(5.0, 40.0);
  return {pos(rng), pos(rng), size(rng), size(rng)};
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

void make_sequence(const std::filesystem::path& dir, int frames, const std::string& gt) {
  std::filesystem::create_directories(dir / "img");
  for (int k = 1; k <= frames; ++k) {
    char name[16];
    std::snprintf(name, sizeof(name), "%04d.png", k);
    write_frame(dir / "img" / name, Image8(6, 8, 3, static_cast<std::uint8_t>(10 * k)));
  }
  write_text(dir / "groundtruth_rect.txt", gt);
}

TEST(Iou, KnownConfigurations) {
  const Rect a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {20, 20, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, {10, 0, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, {5, 0, 10, 10}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou(a, {2, 2, 5, 5}), 0.25);
  EXPECT_DOUBLE_EQ(iou(a, {0, 0, 0, 0}), 0.0);
}

TEST(Metrics, MatchRecountOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> len(1, 30);
    const int n = len(rng);
    std::vector<Rect> traj;
    std::vector<Rect> gt;
    for (int k = 0; k < n; ++k) {
      gt.push_back(random_rect(rng));
      traj.push_back(random_rect(rng));
    }
    auto op = [&](double t) {
      int hits = 0;
      for (int k = 0; k < n; ++k) hits += oracle::iou(traj[k], gt[k]) > t;
      return 100.0 * hits / n;
    };
    EXPECT_NEAR(overlap_precision(traj, gt, 0.5), op(0.5), 1e-12);
    double auc = 0.0;
    for (int k = 0; k <= 20; ++k) auc += op(k * 0.05);
    const SuccessSummary s = auc_success(traj, gt);
    EXPECT_NEAR(s.auc, auc / 21.0 / 100.0, 1e-12);
    EXPECT_DOUBLE_EQ(s.curve.thresholds[20], 1.0);
    for (int k = 1; k <= 20; ++k) EXPECT_LE(s.curve.op_percent[k], s.curve.op_percent[k - 1]);
  }
}

TEST(Metrics, PerfectTrackingScoresFull) {
  const std::vector<Rect> gt{{1, 2, 3, 4}, {5, 6, 7, 8}};
  EXPECT_DOUBLE_EQ(overlap_precision(gt, gt, 0.5), 100.0);
  const SuccessSummary s = auc_success(gt, gt);
  EXPECT_NEAR(s.auc, 20.0 / 21.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.curve.op_percent[20], 0.0);
}

TEST(Metrics, LengthMismatchIsAnError) {
  const std::vector<Rect> a(3);
  const std::vector<Rect> b(4);
  testutil::expect_error(ErrorKind::length_mismatch, [&] { overlap_precision(a, b, 0.5); });
  testutil::expect_error(ErrorKind::length_mismatch, [&] { auc_success(b, a); });
}

TEST(Sequence, LoadsAllSeparatorStylesAsZeroBased) {
  const auto dir = testutil::scratch_dir("seq");
  make_sequence(dir, 3, "11,21,30,40\n12\t22\t30\t40\r\n\n13 23 30 40\n");
  const SequenceSpec seq = load_sequence(dir);
  ASSERT_EQ(seq.frames.size(), 3u);
  EXPECT_EQ(seq.frames[0].filename(), "0001.png");
  EXPECT_EQ(seq.ground_truth[0], (Rect{10, 20, 30, 40}));
  EXPECT_EQ(seq.ground_truth[1], (Rect{11, 21, 30, 40}));
  EXPECT_EQ(seq.ground_truth[2], (Rect{12, 22, 30, 40}));
  const Image f = read_frame(seq.frames[1]);
  EXPECT_EQ(f.height, 6);
  EXPECT_EQ(f.width, 8);
  EXPECT_EQ(f.at(3, 4, 2), 20.0);
}

TEST(Sequence, CountMismatchNamesBothCounts) {
  const auto dir = testutil::scratch_dir("seq");
  make_sequence(dir, 3, "1,1,5,5\n1,1,5,5\n");
  try {
    load_sequence(dir);
    FAIL() << "expected count_mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::count_mismatch);
    EXPECT_NE(std::string(e.what()).find("3 frames but 2"), std::string::npos) << e.what();
  }
}

TEST(Sequence, MalformedOrMissingInputs) {
  const auto dir = testutil::scratch_dir("seq");
  make_sequence(dir, 1, "1,1,five,5\n");
  testutil::expect_error(ErrorKind::parse_error, [&] { load_sequence(dir); });
  write_text(dir / "groundtruth_rect.txt", "1,1,0,5\n");
  testutil::expect_error(ErrorKind::degenerate_box, [&] { load_sequence(dir); });
  testutil::expect_error(ErrorKind::missing_file, [&] { load_sequence(dir / "nope"); });
}

TEST(Trajectory, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  const auto dir = testutil::scratch_dir("traj");
  std::vector<Rect> rects;
  for (int k = 0; k < 50; ++k) rects.push_back(random_rect(rng));
  rects.push_back({-0.1, 1e-9, 1.0 / 3.0, 2.0 / 7.0});
  save_trajectory(dir / "t.txt", rects);
  EXPECT_EQ(load_trajectory(dir / "t.txt"), rects);
  save_rects(dir / "g.txt", rects, true);
  const auto back = load_rects(dir / "g.txt", true);
  for (std::size_t k = 0; k < rects.size(); ++k) {
    EXPECT_NEAR(back[k].x, rects[k].x, 1e-12);
    EXPECT_EQ(back[k].w, rects[k].w);
  }
}

TEST(Synthetic, TranslateMovesBoxAtConstantVelocity) {
  const SyntheticSequence seq = gen_synthetic(SyntheticKind::translate, 6, 4);
  ASSERT_EQ(seq.frames.size(), 6u);
  EXPECT_EQ(seq.frames[0].width, 480);
  EXPECT_EQ(seq.frames[0].height, 360);
  for (int k = 0; k < 6; ++k) {
    EXPECT_DOUBLE_EQ(seq.ground_truth[k].x, 60.0 + 5.0 * k);
    EXPECT_DOUBLE_EQ(seq.ground_truth[k].y, 50.0 + 3.0 * k);
    EXPECT_DOUBLE_EQ(seq.ground_truth[k].w, 40.0);
  }
}

TEST(Synthetic, ZoomGrowsAboutFixedCenter) {
  const SyntheticSequence seq = gen_synthetic(SyntheticKind::zoom, 5, 4);
  for (int k = 0; k < 5; ++k) {
    const Rect& r = seq.ground_truth[k];
    EXPECT_NEAR(r.w, 32.0 * std::pow(1.02, k), 1e-12);
    EXPECT_NEAR(r.x + 0.5 * r.w, 200.0, 1e-12);
    EXPECT_NEAR(r.y + 0.5 * r.h, 200.0, 1e-12);
  }
}

TEST(Synthetic, SeedDeterminesContent) {
  const SyntheticSequence a = gen_synthetic(SyntheticKind::translate, 2, 7);
  const SyntheticSequence b = gen_synthetic(SyntheticKind::translate, 2, 7);
  const SyntheticSequence c = gen_synthetic(SyntheticKind::translate, 2, 8);
  EXPECT_EQ(a.frames[1].data, b.frames[1].data);
  EXPECT_NE(a.frames[1].data, c.frames[1].data);
}

TEST(Synthetic, TargetIsTexturedAndDiffersFromBackground) {
  const SyntheticSequence seq = gen_synthetic(SyntheticKind::translate, 2, 5);
  const Image8& f = seq.frames[0];
  int lo = 255;
  int hi = 0;
  for (int r = 55; r < 85; ++r) {
    for (int c = 65; c < 95; ++c) {
      lo = std::min<int>(lo, f.at(r, c, 0));
      hi = std::max<int>(hi, f.at(r, c, 0));
    }
  }
  EXPECT_GT(hi - lo, 40);
  testutil::expect_error(ErrorKind::invalid_argument, [] { gen_synthetic(SyntheticKind::zoom, 1, 1); });
}

TEST(Config, ParsesKeysCommentsAndFeatureCells) {
  std::istringstream in(
      "# tracker settings\n"
      "features = hog, cn , external:deep.fmap\n"
      "hog_cell = 8\n"
      "scale_step = 1.05   # wider steps\n"
      "update_iterations = 3\n"
      "cn_table = table.bin\n");
  const TrackerConfig cfg = parse_tracker_config(in, "/base");
  ASSERT_EQ(cfg.features.size(), 3u);
  EXPECT_EQ(cfg.features[0].kind, FeatureKind::hog);
  EXPECT_EQ(cfg.features[0].cell, 8);
  EXPECT_EQ(cfg.features[1].kind, FeatureKind::cn);
  EXPECT_EQ(cfg.features[1].cell, 4);
  EXPECT_EQ(cfg.features[2].kind, FeatureKind::external);
  EXPECT_EQ(cfg.features[2].fmap_path, "deep.fmap");
  EXPECT_DOUBLE_EQ(cfg.scale_step, 1.05);
  EXPECT_EQ(cfg.update_solve.iterations, 3);
  EXPECT_EQ(cfg.cn_table, std::filesystem::path("/base/table.bin"));
}

TEST(Config, RejectsUnknownKeysAndFeatures) {
  std::istringstream bad_key("zoom = 3\n");
  testutil::expect_error(ErrorKind::usage, [&] { parse_tracker_config(bad_key); });
  std::istringstream bad_value("eta = lots\n");
  testutil::expect_error(ErrorKind::parse_error, [&] { parse_tracker_config(bad_value); });
  testutil::expect_error(ErrorKind::usage, [] { parse_feature_list("hog,sift"); });
}

}  // namespace
}  // namespace fusetrack
