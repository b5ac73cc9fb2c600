#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fusetrack/features.hpp"
#include "test_util.hpp"

namespace fusetrack {
namespace {

Image random_image(std::mt19937_64& rng, int h, int w, int channels) {
  std::uniform_real_distribution<double> dist(0.0, 255.0);
  Image img(h, w, channels);
  for (auto& v : img.data) v = dist(rng);
  return img;
}

// Smooth image with gradients in every direction; values stay within [0, 255].
Image smooth_image(int h, int w) {
  Image img(h, w, 3);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      img.at(r, c, 0) = 128 + 60 * std::sin(0.11 * c + 0.05 * r);
      img.at(r, c, 1) = 128 + 60 * std::cos(0.07 * r - 0.03 * c);
      img.at(r, c, 2) = 100 + 0.5 * r + 0.3 * c;
    }
  }
  return img;
}

CNTable synthetic_table() {
  std::vector<float> entries(static_cast<std::size_t>(CNTable::kRows) * CNTable::kNames);
  for (int i = 0; i < CNTable::kRows; ++i) {
    float sum = 0.0f;
    for (int l = 0; l < CNTable::kNames; ++l) sum += (entries[i * CNTable::kNames + l] = static_cast<float>((i * 7 + l * 13) % 17 + 1));
    for (int l = 0; l < CNTable::kNames; ++l) entries[i * CNTable::kNames + l] /= sum;
  }
  return CNTable(std::move(entries));
}

using testutil::expect_error;

TEST(SamplePatch, UnitScaleEqualsSlicing) {
  std::mt19937_64 rng(1);
  const Image frame = random_image(rng, 40, 50, 3);
  const Image patch = sample_patch(frame, {25.0, 20.0}, 16.0, 16);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_DOUBLE_EQ(patch.at(i, j, ch), frame.at(12 + i, 17 + j, ch));
    }
  }
}

TEST(SamplePatch, CornerReplicatesBorder) {
  std::mt19937_64 rng(2);
  const Image frame = random_image(rng, 20, 20, 1);
  const Image patch = sample_patch(frame, {0.0, 0.0}, 8.0, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const int r = std::max(0, i - 4);
      const int c = std::max(0, j - 4);
      EXPECT_DOUBLE_EQ(patch.at(i, j), frame.at(r, c));
    }
  }
}

TEST(SamplePatch, UpDownRoundTripOnSmoothImage) {
  const Image frame = smooth_image(80, 80);
  const Image crop = sample_patch(frame, {40.0, 40.0}, 32.0, 32);
  const Image up = sample_patch(frame, {40.0, 40.0}, 32.0, 64);
  const Image down = sample_patch(up, {32.0, 32.0}, 64.0, 32);
  double worst = 0.0;
  for (std::size_t i = 0; i < crop.data.size(); ++i) worst = std::max(worst, std::abs(crop.data[i] - down.data[i]));
  EXPECT_LT(worst, 2.0);
}

TEST(SamplePatch, RejectsEmptyFrame) {
  expect_error(ErrorKind::empty_frame, [] { sample_patch(Image{}, {0, 0}, 4.0, 4); });
}

TEST(Hog, ConstantPatchGivesZeros) {
  const Image patch(16, 16, 3, 90.0);
  const FeatureMap x = extract_hog(patch, 4);
  EXPECT_EQ(x.channels, kHogChannels);
  EXPECT_EQ(x.height, 4);
  EXPECT_EQ(x.stride, 4);
  for (double v : x.values) EXPECT_EQ(v, 0.0);
}

TEST(Hog, VerticalEdgeFillsHorizontalGradientBin) {
  Image patch(16, 16, 1);
  for (int r = 0; r < 16; ++r) {
    for (int c = 8; c < 16; ++c) patch.at(r, c) = 200.0;
  }
  const FeatureMap x = extract_hog(patch, 4);
  // Cell column 1 and 2 straddle the edge at pixel column 8.
  for (int r = 0; r < 4; ++r) {
    for (int c : {1, 2}) {
      int best = 0;
      for (int o = 1; o < 18; ++o) {
        if (x.at(o, r, c) > x.at(best, r, c)) best = o;
      }
      EXPECT_EQ(best, 0) << "cell " << r << "," << c;
      int best_insensitive = 18;
      for (int o = 19; o < 27; ++o) {
        if (x.at(o, r, c) > x.at(best_insensitive, r, c)) best_insensitive = o;
      }
      EXPECT_EQ(best_insensitive, 18);
      EXPECT_GT(x.at(0, r, c), 0.0);
    }
  }
}

TEST(Hog, InvariantToContrastScaling) {
  std::mt19937_64 rng(3);
  const Image a = random_image(rng, 32, 32, 3);
  Image b = a;
  for (auto& v : b.data) v *= 1.7;
  const FeatureMap xa = extract_hog(a, 4);
  const FeatureMap xb = extract_hog(b, 4);
  double worst = 0.0;
  for (std::size_t i = 0; i < xa.values.size(); ++i) worst = std::max(worst, std::abs(xa.values[i] - xb.values[i]));
  EXPECT_LT(worst, 1e-3);
}

TEST(Hog, TranslationCovariantByWholeCells) {
  std::mt19937_64 rng(4);
  const Image big = random_image(rng, 40, 44, 3);
  Image a(32, 32, 3);
  Image b(32, 32, 3);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        a.at(r, c, ch) = big.at(r + 4, c + 4, ch);
        b.at(r, c, ch) = big.at(r + 4, c + 8, ch);  // content moved one cell left
      }
    }
  }
  const FeatureMap xa = extract_hog(a, 4);
  const FeatureMap xb = extract_hog(b, 4);
  // Votes spread half a cell and block norms reach one more, so two border cells differ.
  for (int l = 0; l < kHogChannels; ++l) {
    for (int m = 0; m < 8; ++m) {
      for (int n = 2; n < 5; ++n) EXPECT_NEAR(xb.at(l, m, n), xa.at(l, m, n + 1), 1e-12) << l << " " << m << " " << n;
    }
  }
}

TEST(Hog, RejectsIndivisiblePatch) {
  expect_error(ErrorKind::divisibility, [] { extract_hog(Image(18, 16, 1), 4); });
}

TEST(ColorNames, UniformPatchEqualsTableRow) {
  const CNTable table = synthetic_table();
  const Image patch(3, 3, 3, 0.0);
  Image p = patch;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      p.at(r, c, 0) = 200;
      p.at(r, c, 1) = 40;
      p.at(r, c, 2) = 90;
    }
  }
  const FeatureMap x = extract_cn(p, table, 1);
  const auto row = table.row(CNTable::index_of(200, 40, 90));
  for (int m = 0; m < 3; ++m) {
    for (int n = 0; n < 3; ++n) {
      for (int l = 0; l < CNTable::kNames; ++l) EXPECT_DOUBLE_EQ(x.at(l, m, n), row[l]);
    }
  }
}

TEST(ColorNames, PoolsTwoColorsToTheirMean) {
  const CNTable table = synthetic_table();
  Image p(2, 2, 3);
  const int colors[2][3] = {{10, 250, 30}, {128, 64, 200}};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      for (int ch = 0; ch < 3; ++ch) p.at(r, c, ch) = colors[r][ch];
    }
  }
  const FeatureMap x = extract_cn(p, table, 2);
  const auto a = table.row(CNTable::index_of(10, 250, 30));
  const auto b = table.row(CNTable::index_of(128, 64, 200));
  for (int l = 0; l < CNTable::kNames; ++l) EXPECT_NEAR(x.at(l, 0, 0), 0.5 * (static_cast<double>(a[l]) + b[l]), 1e-12);
}

TEST(ColorNames, ShippedTableMapsPureRedToRed) {
  const CNTable table = CNTable::load(FUSETRACK_DEFAULT_CN_TABLE);
  constexpr int kRed = 8;  // black, blue, brown, grey, green, orange, pink, purple, red, white, yellow
  Image p(4, 4, 3);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) p.at(r, c, 0) = 255;
  }
  const FeatureMap x = extract_cn(p, table, 4);
  int best = 0;
  for (int l = 1; l < CNTable::kNames; ++l) {
    if (x.at(l, 0, 0) > x.at(best, 0, 0)) best = l;
  }
  EXPECT_EQ(best, kRed);
}

TEST(ColorNames, MissingTableFileIsReported) {
  expect_error(ErrorKind::missing_table, [] { CNTable::load("/nonexistent/cn.bin"); });
  expect_error(ErrorKind::missing_table, [] { extract_cn(Image(4, 4, 3), CNTable{}, 4); });
}

TEST(Gray, MidGrayIsZero) {
  const FeatureMap x = extract_gray(Image(8, 8, 3, 127.5), 4);
  for (double v : x.values) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Gray, UnitCellIsPerPixelMapping) {
  std::mt19937_64 rng(5);
  const Image p = random_image(rng, 5, 6, 1);
  const FeatureMap x = extract_gray(p, 1);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 6; ++c) EXPECT_NEAR(x.at(0, r, c), p.at(r, c) / 255.0 - 0.5, 1e-15);
  }
}

TEST(Gray, MatchesPoolingOracle) {
  std::mt19937_64 rng(6);
  const Image p = random_image(rng, 16, 12, 3);
  const FeatureMap x = extract_gray(p, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (int y = 0; y < 4; ++y) {
        for (int xx = 0; xx < 4; ++xx) {
          const int py = 4 * r + y;
          const int px = 4 * c + xx;
          sum += 0.299 * p.at(py, px, 0) + 0.587 * p.at(py, px, 1) + 0.114 * p.at(py, px, 2);
        }
      }
      EXPECT_NEAR(x.at(0, r, c), sum / 16.0 / 255.0 - 0.5, 1e-12);
    }
  }
}

TEST(Window, CornersVanish) {
  FeatureMap x(3, 6, 7, 4);
  for (auto& v : x.values) v = 1.0;
  const FeatureMap w = apply_window(x);
  for (int l = 0; l < 3; ++l) {
    EXPECT_EQ(w.at(l, 0, 0), 0.0);
    EXPECT_EQ(w.at(l, 5, 6), 0.0);
    EXPECT_EQ(w.at(l, 0, 6), 0.0);
    EXPECT_EQ(w.at(l, 5, 0), 0.0);
  }
}

TEST(Window, ConstantOneGivesSeparableHann) {
  FeatureMap x(1, 9, 5, 1);
  for (auto& v : x.values) v = 1.0;
  const FeatureMap w = apply_window(x);
  for (int m = 0; m < 9; ++m) {
    for (int n = 0; n < 5; ++n) {
      const double wm = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * m / 8);
      const double wn = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / 4);
      EXPECT_NEAR(w.at(0, m, n), wm * wn, 1e-15);
    }
  }
}

TEST(FeatureInvariants, FuzzedExtractorsProduceValidMaps) {
  std::mt19937_64 rng(7);
  const CNTable table = synthetic_table();
  std::uniform_int_distribution<int> cells(1, 6);
  std::uniform_int_distribution<int> blocks(1, 8);
  for (int trial = 0; trial < 30; ++trial) {
    const int cell = cells(rng);
    const int h = cell * blocks(rng);
    const int w = cell * blocks(rng);
    Image p = random_image(rng, h, w, 3);
    if (trial % 5 == 0) p = Image(h, w, 3, 17.0);
    for (const FeatureMap& x : {extract_hog(p, cell), extract_cn(p, table, cell), extract_gray(p, cell)}) {
      EXPECT_GE(x.channels, 1);
      EXPECT_EQ(x.stride, cell);
      EXPECT_TRUE(x.all_finite());
      EXPECT_LE(x.height * x.stride, h + x.stride);
      EXPECT_LE(x.width * x.stride, w + x.stride);
      EXPECT_EQ(x.values.size(), static_cast<std::size_t>(x.channels) * x.height * x.width);
    }
  }
}

}  // namespace
}  // namespace fusetrack
