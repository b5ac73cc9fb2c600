// Generates assets/cn_table.bin: for every 5-bit-quantized RGB cell, the
// probabilities of the 11 basic color terms (black, blue, brown, grey, green,
// orange, pink, purple, red, white, yellow), computed as a softmax over CIELAB
// distances to one prototype per term.

#include <array>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <vector>

#include "fusetrack/features.hpp"

namespace {

using Lab = std::array<double, 3>;

double srgb_to_linear(double c) {
  c /= 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

Lab rgb_to_lab(double r, double g, double b) {
  const double R = srgb_to_linear(r);
  const double G = srgb_to_linear(g);
  const double B = srgb_to_linear(b);
  const double X = (0.4124 * R + 0.3576 * G + 0.1805 * B) / 0.95047;
  const double Y = 0.2126 * R + 0.7152 * G + 0.0722 * B;
  const double Z = (0.0193 * R + 0.1192 * G + 0.9505 * B) / 1.08883;
  auto f = [](double t) { return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0; };
  return {116.0 * f(Y) - 16.0, 500.0 * (f(X) - f(Y)), 200.0 * (f(Y) - f(Z))};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_cn_table OUT.bin\n";
    return 2;
  }
  constexpr std::array<std::array<double, 3>, 11> prototypes{{
      {0, 0, 0},        // black
      {0, 0, 255},      // blue
      {139, 69, 19},    // brown
      {128, 128, 128},  // grey
      {0, 160, 0},      // green
      {255, 140, 0},    // orange
      {255, 160, 200},  // pink
      {128, 0, 160},    // purple
      {255, 0, 0},      // red
      {255, 255, 255},  // white
      {255, 255, 0},    // yellow
  }};
  std::array<Lab, 11> proto_lab{};
  for (int i = 0; i < 11; ++i) proto_lab[i] = rgb_to_lab(prototypes[i][0], prototypes[i][1], prototypes[i][2]);

  constexpr double kTemperature = 15.0;  // Lab units
  std::vector<float> entries(static_cast<std::size_t>(fusetrack::CNTable::kRows) * fusetrack::CNTable::kNames);
  for (int b = 0; b < 32; ++b) {
    for (int g = 0; g < 32; ++g) {
      for (int r = 0; r < 32; ++r) {
        const Lab lab = rgb_to_lab(8 * r + 4, 8 * g + 4, 8 * b + 4);
        std::array<double, 11> logits{};
        double top = -1e300;
        for (int i = 0; i < 11; ++i) {
          double d2 = 0.0;
          for (int k = 0; k < 3; ++k) d2 += (lab[k] - proto_lab[i][k]) * (lab[k] - proto_lab[i][k]);
          logits[i] = -d2 / (2.0 * kTemperature * kTemperature);
          top = std::max(top, logits[i]);
        }
        double sum = 0.0;
        for (auto& l : logits) sum += (l = std::exp(l - top));
        const std::size_t row = static_cast<std::size_t>(r + 32 * g + 1024 * b);
        for (int i = 0; i < 11; ++i) entries[row * 11 + i] = static_cast<float>(logits[i] / sum);
      }
    }
  }
  fusetrack::CNTable(std::move(entries)).save(argv[1]);
  return 0;
}
