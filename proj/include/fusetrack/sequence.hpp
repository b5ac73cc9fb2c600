#pragma once

// OTB-style sequence directories (img/ + groundtruth_rect.txt) and trajectory files.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "fusetrack/image.hpp"
#include "fusetrack/metrics.hpp"

namespace fusetrack {

struct SequenceSpec {
  std::filesystem::path root;
  std::vector<std::filesystem::path> frames;
  std::vector<Rect> ground_truth;
};

namespace detail {

inline bool parse_double(std::string_view token, double& out) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\r')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

// One "x,y,w,h" line; commas, tabs or spaces separate the fields.
inline bool parse_rect_line(const std::string& line, Rect& out) {
  std::vector<std::string_view> fields;
  std::string_view rest(line);
  while (!rest.empty()) {
    const auto pos = rest.find_first_of(",\t ");
    const auto token = rest.substr(0, pos);
    if (!token.empty()) fields.push_back(token);
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  if (fields.size() != 4) return false;
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!parse_double(fields[i], v[i])) return false;
  }
  out = {v[0], v[1], v[2], v[3]};
  return true;
}

inline bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Reads rect lines; `one_based` shifts x,y down by one (OTB ground truth convention).
inline std::vector<Rect> load_rects(const std::filesystem::path& path, bool one_based) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::missing_file, "cannot open " + path.string());
  std::vector<Rect> rects;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    Rect r;
    if (!detail::parse_rect_line(line, r)) {
      fail(ErrorKind::parse_error, path.string() + ":" + std::to_string(line_no) + ": cannot parse \"" + line + "\"");
    }
    if (one_based) {
      r.x -= 1.0;
      r.y -= 1.0;
    }
    rects.push_back(r);
  }
  return rects;
}

inline void save_rects(const std::filesystem::path& path, std::span<const Rect> rects, bool one_based) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io_error, "cannot write " + path.string());
  const double shift = one_based ? 1.0 : 0.0;
  for (const auto& r : rects) {
    out << detail::format_number(r.x + shift) << ',' << detail::format_number(r.y + shift) << ','
        << detail::format_number(r.w) << ',' << detail::format_number(r.h) << '\n';
  }
  if (!out) fail(ErrorKind::io_error, "short write to " + path.string());
}

// Tracker output: one "x,y,w,h" line per frame, 0-based, shortest round-trip decimal form.
inline void save_trajectory(const std::filesystem::path& path, std::span<const Rect> rects) { save_rects(path, rects, false); }
inline std::vector<Rect> load_trajectory(const std::filesystem::path& path) { return load_rects(path, false); }

inline SequenceSpec load_sequence(const std::filesystem::path& dir) {
  SequenceSpec seq;
  seq.root = dir;
  const auto gt_path = dir / "groundtruth_rect.txt";
  if (!std::filesystem::is_regular_file(gt_path)) fail(ErrorKind::missing_file, "missing " + gt_path.string());
  const auto img_dir = dir / "img";
  if (!std::filesystem::is_directory(img_dir)) fail(ErrorKind::missing_file, "missing frame folder " + img_dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(img_dir)) {
    if (entry.is_regular_file()) seq.frames.push_back(entry.path());
  }
  std::sort(seq.frames.begin(), seq.frames.end());
  seq.ground_truth = load_rects(gt_path, true);
  if (seq.frames.size() != seq.ground_truth.size()) {
    fail(ErrorKind::count_mismatch, std::to_string(seq.frames.size()) + " frames but " +
                                        std::to_string(seq.ground_truth.size()) + " ground-truth boxes in " + dir.string());
  }
  if (seq.ground_truth.empty() || !(seq.ground_truth.front().area() > 0.0)) {
    fail(ErrorKind::degenerate_box, "first ground-truth box must have positive area");
  }
  return seq;
}

// Frames come back RGB, 0..255 doubles.
inline Image read_frame(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) fail(ErrorKind::io_error, "cannot decode frame " + path.string());
  Image img(bgr.rows, bgr.cols, 3);
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c) {
      img.at(r, c, 0) = row[c][2];
      img.at(r, c, 1) = row[c][1];
      img.at(r, c, 2) = row[c][0];
    }
  }
  return img;
}

inline void write_frame(const std::filesystem::path& path, const Image8& img) {
  cv::Mat mat(img.height, img.width, img.channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int r = 0; r < img.height; ++r) {
    auto* row = mat.ptr<std::uint8_t>(r);
    for (int c = 0; c < img.width; ++c) {
      if (img.channels == 3) {
        row[3 * c + 0] = img.at(r, c, 2);
        row[3 * c + 1] = img.at(r, c, 1);
        row[3 * c + 2] = img.at(r, c, 0);
      } else {
        row[c] = img.at(r, c);
      }
    }
  }
  if (!cv::imwrite(path.string(), mat)) fail(ErrorKind::io_error, "cannot write frame " + path.string());
}

}  // namespace fusetrack
