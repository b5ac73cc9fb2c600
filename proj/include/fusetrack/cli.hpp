#pragma once

// Command-line front end:
//   track --sequence DIR [--config FILE] --out FILE [--features LIST]
//   eval  --results FILE --sequence DIR [--op-threshold T] [--curve OUT.csv]
//   synth --kind translate|zoom --frames N --seed S --out DIR
// Exit codes: 0 success, 1 I/O or data error, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "fusetrack/config.hpp"
#include "fusetrack/metrics.hpp"
#include "fusetrack/sequence.hpp"
#include "fusetrack/synthetic.hpp"
#include "fusetrack/tracker.hpp"

namespace fusetrack {

namespace detail {

inline void run_track(const std::filesystem::path& sequence_dir, const std::string& config_path,
                      const std::filesystem::path& out_path, const std::string& features, std::ostream& out) {
  TrackerConfig cfg = config_path.empty() ? default_tracker_config() : load_tracker_config(config_path);
  if (!features.empty()) cfg.use_features(parse_feature_list(features));
  for (auto& f : cfg.features) {
    if (f.kind == FeatureKind::external && f.fmap_path.is_relative()) f.fmap_path = sequence_dir / f.fmap_path;
  }
  cfg.validate();
  const SequenceSpec seq = load_sequence(sequence_dir);
  std::vector<Rect> trajectory;
  trajectory.reserve(seq.frames.size());
  Tracker tracker = Tracker::init(read_frame(seq.frames[0]), seq.ground_truth[0], cfg);
  trajectory.push_back(tracker.target().box());
  for (std::size_t k = 1; k < seq.frames.size(); ++k) trajectory.push_back(tracker.track(read_frame(seq.frames[k])).box());
  save_trajectory(out_path, trajectory);
  out << "tracked " << trajectory.size() << " frames -> " << out_path.string() << '\n';
}

inline void run_eval(const std::filesystem::path& results, const std::filesystem::path& sequence_dir, double threshold,
                     const std::string& curve_path, std::ostream& out) {
  const auto trajectory = load_trajectory(results);
  const SequenceSpec seq = load_sequence(sequence_dir);
  const double op = overlap_precision(trajectory, seq.ground_truth, threshold);
  const SuccessSummary summary = auc_success(trajectory, seq.ground_truth);
  out << std::fixed << std::setprecision(2) << "OP(" << threshold << ") = " << op << " %\n"
      << "AUC = " << 100.0 * summary.auc << " %\n";
  if (!curve_path.empty()) {
    std::ofstream csv(curve_path);
    if (!csv) fail(ErrorKind::io_error, "cannot write " + curve_path);
    csv << "threshold,op_percent\n";
    for (int k = 0; k < SuccessCurve::kPoints; ++k) {
      csv << format_number(summary.curve.thresholds[k]) << ',' << format_number(summary.curve.op_percent[k]) << '\n';
    }
  }
}

inline void run_synth(const std::string& kind, int frames, std::uint64_t seed, const std::filesystem::path& dir,
                      std::ostream& out) {
  const SyntheticKind k = kind == "zoom" ? SyntheticKind::zoom : SyntheticKind::translate;
  const SyntheticSequence seq = gen_synthetic(k, frames, seed);
  std::filesystem::create_directories(dir / "img");
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu.png", i + 1);
    write_frame(dir / "img" / name, seq.frames[i]);
  }
  save_rects(dir / "groundtruth_rect.txt", seq.ground_truth, true);
  out << "wrote " << seq.frames.size() << " frames to " << dir.string() << '\n';
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-feature spatially regularized correlation filter tracker"};
  app.require_subcommand(1);

  std::string sequence, config, out_file, features;
  auto* track = app.add_subcommand("track", "Track the target through an OTB-style sequence");
  track->add_option("--sequence", sequence, "Sequence directory (img/ + groundtruth_rect.txt)")->required();
  track->add_option("--config", config, "Tracker config file");
  track->add_option("--out", out_file, "Trajectory output file")->required();
  track->add_option("--features", features, "Comma-separated features: hog,cn,gray,external:PATH");

  std::string results, curve;
  double threshold = 0.5;
  auto* eval = app.add_subcommand("eval", "Score a trajectory against ground truth");
  eval->add_option("--results", results, "Trajectory file")->required();
  eval->add_option("--sequence", sequence, "Sequence directory")->required();
  eval->add_option("--op-threshold", threshold, "Overlap threshold for OP");
  eval->add_option("--curve", curve, "Success-curve CSV output");

  std::string kind = "translate";
  int frames = 60;
  std::uint64_t seed = 1;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "Render a synthetic sequence");
  synth->add_option("--kind", kind, "translate or zoom")->check(CLI::IsMember({"translate", "zoom"}));
  synth->add_option("--frames", frames, "Frame count")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*track) detail::run_track(sequence, config, out_file, features, out);
    if (*eval) detail::run_eval(results, sequence, threshold, curve, out);
    if (*synth) detail::run_synth(kind, frames, seed, out_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::usage || e.kind() == ErrorKind::empty_feature_list ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace fusetrack
