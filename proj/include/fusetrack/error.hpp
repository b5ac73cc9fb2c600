#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fusetrack {

// Every failure the library reports carries one of these kinds so callers
// (and the CLI) can react without parsing messages.
enum class ErrorKind {
  dimension_mismatch,
  asymmetric_spectrum,
  shrink_not_allowed,
  invalid_argument,
  empty_frame,
  divisibility,
  missing_table,
  bad_magic,
  version_unsupported,
  truncated_file,
  index_out_of_range,
  non_finite,
  empty_feature_list,
  degenerate_box,
  missing_file,
  inconsistent_region,
  length_mismatch,
  parse_error,
  count_mismatch,
  io_error,
  usage,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::asymmetric_spectrum: return "asymmetric spectrum";
    case ErrorKind::shrink_not_allowed: return "shrink not allowed";
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::empty_frame: return "empty frame";
    case ErrorKind::divisibility: return "divisibility";
    case ErrorKind::missing_table: return "missing table";
    case ErrorKind::bad_magic: return "bad magic";
    case ErrorKind::version_unsupported: return "version unsupported";
    case ErrorKind::truncated_file: return "truncated file";
    case ErrorKind::index_out_of_range: return "index out of range";
    case ErrorKind::non_finite: return "non-finite value";
    case ErrorKind::empty_feature_list: return "empty feature list";
    case ErrorKind::degenerate_box: return "degenerate box";
    case ErrorKind::missing_file: return "missing file";
    case ErrorKind::inconsistent_region: return "inconsistent region";
    case ErrorKind::length_mismatch: return "length mismatch";
    case ErrorKind::parse_error: return "parse error";
    case ErrorKind::count_mismatch: return "count mismatch";
    case ErrorKind::io_error: return "i/o error";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace fusetrack
