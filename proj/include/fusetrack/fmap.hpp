#pragma once

// FMAP: little-endian container for externally computed feature maps.
//
//   "FMAP" | u32 version=1 | u32 frame_count | u32 d | u32 M | u32 N | u32 stride
//   frame_count*d*M*N float32, frame-major, then channel-major, then row-major.

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "fusetrack/feature_map.hpp"

namespace fusetrack {

struct FmapHeader {
  std::uint32_t version = 1;
  std::uint32_t frame_count = 0;
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t stride = 1;

  static constexpr std::size_t kBytes = 4 + 6 * 4;

  std::size_t frame_values() const noexcept { return static_cast<std::size_t>(channels) * height * width; }
  std::uintmax_t file_bytes() const noexcept {
    return kBytes + static_cast<std::uintmax_t>(frame_count) * frame_values() * sizeof(float);
  }
};

namespace detail {

inline std::uint32_t read_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void write_le32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

}  // namespace detail

// An opened FMAP file. The header is validated against the file size on open;
// frames are read on demand, so one instance can serve concurrent readers.
class FmapFile {
 public:
  explicit FmapFile(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path_, ec)) fail(ErrorKind::missing_file, "no FMAP file at " + path_.string());
    const auto size = std::filesystem::file_size(path_, ec);
    if (ec) fail(ErrorKind::io_error, "cannot stat " + path_.string());
    std::ifstream in(path_, std::ios::binary);
    if (!in) fail(ErrorKind::io_error, "cannot open " + path_.string());
    std::array<unsigned char, FmapHeader::kBytes> raw{};
    in.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (static_cast<std::size_t>(in.gcount()) < 4 || std::string(raw.begin(), raw.begin() + 4) != "FMAP") {
      fail(ErrorKind::bad_magic, path_.string() + " does not start with FMAP");
    }
    if (static_cast<std::size_t>(in.gcount()) < 8) fail(ErrorKind::truncated_file, path_.string() + ": header cut short");
    header_.version = detail::read_le32(raw.data() + 4);
    if (header_.version != 1) {
      fail(ErrorKind::version_unsupported, path_.string() + ": FMAP version " + std::to_string(header_.version));
    }
    if (static_cast<std::size_t>(in.gcount()) < raw.size()) {
      fail(ErrorKind::truncated_file, path_.string() + ": header cut short");
    }
    header_.frame_count = detail::read_le32(raw.data() + 8);
    header_.channels = detail::read_le32(raw.data() + 12);
    header_.height = detail::read_le32(raw.data() + 16);
    header_.width = detail::read_le32(raw.data() + 20);
    header_.stride = detail::read_le32(raw.data() + 24);
    if (header_.channels == 0 || header_.height == 0 || header_.width == 0 || header_.stride == 0) {
      fail(ErrorKind::invalid_argument, path_.string() + ": FMAP dimensions must be positive");
    }
    if (size < header_.file_bytes()) {
      fail(ErrorKind::truncated_file, path_.string() + ": " + std::to_string(size) + " bytes, header promises " +
                                          std::to_string(header_.file_bytes()));
    }
  }

  const FmapHeader& header() const noexcept { return header_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  FeatureMap read(std::size_t frame_index) const {
    if (frame_index >= header_.frame_count) {
      fail(ErrorKind::index_out_of_range, "frame " + std::to_string(frame_index) + " of " +
                                              std::to_string(header_.frame_count) + " in " + path_.string());
    }
    const std::size_t count = header_.frame_values();
    std::ifstream in(path_, std::ios::binary);
    if (!in) fail(ErrorKind::io_error, "cannot open " + path_.string());
    in.seekg(static_cast<std::streamoff>(FmapHeader::kBytes + frame_index * count * sizeof(float)));
    std::vector<unsigned char> bytes(count * sizeof(float));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
      fail(ErrorKind::truncated_file, path_.string() + ": payload ended early");
    }
    FeatureMap map(static_cast<int>(header_.channels), static_cast<int>(header_.height),
                   static_cast<int>(header_.width), static_cast<int>(header_.stride));
    for (std::size_t i = 0; i < count; ++i) {
      map.values[i] = static_cast<double>(std::bit_cast<float>(detail::read_le32(bytes.data() + 4 * i)));
    }
    if (!map.all_finite()) fail(ErrorKind::non_finite, path_.string() + ": non-finite activation");
    return map;
  }

 private:
  std::filesystem::path path_;
  FmapHeader header_;
};

inline FeatureMap load_fmap(const std::filesystem::path& path, std::size_t frame_index) {
  return FmapFile(path).read(frame_index);
}

// All frames must share (d, M, N, stride). Values are stored as float32.
inline void write_fmap(const std::filesystem::path& path, std::span<const FeatureMap> frames) {
  if (frames.empty()) fail(ErrorKind::invalid_argument, "an FMAP file needs at least one frame");
  const FeatureMap& first = frames.front();
  for (const auto& f : frames) {
    if (f.channels != first.channels || f.height != first.height || f.width != first.width || f.stride != first.stride) {
      fail(ErrorKind::dimension_mismatch, "FMAP frames must share one shape");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io_error, "cannot write " + path.string());
  out.write("FMAP", 4);
  detail::write_le32(out, 1);
  detail::write_le32(out, static_cast<std::uint32_t>(frames.size()));
  detail::write_le32(out, static_cast<std::uint32_t>(first.channels));
  detail::write_le32(out, static_cast<std::uint32_t>(first.height));
  detail::write_le32(out, static_cast<std::uint32_t>(first.width));
  detail::write_le32(out, static_cast<std::uint32_t>(first.stride));
  for (const auto& f : frames) {
    for (double v : f.values) detail::write_le32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) fail(ErrorKind::io_error, "short write to " + path.string());
}

}  // namespace fusetrack
