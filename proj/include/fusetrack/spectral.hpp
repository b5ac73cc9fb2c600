#pragma once

// Two-dimensional DFT utilities and the zero-padding interpolation operator.
//
// Convention: the forward transform is unnormalized (coefficient (0,0) is the
// sum of the spatial values) and the inverse carries the 1/(M*N) factor.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "fusetrack/grid.hpp"

namespace fusetrack {

namespace detail {

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer make_fftw_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

// FFTW planning is not thread-safe, execution with new-array is. Plans are
// made once per (height, width, direction) on aligned scratch and reused.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int height, int width, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(height, width, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto scratch = make_fftw_buffer(static_cast<std::size_t>(height) * width);
    fftw_plan plan = fftw_plan_dft_2d(height, width, scratch.get(), scratch.get(), sign, FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// Unnormalized in-place transform of a row-major complex array.
inline void fft2_inplace(std::span<Complex> data, int height, int width, bool inverse) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (data.size() != n) fail(ErrorKind::dimension_mismatch, "fft buffer size");
  fftw_plan plan = PlanCache::instance().get(height, width, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  auto buffer = make_fftw_buffer(n);
  std::memcpy(buffer.get(), data.data(), n * sizeof(fftw_complex));
  fftw_execute_dft(plan, buffer.get(), buffer.get());
  std::memcpy(data.data(), buffer.get(), n * sizeof(fftw_complex));
}

}  // namespace detail

// Forward transform of an arbitrary complex grid (unnormalized).
inline Spectrum fft2(Grid<Complex> g) {
  detail::fft2_inplace(g.values(), g.height(), g.width(), false);
  return g;
}

// Inverse transform with 1/(MN) normalization, keeping the complex result.
inline Grid<Complex> ifft2(Spectrum s) {
  detail::fft2_inplace(s.values(), s.height(), s.width(), true);
  const double scale = 1.0 / static_cast<double>(s.size());
  for (auto& v : s.values()) v *= scale;
  return s;
}

inline Spectrum dft2(const RealGrid& g) {
  Grid<Complex> c(g.height(), g.width());
  for (std::size_t i = 0; i < g.size(); ++i) c[i] = g[i];
  return fft2(std::move(c));
}

// Largest |S(u,v) - conj(S(-u,-v))| relative to the largest coefficient magnitude.
inline double conjugate_symmetry_error(const Spectrum& s) {
  double peak = 0.0;
  for (const auto& v : s.values()) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  const int M = s.height();
  const int N = s.width();
  double worst = 0.0;
  for (int u = 0; u < M; ++u) {
    for (int v = 0; v < N; ++v) {
      const Complex mirror = std::conj(s(wrap_index(-u, M), wrap_index(-v, N)));
      worst = std::max(worst, std::abs(s(u, v) - mirror));
    }
  }
  return worst / peak;
}

inline constexpr double kSymmetryTolerance = 1e-9;

inline RealGrid idft2(const Spectrum& s) {
  if (conjugate_symmetry_error(s) > kSymmetryTolerance) {
    fail(ErrorKind::asymmetric_spectrum, "spectrum is not the transform of a real grid");
  }
  const Grid<Complex> c = ifft2(s);
  RealGrid out(s.height(), s.width());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

// Replace S by the conjugate-symmetric part (S + conj(S(-u,-v))) / 2.
inline void symmetrize(Spectrum& s) {
  const int M = s.height();
  const int N = s.width();
  Spectrum copy = s;
  for (int u = 0; u < M; ++u) {
    for (int v = 0; v < N; ++v) {
      s(u, v) = 0.5 * (copy(u, v) + std::conj(copy(wrap_index(-u, M), wrap_index(-v, N))));
    }
  }
}

// Circular convolution evaluated by the direct double loop.
inline RealGrid circ_conv_ref(const RealGrid& a, const RealGrid& b) {
  if (!a.same_shape(b)) fail(ErrorKind::dimension_mismatch, "circ_conv_ref operands differ in size");
  const int M = a.height();
  const int N = a.width();
  RealGrid out(M, N);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      double acc = 0.0;
      for (int i = 0; i < M; ++i) {
        const int bi = wrap_index(m - i, M);
        for (int j = 0; j < N; ++j) acc += a(i, j) * b(bi, wrap_index(n - j, N));
      }
      out(m, n) = acc;
    }
  }
  return out;
}

namespace detail {

struct BinTarget {
  int index;
  double weight;
};

// Where each source frequency bin lands after padding one axis from `from` to `to`.
inline std::vector<std::vector<BinTarget>> pad_axis_map(int from, int to) {
  std::vector<std::vector<BinTarget>> map(from);
  for (int k = 0; k < from; ++k) {
    if (to == from) {
      map[k] = {{k, 1.0}};
    } else if (2 * k < from) {
      map[k] = {{k, 1.0}};
    } else if (2 * k == from) {
      // Nyquist bin of an even-length axis: split between +from/2 and -from/2.
      map[k] = {{k, 0.5}, {to - k, 0.5}};
    } else {
      map[k] = {{k + (to - from), 1.0}};
    }
  }
  return map;
}

}  // namespace detail

// Pads the spectrum to rows x cols by inserting zeros at the high frequencies
// and rescales so the inverse transform samples the same trigonometric
// interpolant on the finer grid.
inline Spectrum zero_pad_interp(const Spectrum& s, int rows, int cols) {
  const int M = s.height();
  const int N = s.width();
  if (rows < M || cols < N) fail(ErrorKind::shrink_not_allowed, "target size smaller than source spectrum");
  if (rows == M && cols == N) return s;
  const double scale = static_cast<double>(rows) * cols / (static_cast<double>(M) * N);
  const auto row_map = detail::pad_axis_map(M, rows);
  const auto col_map = detail::pad_axis_map(N, cols);
  Spectrum out(rows, cols);
  for (int u = 0; u < M; ++u) {
    for (int v = 0; v < N; ++v) {
      const Complex c = s(u, v) * scale;
      for (const auto& ru : row_map[u]) {
        for (const auto& cv : col_map[v]) out(ru.index, cv.index) += c * (ru.weight * cv.weight);
      }
    }
  }
  return out;
}

}  // namespace fusetrack
