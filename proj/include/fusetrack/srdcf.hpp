#pragma once

// Spatially regularized discriminative correlation filter.
//
// Learning minimizes, over a real multi-channel filter f,
//
//   eps(f) = sum_k a_k || sum_l x_k^l (*) f^l - y_k ||^2 + sum_l || w . f^l ||^2
//
// with (*) circular convolution and a_k exponentially decaying sample weights.
// With the unnormalized DFT, Parseval turns this into
//
//   eps = (1/MN) [ F^H A F - 2 Re(F^H b) + sum_k a_k ||y_k^||^2 ]
//   (A F)^l = sum_l' D^{l l'} . F^l' + DFT(w^2 . IDFT(F^l)),   b^l = sum_k a_k conj(x_k^l^) . y_k^
//
// where D^{l l'} = sum_k a_k conj(x_k^l^) . x_k^l'^ is the per-frequency
// channel autocorrelation kept by TrainingMemory. The regularizer couples all
// frequencies (it is a convolution with the spectrum of w^2); its action is
// evaluated through the convolution theorem. A F = b is solved with
// diagonally preconditioned conjugate gradient.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "fusetrack/feature_map.hpp"
#include "fusetrack/spectral.hpp"

namespace fusetrack {

struct CellPos {
  double row = 0.0;
  double col = 0.0;
};

// Target extent in feature cells.
struct CellExtent {
  double rows = 1.0;
  double cols = 1.0;
};

struct LabelParams {
  double sigma_factor = 1.0 / 16.0;
};

// Gaussian label peaked (value 1) at `center`, using circular offsets.
// sigma = sigma_factor * sqrt(target rows * target cols).
inline RealGrid make_labels(int rows, int cols, CellPos center, CellExtent target, LabelParams params = {}) {
  if (!(params.sigma_factor > 0.0)) fail(ErrorKind::invalid_argument, "sigma_factor must be positive");
  const double sigma = params.sigma_factor * std::sqrt(target.rows * target.cols);
  RealGrid y(rows, cols);
  for (int m = 0; m < rows; ++m) {
    double dm = m - center.row;
    dm -= rows * std::round(dm / rows);
    for (int n = 0; n < cols; ++n) {
      double dn = n - center.col;
      dn -= cols * std::round(dn / cols);
      y(m, n) = std::exp(-(dm * dm + dn * dn) / (2.0 * sigma * sigma));
    }
  }
  return y;
}

struct RegWeight {
  RealGrid w;
  double mu_min = 0.1;
  double eta = 3.0;
};

// Sample center in cell coordinates, where labels peak. It is a whole cell for
// even sizes and maps to pixel index side/2 after interpolation whatever the stride.
inline CellPos center_cell(int rows, int cols) { return {0.5 * rows, 0.5 * cols}; }

// Quadratic penalty bowl over filter coefficients: mu_min at the filter origin,
// mu_min + eta at half the target extent, using circular offsets. Under
// convolution the coefficients at small offsets are the ones that read the
// target when the label peaks on it.
inline RegWeight make_reg_weight(int rows, int cols, CellExtent target, double mu_min = 0.1, double eta = 3.0) {
  if (!(mu_min > 0.0) || !(eta >= 0.0)) fail(ErrorKind::invalid_argument, "need mu_min > 0 and eta >= 0");
  if (!(target.rows > 0.0) || !(target.cols > 0.0)) fail(ErrorKind::invalid_argument, "target extent must be positive");
  RegWeight reg{RealGrid(rows, cols), mu_min, eta};
  for (int m = 0; m < rows; ++m) {
    const double a = (m <= rows / 2 ? m : m - rows) / (0.5 * target.rows);
    for (int n = 0; n < cols; ++n) {
      const double b = (n <= cols / 2 ? n : n - cols) / (0.5 * target.cols);
      reg.w(m, n) = mu_min + eta * (a * a + b * b);
    }
  }
  return reg;
}

struct FeatureDescriptor {
  int channels = 0;
  int height = 0;
  int width = 0;
  int stride = 1;

  static FeatureDescriptor of(const FeatureMap& x) { return {x.channels, x.height, x.width, x.stride}; }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }
  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

// One Fourier-domain filter channel per feature channel.
struct Filter {
  FeatureDescriptor desc;
  std::vector<Spectrum> coeffs;

  static Filter zero(const FeatureDescriptor& d) {
    return {d, std::vector<Spectrum>(d.channels, Spectrum(d.height, d.width))};
  }

  static Filter from_spatial(const std::vector<RealGrid>& channels, int stride = 1) {
    if (channels.empty()) fail(ErrorKind::invalid_argument, "filter needs at least one channel");
    Filter f{{static_cast<int>(channels.size()), channels[0].height(), channels[0].width(), stride}, {}};
    for (const auto& c : channels) {
      if (!c.same_shape(channels[0])) fail(ErrorKind::dimension_mismatch, "filter channels differ in size");
      f.coeffs.push_back(dft2(c));
    }
    return f;
  }

  RealGrid spatial(int l) const { return idft2(coeffs[l]); }
};

namespace detail {

inline std::vector<Spectrum> channel_spectra(const FeatureMap& x) {
  std::vector<Spectrum> out;
  out.reserve(x.channels);
  for (int l = 0; l < x.channels; ++l) out.push_back(dft2(x.channel_grid(l)));
  return out;
}

}  // namespace detail

// Exponentially weighted Fourier-domain sufficient statistics of the training
// set. The first update takes the sample with weight 1; every later update
// blends old and new as (1 - rate) * old + rate * sample, so the implied sample
// weights stay normalized.
class TrainingMemory {
 public:
  TrainingMemory(FeatureDescriptor desc, double learning_rate) : desc_(desc), rate_(learning_rate) {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail(ErrorKind::invalid_argument, "learning rate in (0,1]");
    const int d = desc_.channels;
    pairs_ = static_cast<std::size_t>(d) * (d + 1) / 2;
    pair_index_.assign(static_cast<std::size_t>(d) * d, 0);
    std::size_t k = 0;
    for (int l = 0; l < d; ++l) {
      for (int lp = l; lp < d; ++lp) {
        pair_index_[l * d + lp] = k;
        pair_index_[lp * d + l] = k;
        ++k;
      }
    }
    autocorr_.assign(pairs_ * desc_.plane_size(), Complex{});
    cross_.assign(static_cast<std::size_t>(d) * desc_.plane_size(), Complex{});
  }

  const FeatureDescriptor& descriptor() const noexcept { return desc_; }
  double learning_rate() const noexcept { return rate_; }
  int updates() const noexcept { return updates_; }
  double weight_total() const noexcept { return weight_total_; }
  double label_energy() const noexcept { return label_energy_; }

  // Effective weight of each sample seen so far, oldest first.
  std::vector<double> sample_weights() const {
    std::vector<double> a(updates_);
    for (int k = 0; k < updates_; ++k) {
      const double decay = std::pow(1.0 - rate_, updates_ - 1 - k);
      a[k] = (k == 0 ? 1.0 : rate_) * decay;
    }
    return a;
  }

  // sum_k a_k conj(x_k^l) x_k^l' at flat frequency index q.
  Complex autocorr(int l, int lp, std::size_t q) const {
    const Complex v = autocorr_[q * pairs_ + pair_index_[l * desc_.channels + lp]];
    return l <= lp ? v : std::conj(v);
  }

  // sum_k a_k conj(x_k^l) y_k at flat frequency index q.
  Complex cross(int l, std::size_t q) const { return cross_[l * desc_.plane_size() + q]; }

  void update(const FeatureMap& x, const RealGrid& y) {
    if (FeatureDescriptor::of(x) != desc_) fail(ErrorKind::dimension_mismatch, "sample does not match memory layout");
    if (y.height() != desc_.height || y.width() != desc_.width) {
      fail(ErrorKind::dimension_mismatch, "label does not match sample size");
    }
    const auto xs = detail::channel_spectra(x);
    const Spectrum ys = dft2(y);
    const double keep = updates_ == 0 ? 0.0 : 1.0 - rate_;
    const double take = updates_ == 0 ? 1.0 : rate_;
    const int d = desc_.channels;
    const std::size_t P = desc_.plane_size();
    for (std::size_t q = 0; q < P; ++q) {
      Complex* row = autocorr_.data() + q * pairs_;
      std::size_t k = 0;
      for (int l = 0; l < d; ++l) {
        const Complex xl = std::conj(xs[l][q]);
        for (int lp = l; lp < d; ++lp, ++k) row[k] = keep * row[k] + take * (xl * xs[lp][q]);
      }
    }
    for (int l = 0; l < d; ++l) {
      for (std::size_t q = 0; q < P; ++q) {
        Complex& c = cross_[l * P + q];
        c = keep * c + take * (std::conj(xs[l][q]) * ys[q]);
      }
    }
    double energy = 0.0;
    for (const auto& v : ys.values()) energy += std::norm(v);
    label_energy_ = keep * label_energy_ + take * energy;
    weight_total_ = keep * weight_total_ + take;
    ++updates_;
  }

  bool all_finite() const {
    auto finite = [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); };
    return std::all_of(autocorr_.begin(), autocorr_.end(), finite) && std::all_of(cross_.begin(), cross_.end(), finite) &&
           std::isfinite(label_energy_);
  }

  // Applies the data part of the normal operator: out^l = sum_l' D^{l l'} . in^l'.
  void apply_autocorr(std::span<const Complex> in, std::span<Complex> out) const {
    const int d = desc_.channels;
    const std::size_t P = desc_.plane_size();
    for (std::size_t q = 0; q < P; ++q) {
      const Complex* row = autocorr_.data() + q * pairs_;
      for (int l = 0; l < d; ++l) {
        Complex acc{};
        for (int lp = 0; lp < d; ++lp) {
          const Complex v = row[pair_index_[l * d + lp]];
          acc += (l <= lp ? v : std::conj(v)) * in[lp * P + q];
        }
        out[l * P + q] = acc;
      }
    }
  }

 private:
  FeatureDescriptor desc_;
  double rate_;
  std::size_t pairs_ = 0;
  std::vector<std::size_t> pair_index_;
  std::vector<Complex> autocorr_;  // [frequency][upper-triangular channel pair]
  std::vector<Complex> cross_;     // [channel][frequency]
  double label_energy_ = 0.0;
  double weight_total_ = 0.0;
  int updates_ = 0;
};

inline TrainingMemory update_memory(TrainingMemory mem, const FeatureMap& x, const RealGrid& y) {
  mem.update(x, y);
  return mem;
}

struct SolverOptions {
  int iterations = 50;
  double tolerance = 1e-6;
};

struct SolveResult {
  Filter filter;
  int iterations = 0;
  double relative_residual = 0.0;
};

namespace detail {

using CVec = std::vector<Complex>;

inline double dot_re(std::span<const Complex> a, std::span<const Complex> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

class NormalOperator {
 public:
  NormalOperator(const TrainingMemory& mem, const RegWeight& reg) : mem_(mem), w2_(reg.w) {
    const auto& d = mem.descriptor();
    if (reg.w.height() != d.height || reg.w.width() != d.width) {
      fail(ErrorKind::dimension_mismatch, "regularization weight does not match filter size");
    }
    for (auto& v : w2_.values()) v *= v;
  }

  void apply(std::span<const Complex> in, std::span<Complex> out) const {
    mem_.apply_autocorr(in, out);
    const auto& d = mem_.descriptor();
    const std::size_t P = d.plane_size();
    Grid<Complex> buf(d.height, d.width);
    for (int l = 0; l < d.channels; ++l) {
      std::copy_n(in.begin() + l * P, P, buf.values().begin());
      detail::fft2_inplace(buf.values(), d.height, d.width, true);
      const double inv = 1.0 / static_cast<double>(P);
      for (std::size_t q = 0; q < P; ++q) buf[q] *= w2_[q] * inv;
      detail::fft2_inplace(buf.values(), d.height, d.width, false);
      for (std::size_t q = 0; q < P; ++q) out[l * P + q] += buf[q];
    }
  }

  // Diagonal of A: the autocorrelation diagonal plus the mean of w^2.
  CVec diagonal_inverse() const {
    const auto& d = mem_.descriptor();
    const std::size_t P = d.plane_size();
    double mean_w2 = 0.0;
    for (double v : w2_.values()) mean_w2 += v;
    mean_w2 /= static_cast<double>(P);
    CVec inv(static_cast<std::size_t>(d.channels) * P);
    for (int l = 0; l < d.channels; ++l) {
      for (std::size_t q = 0; q < P; ++q) inv[l * P + q] = 1.0 / (mem_.autocorr(l, l, q).real() + mean_w2);
    }
    return inv;
  }

  CVec rhs() const {
    const auto& d = mem_.descriptor();
    const std::size_t P = d.plane_size();
    CVec b(static_cast<std::size_t>(d.channels) * P);
    for (int l = 0; l < d.channels; ++l) {
      for (std::size_t q = 0; q < P; ++q) b[l * P + q] = mem_.cross(l, q);
    }
    return b;
  }

 private:
  const TrainingMemory& mem_;
  RealGrid w2_;
};

inline CVec flatten(const Filter& f) {
  const std::size_t P = f.desc.plane_size();
  CVec v(static_cast<std::size_t>(f.desc.channels) * P);
  for (int l = 0; l < f.desc.channels; ++l) std::copy(f.coeffs[l].values().begin(), f.coeffs[l].values().end(), v.begin() + l * P);
  return v;
}

inline Filter unflatten(std::span<const Complex> v, const FeatureDescriptor& desc) {
  Filter f = Filter::zero(desc);
  const std::size_t P = desc.plane_size();
  for (int l = 0; l < desc.channels; ++l) std::copy_n(v.begin() + l * P, P, f.coeffs[l].values().begin());
  return f;
}

}  // namespace detail

using SolverObserver = std::function<void(int iteration, const Filter& current)>;

// Preconditioned conjugate gradient on the Fourier-domain normal equations.
// Starts from `warm_start` when its layout matches; stops after
// `options.iterations` steps or once ||r|| / ||b|| <= options.tolerance.
inline SolveResult solve_filter_detailed(const TrainingMemory& mem, const RegWeight& reg, const SolverOptions& options,
                                         const Filter* warm_start = nullptr, const SolverObserver& observer = {}) {
  if (mem.updates() < 1) fail(ErrorKind::invalid_argument, "training memory is empty");
  if (options.iterations < 1) fail(ErrorKind::invalid_argument, "solver needs at least one iteration");
  if (!mem.all_finite()) fail(ErrorKind::non_finite, "training accumulators contain non-finite values");
  const auto& desc = mem.descriptor();
  const detail::NormalOperator A(mem, reg);
  const detail::CVec b = A.rhs();
  const detail::CVec pinv = A.diagonal_inverse();
  const std::size_t n = b.size();

  detail::CVec x = (warm_start != nullptr && warm_start->desc == desc) ? detail::flatten(*warm_start) : detail::CVec(n);
  detail::CVec r(n), z(n), p(n), Ap(n);
  A.apply(x, Ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  const double b_norm = std::sqrt(detail::dot_re(b, b));
  auto relative = [&](const detail::CVec& res) {
    const double rn = std::sqrt(detail::dot_re(res, res));
    return b_norm > 0.0 ? rn / b_norm : rn;
  };

  SolveResult result{{}, 0, relative(r)};
  if (result.relative_residual > options.tolerance) {
    for (std::size_t i = 0; i < n; ++i) z[i] = pinv[i] * r[i];
    p = z;
    double rz = detail::dot_re(r, z);
    for (int it = 1; it <= options.iterations; ++it) {
      A.apply(p, Ap);
      const double pAp = detail::dot_re(p, Ap);
      if (!(pAp > 0.0)) break;
      const double alpha = rz / pAp;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      result.iterations = it;
      result.relative_residual = relative(r);
      if (observer) observer(it, detail::unflatten(x, desc));
      if (result.relative_residual <= options.tolerance) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = pinv[i] * r[i];
      const double rz_next = detail::dot_re(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
  }
  result.filter = detail::unflatten(x, desc);
  for (auto& c : result.filter.coeffs) symmetrize(c);
  return result;
}

inline Filter solve_filter(const TrainingMemory& mem, const RegWeight& reg, const SolverOptions& options,
                           const Filter* warm_start = nullptr) {
  return solve_filter_detailed(mem, reg, options, warm_start).filter;
}

// Confidence spectrum sum_l z^l^ . f^l^ (kept in the Fourier domain for fusion).
inline Spectrum apply_filter(const Filter& f, const std::vector<Spectrum>& z_spectra) {
  if (static_cast<int>(z_spectra.size()) != f.desc.channels) fail(ErrorKind::dimension_mismatch, "channel count differs");
  Spectrum out(f.desc.height, f.desc.width);
  for (int l = 0; l < f.desc.channels; ++l) {
    if (z_spectra[l].height() != f.desc.height || z_spectra[l].width() != f.desc.width) {
      fail(ErrorKind::dimension_mismatch, "sample size differs from filter size");
    }
    for (std::size_t q = 0; q < out.size(); ++q) out[q] += z_spectra[l][q] * f.coeffs[l][q];
  }
  return out;
}

inline Spectrum apply_filter(const Filter& f, const FeatureMap& z) {
  if (z.channels != f.desc.channels || z.height != f.desc.height || z.width != f.desc.width) {
    fail(ErrorKind::dimension_mismatch, "sample does not match filter layout");
  }
  return apply_filter(f, detail::channel_spectra(z));
}

struct WeightedSample {
  FeatureMap x;
  RealGrid y;
  double weight = 1.0;
};

// Spatial-domain objective: weighted squared confidence error plus the
// penalty-weighted filter energy, with convolutions done by direct summation.
inline double objective_value(const Filter& f, std::span<const WeightedSample> samples, const RegWeight& reg) {
  const int d = f.desc.channels;
  std::vector<RealGrid> spatial;
  for (int l = 0; l < d; ++l) spatial.push_back(f.spatial(l));
  if (!reg.w.same_shape(spatial[0])) fail(ErrorKind::dimension_mismatch, "regularizer size differs from filter");
  double total = 0.0;
  for (const auto& s : samples) {
    if (s.x.channels != d || s.x.height != f.desc.height || s.x.width != f.desc.width || !s.y.same_shape(spatial[0])) {
      fail(ErrorKind::dimension_mismatch, "sample does not match filter layout");
    }
    if (s.weight < 0.0) fail(ErrorKind::invalid_argument, "sample weights must be non-negative");
    RealGrid score(f.desc.height, f.desc.width);
    for (int l = 0; l < d; ++l) {
      const RealGrid c = circ_conv_ref(s.x.channel_grid(l), spatial[l]);
      for (std::size_t i = 0; i < c.size(); ++i) score[i] += c[i];
    }
    double err = 0.0;
    for (std::size_t i = 0; i < score.size(); ++i) err += (score[i] - s.y[i]) * (score[i] - s.y[i]);
    total += s.weight * err;
  }
  for (int l = 0; l < d; ++l) {
    for (std::size_t i = 0; i < reg.w.size(); ++i) total += reg.w[i] * reg.w[i] * spatial[l][i] * spatial[l][i];
  }
  return total;
}

// The same objective evaluated from the Fourier-domain accumulators, as the solver sees it.
inline double fourier_objective(const TrainingMemory& mem, const Filter& f, const RegWeight& reg) {
  if (f.desc.channels != mem.descriptor().channels || f.desc.height != mem.descriptor().height ||
      f.desc.width != mem.descriptor().width) {
    fail(ErrorKind::dimension_mismatch, "filter does not match memory layout");
  }
  const detail::NormalOperator A(mem, reg);
  const detail::CVec x = detail::flatten(f);
  detail::CVec Ax(x.size());
  A.apply(x, Ax);
  const detail::CVec b = A.rhs();
  const double value = detail::dot_re(x, Ax) - 2.0 * detail::dot_re(x, b) + mem.label_energy();
  return value / static_cast<double>(mem.descriptor().plane_size());
}

}  // namespace fusetrack
