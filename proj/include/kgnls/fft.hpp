#pragma once

// Thin FFTW wrapper: unnormalized complex-to-complex transforms with a
// process-wide plan cache.
//
//   forward:  X_m = sum_j x_j e^{-2 pi i j m / n}
//   backward: x_j = sum_m X_m e^{+2 pi i j m / n}
//
// Callers apply the 1/n (or grid-specific) normalization. Plans are created
// in-place with FFTW_UNALIGNED so fftw_execute_dft can run on any buffer;
// planning is serialized by a mutex, execution is reentrant.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace kgnls::fft {

using cplx = std::complex<double>;

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
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
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void execute_inplace(std::vector<cplx>& data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = PlanCache::instance().get(data.size(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace detail

inline void forward_inplace(std::vector<cplx>& data) {
  detail::execute_inplace(data, FFTW_FORWARD);
}

inline void backward_inplace(std::vector<cplx>& data) {
  detail::execute_inplace(data, FFTW_BACKWARD);
}

inline std::vector<cplx> forward(std::span<const cplx> in) {
  std::vector<cplx> out(in.begin(), in.end());
  forward_inplace(out);
  return out;
}

inline std::vector<cplx> backward(std::span<const cplx> in) {
  std::vector<cplx> out(in.begin(), in.end());
  backward_inplace(out);
  return out;
}

/// Signed frequency index of FFT bin m for a length-n transform; the Nyquist
/// bin of an even transform maps to -n/2.
inline long signed_index(std::size_t m, std::size_t n) {
  const long mm = static_cast<long>(m);
  const long nn = static_cast<long>(n);
  return (2 * mm < nn) ? mm : mm - nn;
}

/// Zero-pad a spectrum of length n to length m >= n, keeping signed indices
/// |j| < n/2. The Nyquist bin is dropped.
inline std::vector<cplx> pad_spectrum(std::span<const cplx> spec, std::size_t m) {
  const std::size_t n = spec.size();
  std::vector<cplx> out(m, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const long j = signed_index(k, n);
    if (2 * std::abs(j) >= static_cast<long>(n)) continue;
    const std::size_t dst = j >= 0 ? static_cast<std::size_t>(j)
                                   : static_cast<std::size_t>(static_cast<long>(m) + j);
    out[dst] = spec[k];
  }
  return out;
}

/// Inverse of pad_spectrum: keep signed indices |j| < n/2 of a length-m spectrum.
inline std::vector<cplx> truncate_spectrum(std::span<const cplx> spec, std::size_t n) {
  const std::size_t m = spec.size();
  std::vector<cplx> out(n, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const long j = signed_index(k, n);
    if (2 * std::abs(j) >= static_cast<long>(n)) continue;
    const std::size_t src = j >= 0 ? static_cast<std::size_t>(j)
                                   : static_cast<std::size_t>(static_cast<long>(m) + j);
    out[k] = spec[src];
  }
  return out;
}

}  // namespace kgnls::fft
