#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace stase::fft {

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using AlignedPtr = std::unique_ptr<T[], FftwFree>;

template <typename T>
AlignedPtr<T> aligned_alloc(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw std::bad_alloc();
  return AlignedPtr<T>(p);
}

// Real-to-complex / complex-to-real plan pair for one transform size.
// Plans are created once under the planner lock and then only executed
// through the new-array interface, which FFTW documents as thread-safe.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline const PlanPair& plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto in = aligned_alloc<double>(n);
  auto out = aligned_alloc<fftw_complex>(n / 2 + 1);
  PlanPair p;
  const int size = static_cast<int>(n);
  p.forward = fftw_plan_dft_r2c_1d(size, in.get(), out.get(), FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(size, out.get(), in.get(), FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

}  // namespace detail

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Full linear convolution (length N+M-1) by FFT overlap-add.
/// Returns an empty vector when either input is empty.
inline std::vector<double> convolve_overlap_add(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t n = x.size();
  const std::size_t m = h.size();
  const std::size_t block_hint = std::min(n, std::max<std::size_t>(m, 4096));
  const std::size_t nfft = next_pow2(std::max<std::size_t>(m + block_hint - 1, 32));
  const std::size_t block = nfft - m + 1;
  const std::size_t bins = nfft / 2 + 1;
  const auto& plans = detail::plans_for(nfft);

  auto time = detail::aligned_alloc<double>(nfft);
  auto ir_spec = detail::aligned_alloc<fftw_complex>(bins);
  auto spec = detail::aligned_alloc<fftw_complex>(bins);

  std::fill_n(time.get(), nfft, 0.0);
  std::copy(h.begin(), h.end(), time.get());
  fftw_execute_dft_r2c(plans.forward, time.get(), ir_spec.get());

  std::vector<double> y(n + m - 1, 0.0);
  const double scale = 1.0 / static_cast<double>(nfft);
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    std::fill_n(time.get(), nfft, 0.0);
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), len, time.get());
    fftw_execute_dft_r2c(plans.forward, time.get(), spec.get());
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = spec[k][0] * ir_spec[k][0] - spec[k][1] * ir_spec[k][1];
      const double im = spec[k][0] * ir_spec[k][1] + spec[k][1] * ir_spec[k][0];
      spec[k][0] = re;
      spec[k][1] = im;
    }
    fftw_execute_dft_c2r(plans.inverse, spec.get(), time.get());
    const std::size_t out_len = std::min(len + m - 1, y.size() - start);
    for (std::size_t i = 0; i < out_len; ++i) y[start + i] += time[i] * scale;
  }
  return y;
}

}  // namespace stase::fft
