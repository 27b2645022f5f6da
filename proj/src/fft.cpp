// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace tonelink {

namespace {
// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool simd_aligned(const void* p) { return fftw_alignment_of(static_cast<double*>(const_cast<void*>(p))) == 0; }

}  // namespace

// Plans assume SIMD-aligned arrays; misaligned callers go through a copy.
RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("FFT size must be >= 2");
  auto* re = fftw_alloc_real(n);
  auto* c = fftw_alloc_complex(n / 2 + 1);
  const int len = static_cast<int>(n);
  {
    std::lock_guard lock(planner_mutex());
    forward_plan_ = fftw_plan_dft_r2c_1d(len, re, c, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_1d(len, c, re, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    destructive_plan_ = fftw_plan_dft_c2r_1d(len, c, re, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  }
  fftw_free(re);
  fftw_free(c);
  if (!forward_plan_ || !inverse_plan_ || !destructive_plan_) throw std::runtime_error("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(destructive_plan_));
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw std::invalid_argument("RealFft::forward size mismatch");
  if (simd_aligned(in.data()) && simd_aligned(out.data())) {
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return;
  }
  AlignedVector<double> a(in.begin(), in.end());
  AlignedVector<std::complex<double>> b(bins());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), a.data(), reinterpret_cast<fftw_complex*>(b.data()));
  std::copy(b.begin(), b.end(), out.begin());
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw std::invalid_argument("RealFft::inverse size mismatch");
  if (simd_aligned(in.data()) && simd_aligned(out.data())) {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                         out.data());
    return;
  }
  AlignedVector<std::complex<double>> a(in.begin(), in.end());
  AlignedVector<double> b(n_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(a.data()), b.data());
  std::copy(b.begin(), b.end(), out.begin());
}

void RealFft::inverse_inplace(std::span<std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw std::invalid_argument("RealFft::inverse size mismatch");
  if (!simd_aligned(in.data()) || !simd_aligned(out.data())) {
    inverse(in, out);
    return;
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(destructive_plan_), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
}

const RealFft& real_fft(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

namespace {
bool simd_aligned_f(const void* p) { return fftwf_alignment_of(static_cast<float*>(const_cast<void*>(p))) == 0; }
}  // namespace

RealFftF::RealFftF(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("FFT size must be >= 2");
  auto* re = fftwf_alloc_real(n);
  auto* c = fftwf_alloc_complex(n / 2 + 1);
  const int len = static_cast<int>(n);
  {
    std::lock_guard lock(planner_mutex());
    forward_plan_ = fftwf_plan_dft_r2c_1d(len, re, c, FFTW_ESTIMATE);
    inverse_plan_ = fftwf_plan_dft_c2r_1d(len, c, re, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  }
  fftwf_free(re);
  fftwf_free(c);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("FFTW planning failed");
}

RealFftF::~RealFftF() {
  std::lock_guard lock(planner_mutex());
  fftwf_destroy_plan(static_cast<fftwf_plan>(forward_plan_));
  fftwf_destroy_plan(static_cast<fftwf_plan>(inverse_plan_));
}

void RealFftF::forward(std::span<const float> in, std::span<std::complex<float>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw std::invalid_argument("RealFftF::forward size mismatch");
  if (!simd_aligned_f(in.data()) || !simd_aligned_f(out.data()))
    throw std::invalid_argument("RealFftF needs aligned buffers");
  fftwf_execute_dft_r2c(static_cast<fftwf_plan>(forward_plan_), const_cast<float*>(in.data()),
                        reinterpret_cast<fftwf_complex*>(out.data()));
}

void RealFftF::inverse_inplace(std::span<std::complex<float>> in, std::span<float> out) const {
  if (in.size() != bins() || out.size() != n_) throw std::invalid_argument("RealFftF::inverse size mismatch");
  if (!simd_aligned_f(in.data()) || !simd_aligned_f(out.data()))
    throw std::invalid_argument("RealFftF needs aligned buffers");
  fftwf_execute_dft_c2r(static_cast<fftwf_plan>(inverse_plan_), reinterpret_cast<fftwf_complex*>(in.data()),
                        out.data());
}

const RealFftF& real_fft_f(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::unique_ptr<RealFftF>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFftF>(n);
  return *slot;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace tonelink
