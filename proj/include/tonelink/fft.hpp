// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>
#include <span>

namespace tonelink {

/// Allocator giving 64-byte aligned storage, so FFT buffers take the SIMD path.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Real-input FFT of a fixed size. Plans are built once and shared; execute
/// calls are safe from multiple threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// in: n samples; out: n/2+1 bins.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Unnormalized inverse (scaled by n). in: n/2+1 bins; out: n samples.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;
  /// As inverse(), but may overwrite `in`. Faster for scratch spectra.
  void inverse_inplace(std::span<std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
  void* destructive_plan_;
};

/// Single-precision real FFT for throughput-bound correlation. Buffers must be
/// allocated with AlignedAllocator.
class RealFftF {
 public:
  explicit RealFftF(std::size_t n);
  ~RealFftF();
  RealFftF(const RealFftF&) = delete;
  RealFftF& operator=(const RealFftF&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  void forward(std::span<const float> in, std::span<std::complex<float>> out) const;
  /// Unnormalized inverse that may overwrite `in`.
  void inverse_inplace(std::span<std::complex<float>> in, std::span<float> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

const RealFftF& real_fft_f(std::size_t n);

/// Process-wide plan cache keyed on size.
const RealFft& real_fft(std::size_t n);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

}  // namespace tonelink
