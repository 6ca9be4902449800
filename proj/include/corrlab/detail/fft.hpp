#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>

namespace corrlab::detail {

// Unnormalized in-place DFT: sign = -1 computes sum_j f_j exp(-2 pi i jk/N),
// sign = +1 the conjugate kernel. Plans are cached per (size, sign) and always
// executed on fftw-aligned scratch so the chosen codelets never depend on the
// caller's buffer alignment; results are bit-reproducible across calls and threads.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  void execute(std::span<std::complex<double>> data, int sign) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    Buffer buf(n);
    std::memcpy(buf.get(), data.data(), n * sizeof(fftw_complex));
    fftw_plan plan = plan_for(n, sign);
    fftw_execute_dft(plan, buf.get(), buf.get());
    std::memcpy(static_cast<void*>(data.data()), buf.get(), n * sizeof(fftw_complex));
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  struct Buffer {
    explicit Buffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {}
    ~Buffer() { fftw_free(ptr); }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    fftw_complex* get() const { return ptr; }
    fftw_complex* ptr;
  };

  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan plan_for(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    Buffer probe(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), probe.get(), probe.get(),
                                      sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void fft_forward(std::span<std::complex<double>> data) {
  FftPlanCache::instance().execute(data, -1);
}

inline void fft_backward(std::span<std::complex<double>> data) {
  FftPlanCache::instance().execute(data, +1);
}

}  // namespace corrlab::detail
