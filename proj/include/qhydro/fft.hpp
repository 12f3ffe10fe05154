#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "qhydro/error.hpp"

namespace qhydro::fft {

namespace detail {

// FFTW planning is not thread-safe; execution with fftw_execute_dft is.
// Plans are created once per (size, direction) and reused for any
// unaligned out-of-place buffers of that size.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> a(n), b(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  ~PlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  PlanCache() = default;

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
                    int sign) {
  if (in.size() != out.size()) throw InvalidArgument("fft: size mismatch");
  if (in.data() == out.data()) throw InvalidArgument("fft: in-place transforms are not supported");
  fftw_plan p = PlanCache::instance().get(in.size(), sign);
  // FFTW does not modify the input of an out-of-place complex transform.
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace detail

/// Unnormalized forward DFT: out_k = sum_j in_j exp(-2 pi i j k / N).
inline std::vector<std::complex<double>> forward(std::span<const std::complex<double>> in) {
  std::vector<std::complex<double>> out(in.size());
  detail::execute(in, out, FFTW_FORWARD);
  return out;
}

/// Inverse DFT including the 1/N factor, so inverse(forward(x)) == x.
inline std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> in) {
  std::vector<std::complex<double>> out(in.size());
  detail::execute(in, out, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& z : out) z *= scale;
  return out;
}

}  // namespace qhydro::fft
