#pragma once
// Thin RAII layer over FFTW for multidimensional complex transforms.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "gmusic/error.hpp"

namespace gmusic {

namespace detail {

// FFTW's planner is not thread-safe; execution with new-array calls is.
inline std::mutex &fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

} // namespace detail

/// Smallest n >= lo whose only prime factors are 2, 3 and 5.
inline int next_smooth(int lo) {
  for (int n = std::max(lo, 1);; ++n) {
    int r = n;
    for (int p : {2, 3, 5})
      while (r % p == 0)
        r /= p;
    if (r == 1)
      return n;
  }
}

/// In-place-capable d-dimensional complex DFT of a fixed shape (row-major,
/// first axis slowest). Unnormalized, FFTW sign convention.
class FFTPlan {
public:
  enum class Direction { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

  FFTPlan(std::vector<int> dims, Direction dir) : dims_(std::move(dims)) {
    require(!dims_.empty(), "FFTPlan: empty shape");
    size_ = 1;
    for (int n : dims_) {
      require(n >= 1, "FFTPlan: nonpositive axis length");
      size_ *= static_cast<std::size_t>(n);
    }
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    // FFTW_ESTIMATE does not touch the arrays during planning
    auto *buf = fftw_alloc_complex(size_);
    plan_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf, buf, static_cast<int>(dir),
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan_)
      throw Error("FFTPlan: FFTW planning failed");
  }

  FFTPlan(const FFTPlan &) = delete;
  FFTPlan &operator=(const FFTPlan &) = delete;

  ~FFTPlan() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }

  std::size_t size() const { return size_; }
  const std::vector<int> &dims() const { return dims_; }

  void execute(std::complex<double> *in, std::complex<double> *out) const {
    fftw_execute_dft(plan_, reinterpret_cast<fftw_complex *>(in), reinterpret_cast<fftw_complex *>(out));
  }

  void execute(std::vector<std::complex<double>> &data) const {
    require(data.size() == size_, "FFTPlan::execute: size mismatch");
    execute(data.data(), data.data());
  }

private:
  std::vector<int> dims_;
  std::size_t size_ = 0;
  fftw_plan plan_ = nullptr;
};

} // namespace gmusic
