#pragma once

#include <span>
#include <vector>

#include "cirl/types.hpp"

namespace cirl {

// Precomputed unitary DFT of a fixed length.
//
// Powers of two use an iterative radix-2 transform; every other length goes
// through Bluestein's chirp-z algorithm on a padded power-of-two grid. Both
// directions are scaled by 1/sqrt(n), so forward and inverse are adjoint.
// A plan is immutable after construction and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  void forward(std::span<cplx> data) const { transform(data, false); }
  void inverse(std::span<cplx> data) const { transform(data, true); }

 private:
  struct Radix2 {
    std::size_t n = 0;
    std::vector<std::size_t> bitrev;
    std::vector<cplx> twiddle;  // exp(-2 pi i k / n), k < n/2
    void init(std::size_t len);
    // Unnormalized in-place transform, sign -1 (forward) or +1 (inverse).
    void run(std::span<cplx> data, bool inverse) const;
  };

  void transform(std::span<cplx> data, bool inverse) const;

  std::size_t n_;
  double scale_;
  bool pow2_;
  Radix2 radix_;                 // length n when pow2_, else the padded length
  std::vector<cplx> chirp_;      // exp(-i pi k^2 / n)
  std::vector<cplx> chirp_fft_;  // transform of the conjugate chirp filter
};

// Unitary DFT through a temporary plan.
CVec dft(const CVec& x, bool inverse = false);

// O(n^2) reference transform with the same scaling; used as a test oracle.
CVec dft_direct(const CVec& x, bool inverse = false);

}  // namespace cirl
