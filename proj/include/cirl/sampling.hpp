#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cirl/linop.hpp"

namespace cirl {

// Selected DFT rows per frame, sorted ascending. A spread-spectrum operator
// has a single frame.
struct SamplingPattern {
  std::vector<std::vector<Index>> frames;
  std::uint64_t seed = 0;
  double density_sigma = 0.0;  // 0 for uniform selection

  Index total_rows() const;
};

std::string to_json(const SamplingPattern& p);
SamplingPattern pattern_from_json(const std::string& text);

struct SampledOp {
  LinOp op;
  SamplingPattern pattern;
  Vec signs;  // spread-spectrum modulation; empty for partial Fourier
};

// Frequency classes of an n-point DFT. With conjugate exclusion the classes
// are {0}, {n/2} for even n, and the pairs {f, n-f}; without it every index
// is its own class.
std::vector<std::vector<Index>> frequency_classes(Index n, bool conjugate_exclusion);

// Phi = D F C on n samples: random signs, unitary DFT, m rows drawn
// uniformly without replacement over the frequency classes (one member of a
// pair chosen at random). The range is complex with m rows.
SampledOp make_spread_spectrum(Index n, Index m, std::uint64_t seed,
                               Field domain = Field::real);
SampledOp make_spread_spectrum(Index n, Index m, std::uint64_t seed, Field domain,
                               bool conjugate_exclusion);

// Block-diagonal per-frame DFT sampling of an n1 x frames image stored
// column-major (one frame per column). Each frame keeps DC and draws m1 - 1
// further classes with probability proportional to
// exp(-f^2 / (2 (density_sigma n1)^2)), f the signed frequency.
SampledOp make_partial_fourier_video(Index n1, Index frames, Index m1, double density_sigma,
                                     std::uint64_t seed, Field domain = Field::real);
SampledOp make_partial_fourier_video(Index n1, Index frames, Index m1, double density_sigma,
                                     std::uint64_t seed, Field domain,
                                     bool conjugate_exclusion);

// Signed frequency of DFT bin k: k for k <= n/2, k - n otherwise.
Index signed_frequency(Index k, Index n);

}  // namespace cirl
