#pragma once

#include <string>
#include <vector>

#include "cirl/linop.hpp"

namespace cirl {

struct Band {
  std::string name;
  Index offset = 0;  // first logical row in the stacked output
  Index size = 0;    // L_d
};

// Stacked analysis operator Psi = [Psi_1; ...; Psi_D] with the band layout.
// All bands share the signal field; a complex band has C_d = 2. For complex
// coefficients the real part of global coefficient k is stored at k and the
// imaginary part at L + k.
class CompositeDictionary {
 public:
  CompositeDictionary() = default;
  CompositeDictionary(LinOp op, std::vector<Band> bands);

  const LinOp& op() const { return op_; }
  const std::vector<Band>& bands() const { return bands_; }
  Index band_count() const { return static_cast<Index>(bands_.size()); }
  Index total_rows() const { return op_.rows(); }
  Index cols() const { return op_.cols(); }
  Field field() const { return op_.range_field(); }
  double field_constant() const { return field() == Field::complex ? 2.0 : 1.0; }

  // Band index of each logical row.
  std::vector<Index> band_of_row() const;

  Vec analyze(const Vec& x) const { return op_.forward(x); }
  // |coefficient| per logical row, from stored coefficients.
  Vec magnitudes(const Vec& coeffs) const;
  // ||Psi_d x||_1 per band, from stored coefficients.
  Vec band_l1(const Vec& coeffs) const;

 private:
  LinOp op_;
  std::vector<Band> bands_;
};

enum class Axis { vertical, horizontal };
enum class Wavelet { db1, db2, db3 };

Wavelet parse_wavelet(const std::string& name);
std::string to_string(Wavelet w);

// Orthonormal low-pass taps; sum h = sqrt(2), sum h^2 = 1.
std::vector<double> lowpass_filter(Wavelet w);
// g_k = (-1)^k h_{len-1-k}.
std::vector<double> highpass_filter(Wavelet w);

// First-order differences of a column-major n1 x n2 image (index i + n1 j).
// Vertical differences run along i and give (n1-1) n2 rows; horizontal run
// along j and give n1 (n2-1) rows. No wrap-around.
LinOp make_finite_difference(Index n1, Index n2, Axis axis);

// Vertical and horizontal differences as two bands.
CompositeDictionary make_finite_difference_dictionary(Index n1, Index n2,
                                                      Field field = Field::real);

// Orthonormal periodic 2D wavelet basis. Bands per level are LH, HL, HH
// (finest first) followed by the final LL approximation; Psi^T Psi = I.
CompositeDictionary make_owt(Wavelet w, Index levels, Index n1, Index n2,
                             Field field = Field::real);

// Undecimated periodic 2D wavelet frame (a trous). Filters are scaled by
// 1/sqrt(2) per level so Psi^T Psi = I; every band has n1 n2 rows.
CompositeDictionary make_uwt(Wavelet w, Index levels, Index n1, Index n2,
                             Field field = Field::real);

// One band per logical row of op (L_d = 1 for every band).
CompositeDictionary make_singleton_bands(const LinOp& op);

// One band holding every row of op.
CompositeDictionary make_single_band(const LinOp& op, const std::string& name = "all");

CompositeDictionary concat_dictionaries(const std::vector<CompositeDictionary>& parts);

}  // namespace cirl
