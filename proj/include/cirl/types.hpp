#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cirl {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

// Scalar field of a vector space. Complex vectors of logical length n are
// stored as 2n reals laid out as [re(0..n-1); im(0..n-1)], so every operator
// in the library is a real-linear map between real coordinate vectors.
enum class Field { real, complex };

inline Index storage_size(Index logical, Field f) {
  return f == Field::complex ? 2 * logical : logical;
}

inline const char* to_string(Field f) {
  return f == Field::complex ? "complex" : "real";
}

// Raised for violated preconditions: shape mismatches, out-of-domain
// parameters, malformed inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Split a complex vector into [re; im] storage and back.
Vec to_split(const CVec& z);
CVec from_split(const Vec& s);

}  // namespace cirl
