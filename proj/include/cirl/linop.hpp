#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "cirl/types.hpp"

namespace cirl {

using VecRef = Eigen::Ref<Vec>;
using VecCRef = Eigen::Ref<const Vec>;

// Storage-level implementation of a real-linear map. Inputs and outputs are
// real coordinate vectors; complex spaces use the [re; im] layout.
class LinOpImpl {
 public:
  virtual ~LinOpImpl() = default;
  virtual void forward(VecCRef in, VecRef out) const = 0;
  virtual void adjoint(VecCRef in, VecRef out) const = 0;
};

// Immutable linear operator handle. rows() and cols() are logical sizes;
// in_size() and out_size() are storage sizes. The adjoint is taken with
// respect to the real inner product on storage, which for complex spaces is
// Re<u, v>, so it coincides with the Hermitian adjoint.
class LinOp {
 public:
  LinOp() = default;
  LinOp(std::shared_ptr<const LinOpImpl> impl, Index rows, Index cols, Field domain,
        Field range);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Field domain_field() const { return domain_; }
  Field range_field() const { return range_; }
  Index in_size() const { return storage_size(cols_, domain_); }
  Index out_size() const { return storage_size(rows_, range_); }
  bool valid() const { return impl_ != nullptr; }

  void apply(VecCRef in, VecRef out) const;
  void apply_adjoint(VecCRef in, VecRef out) const;
  Vec forward(const Vec& in) const;
  Vec adjoint(const Vec& in) const;

  // Column-by-column materialization; only for small oracles.
  Eigen::MatrixXd to_dense() const;

 private:
  std::shared_ptr<const LinOpImpl> impl_;
  Index rows_ = 0;
  Index cols_ = 0;
  Field domain_ = Field::real;
  Field range_ = Field::real;
};

using ApplyFn = std::function<void(VecCRef, VecRef)>;

LinOp make_function_op(ApplyFn forward, ApplyFn adjoint, Index rows, Index cols,
                       Field domain = Field::real, Field range = Field::real);
LinOp make_dense(const Eigen::MatrixXd& a);
LinOp make_identity(Index n, Field f = Field::real);
LinOp make_diagonal(const Vec& d);
LinOp scale(const LinOp& op, double s);

// a after b.
LinOp compose(const LinOp& a, const LinOp& b);

// Rows of the parts stacked in order. All parts share the domain; for a
// complex range the result keeps the global [re; im] layout.
LinOp vstack(const std::vector<LinOp>& parts);

// Lift a real-to-real operator to act on complex vectors componentwise.
LinOp complexify(const LinOp& op);

// Relabel a complex-range operator as a real operator with 2M rows.
struct SplitOp {
  LinOp op;
  Vec y;
};
SplitOp split_real(const LinOp& op, const CVec& y);
LinOp split_real(const LinOp& op);

// max |<Au, v> - <u, A^T v>| / (|u| |v|) over random draws.
double adjoint_mismatch(const LinOp& op, int draws, std::uint64_t seed);

}  // namespace cirl
