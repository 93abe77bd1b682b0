#include "cirl/linop.hpp"

#include "cirl/rng.hpp"

namespace cirl {

LinOp::LinOp(std::shared_ptr<const LinOpImpl> impl, Index rows, Index cols, Field domain,
             Field range)
    : impl_(std::move(impl)), rows_(rows), cols_(cols), domain_(domain), range_(range) {
  if (rows < 0 || cols < 0) throw Error("LinOp: negative shape");
}

void LinOp::apply(VecCRef in, VecRef out) const {
  if (in.size() != in_size() || out.size() != out_size()) {
    throw Error("LinOp::apply: dimension mismatch");
  }
  impl_->forward(in, out);
}

void LinOp::apply_adjoint(VecCRef in, VecRef out) const {
  if (in.size() != out_size() || out.size() != in_size()) {
    throw Error("LinOp::apply_adjoint: dimension mismatch");
  }
  impl_->adjoint(in, out);
}

Vec LinOp::forward(const Vec& in) const {
  Vec out(out_size());
  apply(in, out);
  return out;
}

Vec LinOp::adjoint(const Vec& in) const {
  Vec out(in_size());
  apply_adjoint(in, out);
  return out;
}

Eigen::MatrixXd LinOp::to_dense() const {
  Eigen::MatrixXd a(out_size(), in_size());
  Vec e = Vec::Zero(in_size());
  Vec col(out_size());
  for (Index j = 0; j < in_size(); ++j) {
    e[j] = 1.0;
    apply(e, col);
    a.col(j) = col;
    e[j] = 0.0;
  }
  return a;
}

namespace {

class FunctionImpl final : public LinOpImpl {
 public:
  FunctionImpl(ApplyFn f, ApplyFn a) : f_(std::move(f)), a_(std::move(a)) {}
  void forward(VecCRef in, VecRef out) const override { f_(in, out); }
  void adjoint(VecCRef in, VecRef out) const override { a_(in, out); }

 private:
  ApplyFn f_;
  ApplyFn a_;
};

class DenseImpl final : public LinOpImpl {
 public:
  explicit DenseImpl(Eigen::MatrixXd a) : a_(std::move(a)) {}
  void forward(VecCRef in, VecRef out) const override { out.noalias() = a_ * in; }
  void adjoint(VecCRef in, VecRef out) const override {
    out.noalias() = a_.transpose() * in;
  }

 private:
  Eigen::MatrixXd a_;
};

class ComposeImpl final : public LinOpImpl {
 public:
  ComposeImpl(LinOp a, LinOp b) : a_(std::move(a)), b_(std::move(b)) {}
  void forward(VecCRef in, VecRef out) const override {
    Vec mid(b_.out_size());
    b_.apply(in, mid);
    a_.apply(mid, out);
  }
  void adjoint(VecCRef in, VecRef out) const override {
    Vec mid(a_.in_size());
    a_.apply_adjoint(in, mid);
    b_.apply_adjoint(mid, out);
  }

 private:
  LinOp a_;
  LinOp b_;
};

class StackImpl final : public LinOpImpl {
 public:
  StackImpl(std::vector<LinOp> parts, bool complex_range, Index total_rows)
      : parts_(std::move(parts)), complex_(complex_range), total_(total_rows) {}

  void forward(VecCRef in, VecRef out) const override {
    Index off = 0;
    for (const auto& p : parts_) {
      const Index r = p.rows();
      if (complex_) {
        Vec tmp(2 * r);
        p.apply(in, tmp);
        out.segment(off, r) = tmp.head(r);
        out.segment(total_ + off, r) = tmp.tail(r);
      } else {
        p.apply(in, out.segment(off, r));
      }
      off += r;
    }
  }

  void adjoint(VecCRef in, VecRef out) const override {
    out.setZero();
    Vec acc(out.size());
    Index off = 0;
    for (const auto& p : parts_) {
      const Index r = p.rows();
      if (complex_) {
        Vec tmp(2 * r);
        tmp.head(r) = in.segment(off, r);
        tmp.tail(r) = in.segment(total_ + off, r);
        p.apply_adjoint(tmp, acc);
      } else {
        p.apply_adjoint(in.segment(off, r), acc);
      }
      out += acc;
      off += r;
    }
  }

 private:
  std::vector<LinOp> parts_;
  bool complex_;
  Index total_;
};

class ComplexifyImpl final : public LinOpImpl {
 public:
  explicit ComplexifyImpl(LinOp op) : op_(std::move(op)) {}
  void forward(VecCRef in, VecRef out) const override {
    const Index n = op_.in_size();
    const Index m = op_.out_size();
    op_.apply(in.head(n), out.head(m));
    op_.apply(in.tail(n), out.tail(m));
  }
  void adjoint(VecCRef in, VecRef out) const override {
    const Index n = op_.in_size();
    const Index m = op_.out_size();
    op_.apply_adjoint(in.head(m), out.head(n));
    op_.apply_adjoint(in.tail(m), out.tail(n));
  }

 private:
  LinOp op_;
};

class RelabelImpl final : public LinOpImpl {
 public:
  explicit RelabelImpl(LinOp op) : op_(std::move(op)) {}
  void forward(VecCRef in, VecRef out) const override { op_.apply(in, out); }
  void adjoint(VecCRef in, VecRef out) const override { op_.apply_adjoint(in, out); }

 private:
  LinOp op_;
};

}  // namespace

LinOp make_function_op(ApplyFn forward, ApplyFn adjoint, Index rows, Index cols, Field domain,
                       Field range) {
  return LinOp(std::make_shared<FunctionImpl>(std::move(forward), std::move(adjoint)), rows,
               cols, domain, range);
}

LinOp make_dense(const Eigen::MatrixXd& a) {
  return LinOp(std::make_shared<DenseImpl>(a), a.rows(), a.cols(), Field::real, Field::real);
}

LinOp make_identity(Index n, Field f) {
  auto copy = [](VecCRef in, VecRef out) { out = in; };
  return make_function_op(copy, copy, n, n, f, f);
}

LinOp make_diagonal(const Vec& d) {
  auto mul = [d](VecCRef in, VecRef out) { out = d.cwiseProduct(in); };
  return make_function_op(mul, mul, d.size(), d.size());
}

LinOp scale(const LinOp& op, double s) {
  auto f = [op, s](VecCRef in, VecRef out) {
    op.apply(in, out);
    out *= s;
  };
  auto a = [op, s](VecCRef in, VecRef out) {
    op.apply_adjoint(in, out);
    out *= s;
  };
  return make_function_op(f, a, op.rows(), op.cols(), op.domain_field(), op.range_field());
}

LinOp compose(const LinOp& a, const LinOp& b) {
  if (a.cols() != b.rows() || a.domain_field() != b.range_field()) {
    throw Error("compose: inner dimensions or fields differ");
  }
  return LinOp(std::make_shared<ComposeImpl>(a, b), a.rows(), b.cols(), b.domain_field(),
               a.range_field());
}

LinOp vstack(const std::vector<LinOp>& parts) {
  if (parts.empty()) throw Error("vstack: no parts");
  const Index n = parts.front().cols();
  const Field dom = parts.front().domain_field();
  const Field rng = parts.front().range_field();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != n || p.domain_field() != dom) throw Error("vstack: domain mismatch");
    if (p.range_field() != rng) throw Error("vstack: range field mismatch");
    rows += p.rows();
  }
  if (parts.size() == 1) return parts.front();
  return LinOp(std::make_shared<StackImpl>(parts, rng == Field::complex, rows), rows, n, dom,
               rng);
}

LinOp complexify(const LinOp& op) {
  if (op.domain_field() != Field::real || op.range_field() != Field::real) {
    throw Error("complexify: operator must be real");
  }
  return LinOp(std::make_shared<ComplexifyImpl>(op), op.rows(), op.cols(), Field::complex,
               Field::complex);
}

LinOp split_real(const LinOp& op) {
  if (op.range_field() != Field::complex) throw Error("split_real: operator is already real");
  if (op.domain_field() != Field::real) throw Error("split_real: domain must be real");
  return LinOp(std::make_shared<RelabelImpl>(op), 2 * op.rows(), op.cols(), Field::real,
               Field::real);
}

SplitOp split_real(const LinOp& op, const CVec& y) {
  if (y.size() != op.rows()) throw Error("split_real: measurement length mismatch");
  return {split_real(op), to_split(y)};
}

double adjoint_mismatch(const LinOp& op, int draws, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  Vec u(op.in_size());
  Vec v(op.out_size());
  for (int k = 0; k < draws; ++k) {
    for (Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const double lhs = op.forward(u).dot(v);
    const double rhs = u.dot(op.adjoint(v));
    const double denom = u.norm() * v.norm();
    worst = std::max(worst, std::abs(lhs - rhs) / (denom > 0.0 ? denom : 1.0));
  }
  return worst;
}

}  // namespace cirl
