#include "cirl/dictionary.hpp"

#include <cmath>

namespace cirl {

CompositeDictionary::CompositeDictionary(LinOp op, std::vector<Band> bands)
    : op_(std::move(op)), bands_(std::move(bands)) {
  if (op_.domain_field() != op_.range_field()) {
    throw Error("CompositeDictionary: bands must share the signal field");
  }
  Index next = 0;
  for (const auto& b : bands_) {
    if (b.offset != next || b.size < 1) throw Error("CompositeDictionary: bands must tile rows");
    next += b.size;
  }
  if (next != op_.rows()) throw Error("CompositeDictionary: band sizes do not cover rows");
}

std::vector<Index> CompositeDictionary::band_of_row() const {
  std::vector<Index> out(static_cast<std::size_t>(total_rows()));
  for (std::size_t d = 0; d < bands_.size(); ++d) {
    for (Index k = 0; k < bands_[d].size; ++k) {
      out[static_cast<std::size_t>(bands_[d].offset + k)] = static_cast<Index>(d);
    }
  }
  return out;
}

Vec CompositeDictionary::magnitudes(const Vec& coeffs) const {
  const Index l = total_rows();
  if (coeffs.size() != op_.out_size()) throw Error("magnitudes: coefficient length mismatch");
  if (field() == Field::real) return coeffs.cwiseAbs();
  Vec m(l);
  for (Index k = 0; k < l; ++k) m[k] = std::hypot(coeffs[k], coeffs[l + k]);
  return m;
}

Vec CompositeDictionary::band_l1(const Vec& coeffs) const {
  const Vec m = magnitudes(coeffs);
  Vec out(band_count());
  for (std::size_t d = 0; d < bands_.size(); ++d) {
    out[static_cast<Index>(d)] = m.segment(bands_[d].offset, bands_[d].size).sum();
  }
  return out;
}

Wavelet parse_wavelet(const std::string& name) {
  if (name == "db1" || name == "haar") return Wavelet::db1;
  if (name == "db2") return Wavelet::db2;
  if (name == "db3") return Wavelet::db3;
  throw Error("unknown wavelet: " + name);
}

std::string to_string(Wavelet w) {
  switch (w) {
    case Wavelet::db1:
      return "db1";
    case Wavelet::db2:
      return "db2";
    case Wavelet::db3:
      return "db3";
  }
  return "?";
}

std::vector<double> lowpass_filter(Wavelet w) {
  const double r2 = std::sqrt(2.0);
  switch (w) {
    case Wavelet::db1:
      return {1.0 / r2, 1.0 / r2};
    case Wavelet::db2: {
      const double r3 = std::sqrt(3.0);
      const double d = 4.0 * r2;
      return {(1 + r3) / d, (3 + r3) / d, (3 - r3) / d, (1 - r3) / d};
    }
    case Wavelet::db3: {
      const double r10 = std::sqrt(10.0);
      const double s = std::sqrt(5.0 + 2.0 * r10);
      const double d = 16.0 * r2;
      return {(1 + r10 + s) / d,          (5 + r10 + 3 * s) / d, (10 - 2 * r10 + 2 * s) / d,
              (10 - 2 * r10 - 2 * s) / d, (5 + r10 - 3 * s) / d, (1 + r10 - s) / d};
    }
  }
  throw Error("lowpass_filter: bad wavelet");
}

std::vector<double> highpass_filter(Wavelet w) {
  const auto h = lowpass_filter(w);
  const std::size_t n = h.size();
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = ((k % 2) ? -1.0 : 1.0) * h[n - 1 - k];
  return g;
}

LinOp make_finite_difference(Index n1, Index n2, Axis axis) {
  if (n1 < 1 || n2 < 1) throw Error("make_finite_difference: empty image");
  if (axis == Axis::vertical) {
    if (n1 < 2) throw Error("make_finite_difference: vertical axis length < 2");
    const Index r = n1 - 1;
    auto fwd = [n1, n2, r](VecCRef in, VecRef out) {
      for (Index j = 0; j < n2; ++j) {
        for (Index i = 0; i < r; ++i) out[i + r * j] = in[i + 1 + n1 * j] - in[i + n1 * j];
      }
    };
    auto adj = [n1, n2, r](VecCRef in, VecRef out) {
      out.setZero();
      for (Index j = 0; j < n2; ++j) {
        for (Index i = 0; i < r; ++i) {
          const double v = in[i + r * j];
          out[i + 1 + n1 * j] += v;
          out[i + n1 * j] -= v;
        }
      }
    };
    return make_function_op(fwd, adj, r * n2, n1 * n2);
  }
  if (n2 < 2) throw Error("make_finite_difference: horizontal axis length < 2");
  auto fwd = [n1, n2](VecCRef in, VecRef out) {
    for (Index j = 0; j + 1 < n2; ++j) {
      for (Index i = 0; i < n1; ++i) out[i + n1 * j] = in[i + n1 * (j + 1)] - in[i + n1 * j];
    }
  };
  auto adj = [n1, n2](VecCRef in, VecRef out) {
    out.setZero();
    for (Index j = 0; j + 1 < n2; ++j) {
      for (Index i = 0; i < n1; ++i) {
        const double v = in[i + n1 * j];
        out[i + n1 * (j + 1)] += v;
        out[i + n1 * j] -= v;
      }
    }
  };
  return make_function_op(fwd, adj, n1 * (n2 - 1), n1 * n2);
}

namespace {

CompositeDictionary finish(const LinOp& real_op, std::vector<Band> bands, Field field) {
  if (field == Field::complex) return CompositeDictionary(complexify(real_op), std::move(bands));
  return CompositeDictionary(real_op, std::move(bands));
}

using Mat = Eigen::MatrixXd;

// Periodic filtering along the first axis of a (rows x cols) column-major
// block: out(k, c) = sum_m f_m in((step k + dilation m) mod rows, c).
void filter_rows(const double* in, Index rows, Index cols, const std::vector<double>& f,
                 Index step, Index dilation, double* out, Index out_rows) {
  for (Index c = 0; c < cols; ++c) {
    const double* src = in + rows * c;
    double* dst = out + out_rows * c;
    for (Index k = 0; k < out_rows; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < f.size(); ++m) {
        acc += f[m] * src[(step * k + dilation * static_cast<Index>(m)) % rows];
      }
      dst[k] = acc;
    }
  }
}

// Transpose of filter_rows, accumulated into out.
void filter_rows_adjoint(const double* in, Index out_rows, Index cols,
                         const std::vector<double>& f, Index step, Index dilation, double* out,
                         Index rows) {
  for (Index c = 0; c < cols; ++c) {
    const double* src = in + out_rows * c;
    double* dst = out + rows * c;
    for (Index k = 0; k < out_rows; ++k) {
      const double v = src[k];
      for (std::size_t m = 0; m < f.size(); ++m) {
        dst[(step * k + dilation * static_cast<Index>(m)) % rows] += f[m] * v;
      }
    }
  }
}

// One separable 2D analysis stage: a (r x c) block to four (r' x c') blocks
// in the order LL, LH, HL, HH, where the first letter is the filter along
// the first axis.
struct Stage {
  std::vector<double> h, g;
  Index step = 2;
  Index dilation = 1;

  void analyze(const Mat& a, Mat out[4]) const {
    const Index r = a.rows(), c = a.cols();
    const Index r2 = r / step, c2 = c / step;
    Mat lo(r2, c), hi(r2, c);
    filter_rows(a.data(), r, c, h, step, dilation, lo.data(), r2);
    filter_rows(a.data(), r, c, g, step, dilation, hi.data(), r2);
    const Mat lot = lo.transpose(), hit = hi.transpose();
    Mat t(c2, r2);
    const Mat* src[2] = {&lot, &hit};
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        filter_rows(src[p]->data(), c, r2, q == 0 ? h : g, step, dilation, t.data(), c2);
        out[2 * p + q] = t.transpose();
      }
    }
  }

  Mat adjoint(const Mat in[4], Index r, Index c) const {
    const Index r2 = r / step, c2 = c / step;
    Mat lot = Mat::Zero(c, r2), hit = Mat::Zero(c, r2);
    Mat* dst[2] = {&lot, &hit};
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        const Mat t = in[2 * p + q].transpose();
        filter_rows_adjoint(t.data(), c2, r2, q == 0 ? h : g, step, dilation, dst[p]->data(), c);
      }
    }
    const Mat lo = lot.transpose(), hi = hit.transpose();
    Mat a = Mat::Zero(r, c);
    filter_rows_adjoint(lo.data(), r2, c, h, step, dilation, a.data(), r);
    filter_rows_adjoint(hi.data(), r2, c, g, step, dilation, a.data(), r);
    return a;
  }
};

const char* kDetailNames[3] = {"LH", "HL", "HH"};

}  // namespace

CompositeDictionary make_finite_difference_dictionary(Index n1, Index n2, Field field) {
  const LinOp v = make_finite_difference(n1, n2, Axis::vertical);
  const LinOp h = make_finite_difference(n1, n2, Axis::horizontal);
  std::vector<Band> bands{{"vertical", 0, v.rows()}, {"horizontal", v.rows(), h.rows()}};
  return finish(vstack({v, h}), std::move(bands), field);
}

CompositeDictionary make_owt(Wavelet w, Index levels, Index n1, Index n2, Field field) {
  if (levels < 1) throw Error("make_owt: levels must be >= 1");
  const Index div = Index{1} << levels;
  if (n1 % div != 0 || n2 % div != 0) {
    throw Error("make_owt: image sides must be divisible by 2^levels");
  }
  Stage st{lowpass_filter(w), highpass_filter(w), 2, 1};
  std::vector<Band> bands;
  Index off = 0;
  for (Index lv = 1; lv <= levels; ++lv) {
    const Index sz = (n1 >> lv) * (n2 >> lv);
    for (const char* nm : kDetailNames) {
      bands.push_back({to_string(w) + "_L" + std::to_string(lv) + "_" + nm, off, sz});
      off += sz;
    }
  }
  const Index last = (n1 >> levels) * (n2 >> levels);
  bands.push_back({to_string(w) + "_L" + std::to_string(levels) + "_LL", off, last});

  auto fwd = [st, levels, n1, n2](VecCRef in, VecRef out) {
    Mat a = Eigen::Map<const Mat>(in.data(), n1, n2);
    Index off = 0;
    Mat sub[4];
    for (Index lv = 0; lv < levels; ++lv) {
      st.analyze(a, sub);
      for (int b = 1; b < 4; ++b) {
        const Index sz = sub[b].size();
        out.segment(off, sz) = Eigen::Map<const Vec>(sub[b].data(), sz);
        off += sz;
      }
      a = sub[0];
    }
    out.segment(off, a.size()) = Eigen::Map<const Vec>(a.data(), a.size());
  };
  auto adj = [st, levels, n1, n2](VecCRef in, VecRef out) {
    // Offsets of each level's detail blocks.
    std::vector<Index> offs;
    Index off = 0;
    for (Index lv = 1; lv <= levels; ++lv) {
      offs.push_back(off);
      off += 3 * (n1 >> lv) * (n2 >> lv);
    }
    const Index r0 = n1 >> levels, c0 = n2 >> levels;
    Mat a = Eigen::Map<const Mat>(in.data() + off, r0, c0);
    for (Index lv = levels; lv >= 1; --lv) {
      const Index r = n1 >> lv, c = n2 >> lv;
      Mat sub[4];
      sub[0] = a;
      for (int b = 1; b < 4; ++b) {
        sub[b] = Eigen::Map<const Mat>(in.data() + offs[lv - 1] + (b - 1) * r * c, r, c);
      }
      a = st.adjoint(sub, 2 * r, 2 * c);
    }
    out = Eigen::Map<const Vec>(a.data(), a.size());
  };
  return finish(make_function_op(fwd, adj, n1 * n2, n1 * n2), std::move(bands), field);
}

CompositeDictionary make_uwt(Wavelet w, Index levels, Index n1, Index n2, Field field) {
  if (levels < 1) throw Error("make_uwt: levels must be >= 1");
  const Index div = Index{1} << levels;
  if (n1 % div != 0 || n2 % div != 0) {
    throw Error("make_uwt: image sides must be divisible by 2^levels");
  }
  std::vector<double> h = lowpass_filter(w), g = highpass_filter(w);
  for (auto& v : h) v /= std::sqrt(2.0);
  for (auto& v : g) v /= std::sqrt(2.0);
  std::vector<Stage> stages;
  for (Index lv = 0; lv < levels; ++lv) stages.push_back(Stage{h, g, 1, Index{1} << lv});

  const Index n = n1 * n2;
  std::vector<Band> bands;
  Index off = 0;
  for (Index lv = 1; lv <= levels; ++lv) {
    for (const char* nm : kDetailNames) {
      bands.push_back({"u" + to_string(w) + "_L" + std::to_string(lv) + "_" + nm, off, n});
      off += n;
    }
  }
  bands.push_back({"u" + to_string(w) + "_L" + std::to_string(levels) + "_LL", off, n});

  auto fwd = [stages, n1, n2, n](VecCRef in, VecRef out) {
    Mat a = Eigen::Map<const Mat>(in.data(), n1, n2);
    Index off = 0;
    Mat sub[4];
    for (const auto& st : stages) {
      st.analyze(a, sub);
      for (int b = 1; b < 4; ++b) {
        out.segment(off, n) = Eigen::Map<const Vec>(sub[b].data(), n);
        off += n;
      }
      a = sub[0];
    }
    out.segment(off, n) = Eigen::Map<const Vec>(a.data(), n);
  };
  auto adj = [stages, n1, n2, n](VecCRef in, VecRef out) {
    const Index levels = static_cast<Index>(stages.size());
    Mat a = Eigen::Map<const Mat>(in.data() + 3 * n * levels, n1, n2);
    for (Index lv = levels; lv >= 1; --lv) {
      Mat sub[4];
      sub[0] = a;
      for (int b = 1; b < 4; ++b) {
        sub[b] = Eigen::Map<const Mat>(in.data() + (3 * (lv - 1) + (b - 1)) * n, n1, n2);
      }
      a = stages[static_cast<std::size_t>(lv - 1)].adjoint(sub, n1, n2);
    }
    out = Eigen::Map<const Vec>(a.data(), n);
  };
  const Index rows = n * (3 * levels + 1);
  return finish(make_function_op(fwd, adj, rows, n), std::move(bands), field);
}

CompositeDictionary make_singleton_bands(const LinOp& op) {
  std::vector<Band> bands;
  for (Index k = 0; k < op.rows(); ++k) bands.push_back({"row" + std::to_string(k), k, 1});
  return CompositeDictionary(op, std::move(bands));
}

CompositeDictionary make_single_band(const LinOp& op, const std::string& name) {
  return CompositeDictionary(op, {{name, 0, op.rows()}});
}

CompositeDictionary concat_dictionaries(const std::vector<CompositeDictionary>& parts) {
  if (parts.empty()) throw Error("concat_dictionaries: no parts");
  if (parts.size() == 1) return parts.front();
  std::vector<LinOp> ops;
  std::vector<Band> bands;
  Index off = 0;
  for (const auto& p : parts) {
    if (p.cols() != parts.front().cols()) throw Error("concat_dictionaries: N differs");
    if (p.field() != parts.front().field()) throw Error("concat_dictionaries: field differs");
    ops.push_back(p.op());
    for (const auto& b : p.bands()) {
      bands.push_back({b.name, off + b.offset, b.size});
    }
    off += p.total_rows();
  }
  return CompositeDictionary(vstack(ops), std::move(bands));
}

}  // namespace cirl
