#include <set>

#include "doctest.h"

#include "cirl/dictionary.hpp"
#include "cirl/rng.hpp"
#include "cirl/fft.hpp"
#include "cirl/sampling.hpp"

using namespace cirl;

namespace {

Vec random_vec(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

double gram_identity_error(const LinOp& op) {
  const Eigen::MatrixXd a = op.to_dense();
  const Eigen::MatrixXd g = a.transpose() * a;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("full spread spectrum without exclusion is an isometry") {
  for (Field f : {Field::real, Field::complex}) {
    const auto ss = make_spread_spectrum(8, 8, 3, f, false);
    if (f == Field::complex) {
      CHECK(gram_identity_error(ss.op) < 1e-12);
    } else {
      // Real domain: Phi^T Phi = Re(Phi^H Phi) = I.
      CHECK(gram_identity_error(ss.op) < 1e-12);
    }
  }
}

TEST_CASE("spread spectrum adjoint at full size") {
  const auto ss = make_spread_spectrum(2304, 576, 1);
  CHECK(adjoint_mismatch(ss.op, 20, 77) < 1e-10);
  CHECK(ss.op.rows() == 576);
  CHECK(ss.op.range_field() == Field::complex);
}

TEST_CASE("spread spectrum is deterministic in its seed") {
  const auto a = make_spread_spectrum(64, 20, 5);
  const auto b = make_spread_spectrum(64, 20, 5);
  const auto c = make_spread_spectrum(64, 20, 6);
  CHECK(a.signs == b.signs);
  CHECK(a.pattern.frames == b.pattern.frames);
  CHECK(a.pattern.frames != c.pattern.frames);
}

TEST_CASE("spread spectrum honours the conjugate-pair rule") {
  const Index n = 30;
  const auto ss = make_spread_spectrum(n, 16, 8);
  std::set<Index> rows(ss.pattern.frames[0].begin(), ss.pattern.frames[0].end());
  for (Index k : rows) CHECK(!(k != 0 && 2 * k != n && rows.count(n - k)));
  CHECK(ss.pattern.total_rows() == 16);
  CHECK_THROWS_AS(make_spread_spectrum(n, 17, 8), Error);
  CHECK_NOTHROW(make_spread_spectrum(n, 30, 8, Field::real, false));
  CHECK_THROWS_AS(make_spread_spectrum(n, 31, 8), Error);
}

TEST_CASE("split_real keeps values and norms") {
  CVec y(1);
  y[0] = {3.0, 4.0};
  const auto ss = make_spread_spectrum(4, 1, 2);
  const auto sp = split_real(ss.op, y);
  CHECK(sp.y[0] == 3.0);
  CHECK(sp.y[1] == 4.0);
  CHECK(sp.y.norm() == doctest::Approx(5.0));
  CHECK(sp.op.rows() == 2);
  CHECK(sp.op.range_field() == Field::real);
  CHECK_THROWS_AS(split_real(sp.op), Error);
}

TEST_CASE("split operator adjoint matches the complex adjoint") {
  const auto ss = make_spread_spectrum(40, 12, 4);
  const LinOp s = split_real(ss.op);
  CHECK(adjoint_mismatch(s, 20, 1) < 1e-10);
  Vec v = random_vec(24, 2);
  CHECK((s.adjoint(v) - ss.op.adjoint(v)).norm() < 1e-12);
  // Re(Phi^H v) computed from complex arithmetic directly.
  const CVec vc = from_split(v);
  CVec full = CVec::Zero(40);
  for (Index k = 0; k < 12; ++k) full[ss.pattern.frames[0][k]] = vc[k];
  const CVec back = dft(full, true);
  Vec expect(40);
  for (Index i = 0; i < 40; ++i) expect[i] = (back[i] * ss.signs[i]).real();
  CHECK((s.adjoint(v) - expect).norm() < 1e-12);
}

TEST_CASE("finite differences") {
  const LinOp v = make_finite_difference(2, 1, Axis::vertical);
  Vec x(2);
  x << 1.5, 4.0;
  CHECK(v.forward(x)[0] == doctest::Approx(2.5));
  const LinOp dv = make_finite_difference(5, 4, Axis::vertical);
  const LinOp dh = make_finite_difference(5, 4, Axis::horizontal);
  CHECK(dv.rows() == 16);
  CHECK(dh.rows() == 15);
  CHECK(dv.forward(Vec::Constant(20, 2.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(dh.forward(Vec::Constant(20, 2.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(adjoint_mismatch(dv, 20, 3) < 1e-12);
  CHECK(adjoint_mismatch(dh, 20, 4) < 1e-12);
  CHECK_THROWS_AS(make_finite_difference(1, 4, Axis::vertical), Error);
  CHECK_THROWS_AS(make_finite_difference(4, 1, Axis::horizontal), Error);
}

TEST_CASE("separable step image has k n2 vertical differences") {
  // Oracle: build X = x1 1^T + 1 x2^T entry by entry and count row changes.
  const Index n = 6;
  Vec x1(n), x2(n);
  x1 << 0, 0, 1.5, 1.5, -2, -2;  // two steps
  x2 << 3, 3, 3, 1, 1, 1;
  Vec img(n * n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) img[i + n * j] = x1[i] + x2[j];
  Index oracle = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i + 1 < n; ++i) oracle += img[i + 1 + n * j] != img[i + n * j];
  CHECK(oracle == 2 * n);
  const Vec d = make_finite_difference(n, n, Axis::vertical).forward(img);
  Index nnz = 0;
  for (Index k = 0; k < d.size(); ++k) nnz += d[k] != 0.0;
  CHECK(nnz == oracle);
}

TEST_CASE("daubechies filter identities") {
  for (Wavelet w : {Wavelet::db1, Wavelet::db2, Wavelet::db3}) {
    const auto h = lowpass_filter(w);
    double s = 0, s2 = 0, m1 = 0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      s += h[k];
      s2 += h[k] * h[k];
      m1 += ((k % 2) ? -1.0 : 1.0) * static_cast<double>(k) * h[k];
    }
    CHECK(std::abs(s - std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(s2 - 1.0) < 1e-12);
    if (w != Wavelet::db1) CHECK(std::abs(m1) < 1e-12);
    // Even shifts are orthogonal.
    for (std::size_t sh = 2; sh < h.size(); sh += 2) {
      double c = 0;
      for (std::size_t k = 0; k + sh < h.size(); ++k) c += h[k] * h[k + sh];
      CHECK(std::abs(c) < 1e-12);
    }
  }
}

TEST_CASE("haar on a constant 2x2 image") {
  const auto d = make_owt(Wavelet::db1, 1, 2, 2);
  const Vec c = d.analyze(Vec::Ones(4));
  REQUIRE(d.band_count() == 4);
  for (int b = 0; b < 3; ++b) CHECK(std::abs(c[d.bands()[b].offset]) < 1e-15);
  CHECK(c[d.bands()[3].offset] == doctest::Approx(2.0));
}

TEST_CASE("orthonormal wavelets are Parseval") {
  for (Wavelet w : {Wavelet::db1, Wavelet::db2, Wavelet::db3}) {
    const auto d = make_owt(w, 2, 16, 16);
    const Vec x = random_vec(256, 9);
    CHECK(std::abs(d.analyze(x).norm() - x.norm()) < 1e-10 * x.norm());
    CHECK((d.op().adjoint(d.analyze(x)) - x).norm() < 1e-10 * x.norm());
    CHECK(adjoint_mismatch(d.op(), 20, 10) < 1e-10);
    CHECK(d.band_count() == 7);
  }
  CHECK_THROWS_AS(make_owt(Wavelet::db2, 3, 12, 16), Error);
}

TEST_CASE("undecimated wavelets form a tight frame") {
  const auto d = make_uwt(Wavelet::db1, 1, 8, 8);
  CHECK(d.band_count() == 4);
  CHECK(d.total_rows() == 4 * 64);
  // Frame constant measured on an impulse, then asserted on a random image.
  Vec e = Vec::Zero(64);
  e[0] = 1.0;
  const double c = d.op().adjoint(d.analyze(e))[0];
  CHECK(std::abs(c - 1.0) < 1e-12);
  for (Wavelet w : {Wavelet::db1, Wavelet::db2}) {
    for (Index lv : {1, 2}) {
      const auto u = make_uwt(w, lv, 8, 8);
      const Vec x = random_vec(64, 12);
      CHECK((u.op().adjoint(u.analyze(x)) - c * x).norm() < 1e-10 * x.norm());
      CHECK(adjoint_mismatch(u.op(), 20, 13) < 1e-10);
      const Vec cc = u.analyze(Vec::Constant(64, 3.0));
      for (Index b = 0; b + 1 < u.band_count(); ++b) {
        const auto& band = u.bands()[static_cast<std::size_t>(b)];
        CHECK(cc.segment(band.offset, band.size).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("concatenated dictionaries") {
  const auto a = make_uwt(Wavelet::db1, 1, 8, 8);
  const auto b = make_uwt(Wavelet::db2, 1, 8, 8);
  const auto ab = concat_dictionaries({a, b});
  CHECK(ab.band_count() == 8);
  CHECK(ab.total_rows() == 8 * 64);
  for (Index d = 0; d < 8; ++d) CHECK(ab.bands()[d].offset == 64 * d);
  const Vec v = random_vec(512, 14);
  const Vec expect = a.op().adjoint(v.head(256)) + b.op().adjoint(v.tail(256));
  CHECK((ab.op().adjoint(v) - expect).norm() < 1e-10 * v.norm());
  const auto one = concat_dictionaries({a});
  const Vec x = random_vec(64, 15);
  CHECK(one.analyze(x) == a.analyze(x));
  CHECK_THROWS_AS(concat_dictionaries({a, make_uwt(Wavelet::db1, 1, 8, 16)}), Error);
}

TEST_CASE("complex dictionaries") {
  const auto a = make_uwt(Wavelet::db1, 1, 8, 8, Field::complex);
  const auto b = make_owt(Wavelet::db2, 1, 8, 8, Field::complex);
  const auto ab = concat_dictionaries({a, b});
  CHECK(ab.field_constant() == 2.0);
  CHECK(adjoint_mismatch(ab.op(), 20, 16) < 1e-10);
  const Vec x = random_vec(128, 17);
  const Vec c = ab.analyze(x);
  const Index l = ab.total_rows();
  const Vec re = concat_dictionaries({make_uwt(Wavelet::db1, 1, 8, 8), make_owt(Wavelet::db2, 1, 8, 8)})
                     .analyze(x.head(64));
  CHECK((c.head(l) - re).norm() < 1e-12);
}

TEST_CASE("partial fourier video") {
  const auto full = make_partial_fourier_video(8, 3, 8, 0.15, 1, Field::complex, false);
  CHECK(gram_identity_error(full.op) < 1e-12);
  const auto pf = make_partial_fourier_video(32, 6, 9, 0.15, 4);
  CHECK(pf.op.rows() == 54);
  CHECK(adjoint_mismatch(pf.op, 20, 5) < 1e-10);
  for (const auto& fr : pf.pattern.frames) {
    CHECK(fr.size() == 9);
    CHECK(fr.front() == 0);
    std::set<Index> s(fr.begin(), fr.end());
    for (Index k : fr) CHECK(!(k != 0 && k != 16 && s.count(32 - k)));
  }
  CHECK(pf.pattern.frames[0] != pf.pattern.frames[1]);
  CHECK_THROWS_AS(make_partial_fourier_video(32, 2, 18, 0.15, 1), Error);
}

TEST_CASE("variable density favours low frequencies") {
  const Index n1 = 64, m1 = 16;
  double low = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pf = make_partial_fourier_video(n1, 4, m1, 0.15, seed);
    for (const auto& fr : pf.pattern.frames) {
      for (Index k : fr) {
        low += std::abs(signed_frequency(k, n1)) < n1 / 8;
        total += 1;
      }
    }
  }
  // Uniform selection over the 33 conjugate classes: DC plus 7 of 32 others
  // lie below n1/8.
  const double uniform = (1.0 + (m1 - 1) * 7.0 / 32.0) / m1;
  CHECK(low / total > uniform);
}

TEST_CASE("sampling pattern json round trip") {
  const auto pf = make_partial_fourier_video(16, 3, 5, 0.2, 21);
  const auto back = pattern_from_json(to_json(pf.pattern));
  CHECK(back.frames == pf.pattern.frames);
  CHECK(back.seed == 21);
  CHECK(back.density_sigma == 0.2);
  CHECK_THROWS_AS(pattern_from_json("{\"seed\": 1}"), Error);
}
