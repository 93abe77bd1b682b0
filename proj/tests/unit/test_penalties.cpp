#include "doctest.h"

#include <cmath>

#include "cirl/penalties.hpp"
#include "cirl/reweighting.hpp"
#include "cirl/rng.hpp"

using namespace cirl;

namespace {

Vec random_vec(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

CompositeDictionary identity_band(Index n) { return make_single_band(make_identity(n)); }

// Bands of the given sizes over one signal of the total length.
CompositeDictionary banded_identity(const std::vector<Index>& sizes) {
  Index n = 0;
  std::vector<Band> bands;
  for (Index s : sizes) {
    bands.push_back({"b" + std::to_string(bands.size()), n, s});
    n += s;
  }
  return CompositeDictionary(make_identity(n), bands);
}

LiftedPoint random_feasible(const CompositeDictionary& dict, std::uint64_t seed) {
  Rng rng(seed);
  LiftedPoint p = tight_lift(dict, random_vec(dict.cols(), seed + 1000));
  for (Index k = 0; k < p.u.size(); ++k) p.u[k] += 0.05 + rng.uniform();
  return p;
}

Vec numeric_grad(const std::function<double(const Vec&)>& f, const Vec& u, double h) {
  Vec g(u.size());
  for (Index k = 0; k < u.size(); ++k) {
    Vec a = u, b = u;
    a[k] += h;
    b[k] -= h;
    g[k] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("log-sum penalty values") {
  const auto d = identity_band(3);
  const Vec x = Vec::Constant(3, (std::exp(1.0) - 1.0) / 3.0);
  auto v = eval_rls(x, d, 1.0);
  CHECK_FALSE(v.minus_infinity);
  CHECK(v.value == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(eval_rls(Vec::Zero(3), d, 1.0).value == 0.0);
  CHECK(eval_rls(Vec::Zero(3), d, 0.0).minus_infinity);
  CHECK_THROWS_AS(eval_rls(x, d, -1.0), Error);
}

TEST_CASE("log-sum lambda update is the derivative in the band norm") {
  const auto dict = make_finite_difference_dictionary(6, 5);
  const Vec x = random_vec(30, 3);
  const Vec n = dict.band_l1(dict.analyze(x));
  const double eps = 0.3, h = 1e-6;
  for (Index d = 0; d < dict.band_count(); ++d) {
    Vec a = n, b = n;
    a[d] += h;
    b[d] -= h;
    const double fd = (rls_from_norms(a, dict, eps).value - rls_from_norms(b, dict, eps).value) /
                      (2.0 * h);
    const double lam = static_cast<double>(dict.bands()[static_cast<std::size_t>(d)].size) /
                       (eps + n[d]);
    CHECK(fd == doctest::Approx(lam).epsilon(1e-7));
  }
}

TEST_CASE("log-sum-log penalty values") {
  const auto d = identity_band(1);
  Vec x(1);
  x << std::exp(1.0) - 1.0;
  Vec eps(1);
  eps << 1.0;
  const auto v = eval_rlsl(x, d, eps, 0.0);
  CHECK(v.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eval_rlsl(Vec::Zero(1), d, eps, 0.0).minus_infinity);
  CHECK_FALSE(eval_rlsl(Vec::Zero(1), d, eps, 0.1).minus_infinity);
  Vec bad(1);
  bad << 0.0;
  CHECK_THROWS_AS(eval_rlsl(x, d, bad, 0.0), Error);
}

TEST_CASE("log-sum-log equals its two-term split") {
  const auto dict = make_owt(Wavelet::db2, 2, 8, 8);
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x = random_vec(64, 20 + trial);
    Vec eps(dict.band_count());
    for (Index d = 0; d < eps.size(); ++d) eps[d] = 0.1 + rng.uniform();
    const double ve = 0.2 * rng.uniform();
    const auto whole = eval_rlsl(x, dict, eps, ve);
    const auto parts = rlsl_split(x, dict, eps, ve);
    const double sum = parts.magnitude_term + parts.band_term.value;
    CHECK(std::abs(whole.value - sum) <= 1e-12 * (1.0 + std::abs(sum)));
  }
}

TEST_CASE("penalties agree with a dense matrix evaluation") {
  const auto owt = make_owt(Wavelet::db1, 2, 8, 8);
  const auto fd = make_finite_difference_dictionary(8, 8);
  for (const auto* dict : {&owt, &fd}) {
    const Eigen::MatrixXd psi = dict->op().to_dense();
    const Vec x = random_vec(64, 5);
    const Vec c = psi * x;
    Vec eps(dict->band_count());
    for (Index d = 0; d < eps.size(); ++d) eps[d] = 0.2 + 0.1 * static_cast<double>(d);
    const double ve = 0.05;
    double rls = 0.0, rlsl = 0.0;
    for (std::size_t d = 0; d < dict->bands().size(); ++d) {
      const auto& b = dict->bands()[d];
      const double e = eps[static_cast<Index>(d)];
      double l1 = 0.0, q = 0.0;
      for (Index k = b.offset; k < b.offset + b.size; ++k) {
        l1 += std::abs(c[k]);
        q += std::log(1.0 + ve + std::abs(c[k]) / e);
      }
      rls += static_cast<double>(b.size) * std::log(0.5 + l1);
      for (Index k = b.offset; k < b.offset + b.size; ++k) {
        rlsl += std::log((e * (1.0 + ve) + std::abs(c[k])) * q);
      }
    }
    CHECK(eval_rls(x, *dict, 0.5).value == doctest::Approx(rls).epsilon(1e-12));
    CHECK(eval_rlsl(x, *dict, eps, ve).value == doctest::Approx(rlsl).epsilon(1e-12));
  }
}

TEST_CASE("log-sum-log falls without bound on a zero band") {
  // Two bands of four; the second is zero.
  const auto dict = banded_identity({4, 4});
  Vec x = Vec::Zero(8);
  x.head(4) << 1.0, -0.5, 2.0, 0.25;
  double prev = INFINITY;
  const double lo = std::log(0.5) + std::log(0.25) + std::log(2.0);
  for (int k = 1; k <= 8; ++k) {
    const double e = std::pow(10.0, -k);
    const Vec eps = Vec::Constant(2, e);
    const auto v = eval_rlsl(x, dict, eps, e);
    REQUIRE_FALSE(v.minus_infinity);
    CHECK(v.value < prev);
    prev = v.value;
    // Magnitude part of the active band stays between its limits.
    double mag = 0.0;
    for (Index i = 0; i < 4; ++i) mag += std::log(e * (1.0 + e) + std::abs(x[i]));
    CHECK(mag >= lo);
    CHECK(mag <= lo + 4.0 * std::log(1.2));
  }
  CHECK(prev < -100.0);
}

TEST_CASE("l1,0 and l0 + l0,0 counts") {
  const auto dict = make_finite_difference_dictionary(4, 4);
  const Index l = dict.total_rows();
  CHECK(eval_l10(Vec::Zero(16), dict) == 0.0);
  CHECK(eval_l10(random_vec(16, 1), dict) == static_cast<double>(l));
  Vec cols(16);  // constant down each column: vertical differences vanish
  for (Index j = 0; j < 4; ++j)
    for (Index i = 0; i < 4; ++i) cols[i + 4 * j] = static_cast<double>(j * j);
  CHECK(eval_l10(cols, dict) == static_cast<double>(l) / 2.0);

  const auto one = identity_band(4);
  CHECK(eval_l0_l00(Vec::Zero(4), one) == 0.0);
  Vec e1 = Vec::Zero(4);
  e1[0] = 3.0;
  CHECK(eval_l0_l00(e1, one) == 5.0);
  CHECK(eval_l0_l00(Vec::Constant(4, 1.0), one) == 8.0);
  // An explicit tolerance counts only larger entries.
  Vec small = e1;
  small[1] = 1e-3;
  CHECK(eval_l0_l00(small, one, 1e-2) == 5.0);
}

TEST_CASE("log-sum lift gradient") {
  const auto dict = make_owt(Wavelet::db1, 1, 4, 4);
  LiftedPoint origin{Vec::Zero(dict.total_rows()), Vec::Zero(16)};
  const Vec g0 = grad_g2_co_l1(origin, dict, 0.5);
  for (const auto& b : dict.bands()) {
    for (Index k = b.offset; k < b.offset + b.size; ++k) {
      CHECK(g0[k] == doctest::Approx(static_cast<double>(b.size) / 0.5));
    }
  }
  CHECK(g0.tail(16).isZero(0.0));

  for (int s = 0; s < 50; ++s) {
    const LiftedPoint p = random_feasible(dict, 100 + s);
    auto f = [&](const Vec& u) { return g2_co_l1({u, p.x}, dict, 0.5); };
    const Vec num = numeric_grad(f, p.u, 1e-6);
    const Vec ana = grad_g2_co_l1(p, dict, 0.5).head(dict.total_rows());
    CHECK((num - ana).norm() <= 1e-5 * ana.norm());
  }
}

TEST_CASE("log-sum lift gradient is Lipschitz with L_max^4 / eps^4") {
  const std::pair<Index, double> settings[] = {{1, 0.1}, {4, 0.5}, {16, 1.0}};
  for (auto [lmax, eps] : settings) {
    const auto dict = banded_identity({lmax, std::max<Index>(1, lmax / 2), 1});
    const Index l = dict.total_rows();
    const double beta = lipschitz_sq_co_l1(static_cast<double>(lmax), eps);
    Rng rng(static_cast<std::uint64_t>(lmax));
    int violations = 0;
    for (int t = 0; t < 10000; ++t) {
      // Mix of scales so that pairs straddle the eps knee.
      const double scale = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
      LiftedPoint a{Vec(l), Vec::Zero(l)}, b{Vec(l), Vec::Zero(l)};
      for (Index k = 0; k < l; ++k) {
        a.u[k] = scale * rng.uniform();
        b.u[k] = scale * rng.uniform();
      }
      const double lhs = (grad_g2_co_l1(a, dict, eps) - grad_g2_co_l1(b, dict, eps)).squaredNorm();
      const double rhs = beta * (a.u - b.u).squaredNorm();
      if (lhs > rhs * (1.0 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("log-sum-log lift gradient") {
  const auto one = identity_band(1);
  const double e = 0.4, ve = 0.3;
  Vec eps(1);
  eps << e;
  LiftedPoint origin{Vec::Zero(1), Vec::Zero(1)};
  CHECK(grad_g2_co_irw(origin, one, eps, ve)[0] ==
        doctest::Approx((1.0 / std::log1p(ve) + 1.0) / (e * (1.0 + ve))));

  const auto dict = make_owt(Wavelet::db2, 1, 8, 8);
  Vec ed(dict.band_count());
  for (Index d = 0; d < ed.size(); ++d) ed[d] = 0.3 + 0.2 * static_cast<double>(d);
  for (int s = 0; s < 50; ++s) {
    const LiftedPoint p = random_feasible(dict, 300 + s);
    auto f = [&](const Vec& u) { return g2_co_irw({u, p.x}, dict, ed, 0.1); };
    const Vec num = numeric_grad(f, p.u, 1e-6);
    const Vec ana = grad_g2_co_irw(p, dict, ed, 0.1).head(dict.total_rows());
    CHECK((num - ana).norm() <= 1e-5 * ana.norm());
  }
}

TEST_CASE("scalar log-sum-log gradient obeys the composed Lipschitz constant") {
  const auto one = identity_band(1);
  const std::pair<double, double> settings[] = {{0.1, 0.5}, {1.0, 0.1}, {0.5, 1.0}};
  for (auto [e, ve] : settings) {
    Vec eps(1);
    eps << e;
    const double beta = lipschitz_sq_co_irw_scalar(e, ve);
    // Direct composition: squared sum of the two pieces' derivative bounds.
    const double lg = std::log1p(ve);
    const double e2 = e * e;
    CHECK(beta == doctest::Approx(2.0 / e2 * (1.0 / e2 + 2.0 * (1.0 / (std::pow(lg, 4) * e2) +
                                                              1.0 / (e2 * lg * lg)))));
    Rng rng(7);
    int violations = 0;
    for (int t = 0; t < 10000; ++t) {
      const double scale = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
      LiftedPoint a{Vec::Constant(1, scale * rng.uniform()), Vec::Zero(1)};
      LiftedPoint b{Vec::Constant(1, scale * rng.uniform()), Vec::Zero(1)};
      const double lhs =
          std::pow(grad_g2_co_irw(a, one, eps, ve)[0] - grad_g2_co_irw(b, one, eps, ve)[0], 2);
      const double rhs = beta * std::pow(a.u[0] - b.u[0], 2);
      if (lhs > rhs * (1.0 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("tangent surrogates majorize") {
  const auto dict = make_finite_difference_dictionary(5, 5);
  const LinOp phi = make_dense(Eigen::MatrixXd::Identity(25, 25).topRows(12));
  const Vec y = random_vec(12, 9);
  Vec eps(dict.band_count());
  eps << 0.2, 0.7;

  const LiftedPoint a = random_feasible(dict, 1);
  CHECK(check_majorization_co_l1(a, a, dict, 0.3, 2.0, y, phi).holds);
  CHECK(check_majorization_co_irw(a, a, dict, eps, 0.1, 2.0, y, phi).holds);
  int bad_l1 = 0, bad_irw = 0;
  for (int s = 0; s < 100; ++s) {
    const LiftedPoint anchor = random_feasible(dict, 500 + s);
    const LiftedPoint probe = random_feasible(dict, 900 + s);
    bad_l1 += !check_majorization_co_l1(anchor, probe, dict, 0.3, 2.0, y, phi).holds;
    bad_irw += !check_majorization_co_irw(anchor, probe, dict, eps, 0.1, 2.0, y, phi).holds;
  }
  CHECK(bad_l1 == 0);
  CHECK(bad_irw == 0);

  LiftedPoint infeasible = a;
  infeasible.u.setZero();
  CHECK_THROWS_AS(check_majorization_co_l1(a, infeasible, dict, 0.3, 2.0, y, phi), Error);
}

TEST_CASE("scalar surrogate is the tangent line of log") {
  const auto one = identity_band(1);
  const LinOp phi = make_identity(1);
  const Vec y = Vec::Zero(1);
  const double eps = 0.25, u0 = 0.6;
  LiftedPoint anchor{Vec::Constant(1, u0), Vec::Constant(1, 0.1)};
  for (double u : {0.1, 0.6, 1.5, 4.0}) {
    LiftedPoint probe{Vec::Constant(1, u), Vec::Constant(1, 0.1)};
    const auto m = check_majorization_co_l1(anchor, probe, one, eps, 1.0, y, phi);
    const double data = 0.01;
    CHECK(m.surrogate - data ==
          doctest::Approx(std::log(eps + u0) + (u - u0) / (eps + u0)).epsilon(1e-13));
    CHECK(m.objective - data == doctest::Approx(std::log(eps + u)).epsilon(1e-13));
  }
}

TEST_CASE("log-sum to l0 gap") {
  const std::vector<double> seq = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  const Vec ones = Vec::Constant(6, -1.0);
  const auto t1 = logsum_l0_gap(ones, 1.0, seq);
  for (const auto& r : t1.rows) {
    CHECK(r.residual == doctest::Approx(6.0 * std::log1p(r.eps) / std::log(1.0 / r.eps)));
    CHECK(r.gamma_prime == doctest::Approx(1.0 / std::log(1.0 / r.eps)));
  }
  CHECK(t1.monotone);
  const auto t0 = logsum_l0_gap(Vec::Zero(5), 1.0, seq);
  for (const auto& r : t0.rows) CHECK(r.residual == 0.0);

  Rng rng(4);
  Vec x = Vec::Zero(100);
  for (int k = 0; k < 10; ++k) x[static_cast<Index>(rng.below(100))] = rng.normal();
  const auto tr = logsum_l0_gap(x, 1.0, seq);
  CHECK(tr.monotone);
  const double nnz = static_cast<double>((x.array() != 0.0).count());
  CHECK(std::abs(tr.rows.back().residual) < 0.05 * nnz);

  CHECK_THROWS_AS(logsum_l0_gap(x, 1.0, {0.5, 1.0}), Error);
  CHECK_THROWS_AS(logsum_l0_gap(x, 1.0, {1e-3, 1e-2}), Error);
}

TEST_CASE("band log prior") {
  const Vec z = random_vec(20, 6).cwiseAbs();
  const double eps = 0.3, ve = 0.0;
  // Diverges as lambda approaches 1 from above.
  double prev = INFINITY;
  for (int k = 2; k <= 12; k += 2) {
    const double v = log_prior(z, 1.0 + std::pow(10.0, -k), eps, ve, Field::real);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(log_prior(z, 1.0, eps, ve, Field::real), Error);
  CHECK_THROWS_AS(log_prior(z, 2.0, eps, ve, Field::complex), Error);

  // d/dlambda = L/(lambda - 1) - sum Q, zero at 1 + L / sum Q.
  const double qsum = 20.0 * mean_log_term(z, eps, ve);
  const double lam = 1.7, h = 1e-6;
  const double fd = (log_prior(z, lam + h, eps, ve, Field::real) -
                     log_prior(z, lam - h, eps, ve, Field::real)) /
                    (2.0 * h);
  CHECK(fd == doctest::Approx(20.0 / (lam - 1.0) - qsum).epsilon(1e-6));
  const double star = 1.0 + 20.0 / qsum;
  CHECK(star == doctest::Approx(lambda_profile(qsum / 20.0, Field::real)));
  const double fd_star = (log_prior(z, star + h, eps, ve, Field::real) -
                          log_prior(z, star - h, eps, ve, Field::real)) /
                         (2.0 * h);
  CHECK(std::abs(fd_star) < 1e-5);

  // Complex root of the stationarity condition.
  for (double q : {0.1, 0.5, 1.0, 3.0, 20.0}) {
    const double l = lambda_profile(q, Field::complex);
    CHECK(l > 2.0);
    CHECK(std::abs(1.0 / (l - 1.0) + 1.0 / (l - 2.0) - q) <= 1e-8);
  }
}
