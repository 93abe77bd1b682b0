#include "doctest.h"

#include "cirl/inner_solver.hpp"
#include "cirl/rng.hpp"
#include "cirl/sampling.hpp"

using namespace cirl;

namespace {

Vec random_vec(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

Eigen::MatrixXd random_mat(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) a(i, j) = rng.normal();
  return a;
}

InnerConfig tight(int iters) {
  InnerConfig c;
  c.max_iterations = iters;
  c.stop_tolerance = 1e-12;
  c.cg_tolerance = 1e-13;
  c.cg_max_iterations = 500;
  return c;
}

}  // namespace

TEST_CASE("soft threshold") {
  Vec z(2), t(2);
  z << 1.2, -0.3;
  t << 0.5, 0.5;
  const Vec s = soft_threshold(z, t);
  CHECK(s[0] == doctest::Approx(0.7));
  CHECK(s[1] == 0.0);
  CVec c(2);
  c << cplx(3, 4), cplx(6, 8);
  Vec tc = Vec::Constant(2, 5.0);
  const CVec sc = soft_threshold(c, tc);
  CHECK(std::abs(sc[0]) == 0.0);
  CHECK(std::abs(sc[1] - cplx(3, 4)) < 1e-15);
  const Vec st = soft_threshold_storage(to_split(c), tc, Field::complex);
  CHECK((from_split(st) - sc).norm() < 1e-15);
}

TEST_CASE("conjugate gradients") {
  Vec b = random_vec(5, 1);
  SymmetricMap id = [](const Vec& v, Vec& out) { out = v; };
  auto r = cg_solve(id, b, Vec::Zero(5), 1e-12, 10);
  CHECK(r.iterations == 1);
  CHECK((r.x - b).norm() < 1e-14);

  Vec d(3), rhs(3);
  d << 1, 2, 4;
  rhs << 1, 2, 4;
  SymmetricMap diag = [&](const Vec& v, Vec& out) { out = d.cwiseProduct(v); };
  InnerConfig cfg;
  cfg.cg_tolerance = 1e-12;
  CHECK((cg_solve(diag, rhs, cfg) - Vec::Ones(3)).norm() < 1e-10);

  const Eigen::MatrixXd g = random_mat(20, 20, 2);
  const Eigen::MatrixXd spd = g * g.transpose() + 0.5 * Eigen::MatrixXd::Identity(20, 20);
  const Vec bb = random_vec(20, 3);
  SymmetricMap dense = [&](const Vec& v, Vec& out) { out = spd * v; };
  const Vec oracle = spd.llt().solve(bb);
  const Vec got = cg_solve(dense, bb, Vec::Zero(20), 1e-14, 200).x;
  CHECK((got - oracle).norm() <= 1e-8 * oracle.norm());

  SymmetricMap bad = [](const Vec& v, Vec& out) { out = v * std::nan(""); };
  CHECK_THROWS_AS(cg_solve(bad, bb, Vec::Zero(20), 1e-10, 10), Error);
}

TEST_CASE("zero weights give least squares") {
  const Eigen::MatrixXd a = random_mat(12, 12, 4) + 4.0 * Eigen::MatrixXd::Identity(12, 12);
  const LinOp phi = make_dense(a);
  const auto dict = make_single_band(make_identity(12));
  const Vec y = random_vec(12, 5);
  const auto res =
      solve_weighted_analysis_l1(y, phi, dict, Vec::Zero(1), Vec(), 3.0, tight(60));
  CHECK((y - a * res.x).norm() <= 1e-6 * y.norm());
}

TEST_CASE("identity lasso is a soft threshold") {
  const Index n = 16;
  const Vec y = random_vec(n, 6);
  const double gamma = 2.0;
  const auto dict = make_single_band(make_identity(n));
  const auto res = solve_weighted_analysis_l1(y, make_identity(n), dict, Vec::Ones(1), Vec(),
                                              gamma, tight(500));
  const Vec oracle = soft_threshold(y, Vec::Constant(n, 1.0 / (2.0 * gamma)));
  CHECK((res.x - oracle).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("subgradient optimality on a random instance") {
  const Index n = 32, m = 20;
  const Eigen::MatrixXd a = random_mat(m, n, 7);
  const Eigen::MatrixXd p = random_mat(n, n, 8) + 6.0 * Eigen::MatrixXd::Identity(n, n);
  const auto dict = make_single_band(make_dense(p));
  const Vec y = random_vec(m, 9);
  Rng rng(10);
  Vec w(n);
  for (Index k = 0; k < n; ++k) w[k] = 0.5 + rng.uniform();
  const double gamma = 1.0;
  const auto res =
      solve_weighted_analysis_l1(y, make_dense(a), dict, Vec::Ones(1), w, gamma, tight(5000));
  // With Psi invertible the subgradient certificate is unique:
  // v = -Psi^{-T} 2 gamma A^T (A x - y) must lie in kappa * d|Psi x|.
  const Vec g = 2.0 * gamma * a.transpose() * (a * res.x - y);
  const Vec v = -p.transpose().fullPivLu().solve(g);
  const Vec c = p * res.x;
  const double cmax = c.cwiseAbs().maxCoeff();
  int zeros = 0;
  for (Index k = 0; k < n; ++k) {
    if (std::abs(c[k]) > 1e-7 * cmax) {
      CHECK(std::abs(v[k] - w[k] * (c[k] > 0 ? 1.0 : -1.0)) < 1e-4);
    } else {
      ++zeros;
      CHECK(std::abs(v[k]) <= w[k] + 1e-4);
    }
  }
  CHECK(zeros > 0);
}

TEST_CASE("solver properties on a spread-spectrum instance") {
  const Index n = 64;
  const auto ss = make_spread_spectrum(n, 20, 11);
  const LinOp phi = split_real(ss.op);
  const auto dict = make_finite_difference_dictionary(8, 8);
  Vec x0 = Vec::Zero(n);
  x0.segment(16, 24).setConstant(1.0);
  const Vec y = phi.forward(x0) + 0.01 * random_vec(phi.out_size(), 12);
  Vec lambda(2);
  lambda << 0.7, 1.3;
  const double gamma = 50.0;
  const Vec kappa = effective_weights(dict, lambda, Vec());

  InnerConfig cfg;
  const auto res = solve_weighted_analysis_l1(y, phi, dict, lambda, Vec(), gamma, cfg);
  CHECK(std::isfinite(res.final_objective));
  CHECK(res.iterations_used <= cfg.max_iterations);
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
    CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-10);
  }
  const double f_zero = weighted_objective(y, phi, dict, kappa, gamma, Vec::Zero(n));
  const double f_bp = weighted_objective(y, phi, dict, kappa, gamma, phi.adjoint(y));
  CHECK(res.final_objective <= f_zero);
  CHECK(res.final_objective <= f_bp);
  CHECK(res.final_objective ==
        doctest::Approx(weighted_objective(y, phi, dict, kappa, gamma, res.x)).epsilon(1e-12));

  // Deterministic.
  const auto again = solve_weighted_analysis_l1(y, phi, dict, lambda, Vec(), gamma, cfg);
  CHECK(again.x == res.x);

  // A common positive scaling of gamma and lambda leaves the minimizer.
  const auto ref = solve_weighted_analysis_l1(y, phi, dict, lambda, Vec(), gamma, tight(3000));
  const auto scaled =
      solve_weighted_analysis_l1(y, phi, dict, 7.0 * lambda, Vec(), 7.0 * gamma, tight(3000));
  CHECK((scaled.x - ref.x).norm() <= 1e-5 * ref.x.norm());

  // Restarting at the minimizer with its dual stops almost immediately.
  InnerConfig warm;
  warm.warm_start = ref.x;
  warm.warm_dual = ref.dual;
  const auto w2 = solve_weighted_analysis_l1(y, phi, dict, lambda, Vec(), gamma, warm);
  CHECK(w2.iterations_used <= 2);
  CHECK(w2.converged);
}

TEST_CASE("inner solver input validation") {
  const auto dict = make_single_band(make_identity(4));
  const LinOp phi = make_identity(4);
  const Vec y = Vec::Ones(4);
  InnerConfig cfg;
  CHECK_THROWS_AS(solve_weighted_analysis_l1(y, phi, dict, Vec::Ones(1), Vec(), 0.0, cfg), Error);
  CHECK_THROWS_AS(solve_weighted_analysis_l1(Vec::Ones(3), phi, dict, Vec::Ones(1), Vec(), 1.0, cfg),
                  Error);
  CHECK_THROWS_AS(solve_weighted_analysis_l1(y, phi, dict, -Vec::Ones(1), Vec(), 1.0, cfg), Error);
  Vec bad = y;
  bad[0] = std::nan("");
  CHECK_THROWS_AS(solve_weighted_analysis_l1(bad, phi, dict, Vec::Ones(1), Vec(), 1.0, cfg), Error);
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(solve_weighted_analysis_l1(y, phi, dict, Vec::Ones(1), Vec(), 1.0, cfg), Error);
}
