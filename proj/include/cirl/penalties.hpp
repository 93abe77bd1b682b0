#pragma once

#include <vector>

#include "cirl/dictionary.hpp"
#include "cirl/linop.hpp"

namespace cirl {

// A penalty value that may be -infinity; the flag is used instead of a
// floating-point infinity.
struct PenaltyValue {
  double value = 0.0;
  bool minus_infinity = false;
};

// Lifted point v = [u; x] with slack magnitudes u_k >= |(Psi x)_k|.
struct LiftedPoint {
  Vec u;  // one entry per logical coefficient
  Vec x;  // signal storage
};

LiftedPoint tight_lift(const CompositeDictionary& dict, const Vec& x);
bool is_feasible(const CompositeDictionary& dict, const LiftedPoint& p, double tol = 1e-12);

// sum_d C_d L_d log(eps + ||Psi_d x||_1). With C_d = 1 this is the log-sum
// penalty; the factor makes the lambda update its exact derivative for
// complex bands too.
PenaltyValue eval_rls(const Vec& x, const CompositeDictionary& dict, double eps);
PenaltyValue rls_from_norms(const Vec& band_l1, const CompositeDictionary& dict, double eps);

// sum_d sum_l log[(eps_d (1 + vareps) + |z_l|) sum_i log(1 + vareps + |z_i| / eps_d)].
PenaltyValue eval_rlsl(const Vec& x, const CompositeDictionary& dict, const Vec& eps,
                       double vareps);
PenaltyValue rlsl_from_magnitudes(const Vec& mag, const CompositeDictionary& dict,
                                  const Vec& eps, double vareps);
// The two sums of the decoupled form: sum log(eps_d(1+vareps) + |z|) and
// sum_d L_d log sum_i Q_{d,i}.
struct RlslSplit {
  double magnitude_term = 0.0;
  PenaltyValue band_term;
};
RlslSplit rlsl_split(const Vec& x, const CompositeDictionary& dict, const Vec& eps,
                     double vareps);

// sum_d L_d 1{||Psi_d x||_1 > tol}; tol < 0 selects 1e-8 ||Psi x||_inf.
double eval_l10(const Vec& x, const CompositeDictionary& dict, double tol = -1.0);
// ||Psi x||_0 + sum_d L_d 1{||Psi_d x||_0 > 0}.
double eval_l0_l00(const Vec& x, const CompositeDictionary& dict, double tol = -1.0);

// Concave lifted terms and their gradients over v = [u; x]; x-entries of
// the gradient are zero.
double g2_co_l1(const LiftedPoint& p, const CompositeDictionary& dict, double eps);
Vec grad_g2_co_l1(const LiftedPoint& p, const CompositeDictionary& dict, double eps);
double g2_co_irw(const LiftedPoint& p, const CompositeDictionary& dict, const Vec& eps,
                 double vareps);
Vec grad_g2_co_irw(const LiftedPoint& p, const CompositeDictionary& dict, const Vec& eps,
                   double vareps);

// Squared Lipschitz constants of the gradients above: L_max^4 / eps^4 for
// the log-sum lift, and for a single scalar band of the log-sum-log lift
// 2 [1/eps^4 + (2/eps^2)(1/(eps^2 log(1+vareps)^4) + 1/(eps^2 log(1+vareps)^2))].
double lipschitz_sq_co_l1(double l_max, double eps);
double lipschitz_sq_co_irw_scalar(double eps, double vareps);

struct MajorizationCheck {
  double objective = 0.0;  // g at the probe
  double surrogate = 0.0;  // tangent surrogate at the probe
  double gap = 0.0;        // surrogate - objective
  bool holds = false;
};

// g(v) = gamma ||y - Phi x||^2 + g2(u) against its tangent at the anchor.
// holds requires gap >= -1e-10 (1 + |g|), and |gap| <= 1e-12 (1 + |g|) when
// probe and anchor coincide.
MajorizationCheck check_majorization_co_l1(const LiftedPoint& anchor, const LiftedPoint& probe,
                                           const CompositeDictionary& dict, double eps,
                                           double gamma, const Vec& y, const LinOp& phi);
MajorizationCheck check_majorization_co_irw(const LiftedPoint& anchor,
                                            const LiftedPoint& probe,
                                            const CompositeDictionary& dict, const Vec& eps,
                                            double vareps, double gamma, const Vec& y,
                                            const LinOp& phi);

struct GapRow {
  double eps = 0.0;
  double gamma_prime = 0.0;  // gamma / log(1/eps)
  double residual = 0.0;     // sum_{x_n != 0} log(eps + |x_n|) / log(1/eps)
};
struct GapTable {
  std::vector<GapRow> rows;
  bool monotone = false;  // |residual| nonincreasing along the sequence
};

// Log-sum to l0 gap along a decreasing sequence of eps in (0, 1).
GapTable logsum_l0_gap(const Vec& x, double gamma, const std::vector<double>& eps_sequence);

// Per-band log prior up to an additive constant:
//   real:    L [log(lambda - 1) - log eps] - lambda sum_l Q_l
//   complex: L [log((lambda - 1)(lambda - 2)) - 2 log eps] - lambda sum_l Q_l
// with Q_l = log(1 + vareps + z_l / eps). Constants log(1/2) and log(1/(2 pi))
// per coefficient are dropped.
double log_prior(const Vec& z_abs, double lambda, double eps, double vareps, Field field);
double mean_log_term(const Vec& z_abs, double eps, double vareps);

}  // namespace cirl
