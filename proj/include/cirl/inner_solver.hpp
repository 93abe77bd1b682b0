#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cirl/dictionary.hpp"
#include "cirl/linop.hpp"

namespace cirl {

struct InnerConfig {
  int max_iterations = 60;
  double stop_tolerance = 1e-6;   // relative change of x
  double rho = 0.0;               // splitting penalty; 0 picks gamma * median weight
  bool adaptive_rho = true;       // residual balancing
  double cg_tolerance = 1e-8;
  int cg_max_iterations = 150;
  // Return the best-objective iterate (starting point included) rather
  // than the last one.
  bool monotone = true;
  // Relative primal/dual residual bound that must also hold to stop.
  double residual_tolerance = 1e-4;
  std::optional<Vec> warm_start;  // previous x
  std::optional<Vec> warm_dual;   // previous dual (rho * scaled dual), coefficient storage

  void validate() const;
};

struct InnerResult {
  Vec x;
  Vec dual;
  int iterations_used = 0;
  double final_objective = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // best objective after each iteration
};

// Entrywise sign(z) max(|z| - tau, 0).
Vec soft_threshold(const Vec& z, const Vec& tau);
// Magnitude shrinkage keeping the phase.
CVec soft_threshold(const CVec& z, const Vec& tau);
// Same on coefficient storage: real entries, or [re; im] groups when complex.
Vec soft_threshold_storage(const Vec& s, const Vec& tau, Field field);

struct CgResult {
  Vec x;
  int iterations = 0;
  double relative_residual = 0.0;
};

using SymmetricMap = std::function<void(const Vec&, Vec&)>;

// Conjugate gradients for a symmetric positive semidefinite map.
CgResult cg_solve(const SymmetricMap& apply_a, const Vec& b, const Vec& x0, double tolerance,
                  int max_iterations);
Vec cg_solve(const SymmetricMap& apply_a, const Vec& b, const InnerConfig& cfg);

// Per-row thresholds kappa_k = lambda_{d(k)} w_k; empty w means all ones.
Vec effective_weights(const CompositeDictionary& dict, const Vec& lambda, const Vec& w);

// gamma ||y - Phi x||^2 + sum_k kappa_k |(Psi x)_k|.
double weighted_objective(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                          const Vec& kappa, double gamma, const Vec& x);

// argmin_x gamma ||y - Phi x||^2 + sum_d lambda_d ||W_d Psi_d x||_1 by ADMM on
// z = Psi x. The returned iterate is the best one seen, so the objective
// never exceeds its value at the starting point.
InnerResult solve_weighted_analysis_l1(const Vec& y, const LinOp& phi,
                                       const CompositeDictionary& dict, const Vec& lambda,
                                       const Vec& w, double gamma, const InnerConfig& cfg);

// Same with precomputed per-row thresholds.
InnerResult solve_weighted_analysis_l1(const Vec& y, const LinOp& phi,
                                       const CompositeDictionary& dict, const Vec& kappa,
                                       double gamma, const InnerConfig& cfg);

}  // namespace cirl
