#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cirl/inner_solver.hpp"

namespace cirl {

// l1 is the fixed-weight baseline (lambda = 1, W = I).
enum class Algorithm { l1, co_l1, irw_l1, co_irw_l1_eps, co_irw_l1 };

Algorithm parse_algorithm(const std::string& name);  // accepts co-l1 and co_l1 spellings
std::string to_string(Algorithm a);                  // display name, e.g. "Co-IRW-L1"
std::string algorithm_key(Algorithm a);              // identifier, e.g. "co_irw_l1"

inline constexpr double kLambdaMax = 1e12;

inline InnerConfig last_iterate_inner() {
  InnerConfig c;
  c.monotone = false;
  return c;
}

struct OuterConfig {
  Algorithm algorithm = Algorithm::co_l1;
  int max_outer = 16;
  double outer_tolerance = 1e-6;  // relative change of x; 0 runs every iteration
  double eps = 0.0;               // guard of the Co-L1 and IRW-L1 updates
  Vec eps_d;                      // per-band scales for Co-IRW-L1-eps
  double vareps = 0.0;
  double gamma = 1.0;
  // Inner solves hand back their last iterate: with near-zero guards the
  // weights get so large that a best-iterate rule keeps returning the warm
  // start and the reweighting stalls.
  InnerConfig inner = last_iterate_inner();
  // Co-IRW-L1 only: keep eps_d fixed instead of estimating it.
  bool pin_eps = false;
  // Test hook: scale every lambda update by (1 + p) on odd and (1 - p) on
  // even iterations.
  double lambda_perturbation = 0.0;
  bool record_iterates = false;

  void validate(const CompositeDictionary& dict) const;
};

struct WeightState {
  Vec lambda;  // per band
  Vec w;       // per logical coefficient
  Vec eps;     // per band
  int t = 0;
};

struct TraceRecord {
  int t = 0;
  Vec lambda;   // lambda^(t+1), computed from x^(t)
  Vec eps;      // eps_d used with that lambda
  Vec band_l1;  // ||Psi_d x^(t)||_1
  double objective = 0.0;
  bool objective_minus_infinity = false;
  int inner_iterations = 0;
  double relative_change = 0.0;
};

struct RecoveryResult {
  Vec x_hat;
  std::vector<TraceRecord> trace;
  std::vector<Vec> iterates;  // x^(t), when requested
  std::vector<std::string> warnings;
  double wall_time = 0.0;
  bool converged = false;
};

struct LambdaEps {
  double lambda = 1.0;
  double eps = 1.0;
  double log_prior = 0.0;
  bool degenerate = false;  // all-zero band
};

// Root of the per-band stationarity condition for a mean log term qbar:
// 1 + 1/qbar (real) or (3 qbar + 2 + sqrt(qbar^2 + 4)) / (2 qbar) (complex),
// clamped to kLambdaMax.
double lambda_profile(double qbar, Field field);

// Joint maximizer of the per-band log prior over lambda in (1, inf) or
// (2, inf) and eps in [1e-6 s, 1e3 s], s the mean nonzero magnitude.
LambdaEps estimate_lambda_eps(const Vec& z_abs, Field field, double vareps);
inline constexpr double kEpsFloor = 1e-12;

RecoveryResult run_recovery(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                            const OuterConfig& cfg);
RecoveryResult run_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                      OuterConfig cfg);
RecoveryResult run_co_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                         OuterConfig cfg);
RecoveryResult run_irw_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                          OuterConfig cfg);
RecoveryResult run_co_irw_l1_eps(const Vec& y, const LinOp& phi,
                                 const CompositeDictionary& dict, OuterConfig cfg);
RecoveryResult run_co_irw_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                             OuterConfig cfg);

// Objective tracked for each algorithm: data term plus the log-sum penalty
// (Co-L1, IRW-L1 per coefficient), the log-sum-log penalty (Co-IRW-L1 and
// its fixed-eps form) or the l1 norm (baseline).
struct ObjectiveValue {
  double value = 0.0;
  bool minus_infinity = false;
};
ObjectiveValue outer_objective(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                               const OuterConfig& cfg, const Vec& eps_d, const Vec& x);

// Columns t, band, lambda, eps_d, band_l1_norm, objective, inner_iters.
void write_trace_csv(std::ostream& os, const RecoveryResult& r);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace cirl
