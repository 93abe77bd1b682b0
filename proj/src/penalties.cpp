#include "cirl/penalties.hpp"

#include <cmath>

namespace cirl {

LiftedPoint tight_lift(const CompositeDictionary& dict, const Vec& x) {
  return {dict.magnitudes(dict.analyze(x)), x};
}

bool is_feasible(const CompositeDictionary& dict, const LiftedPoint& p, double tol) {
  if (p.u.size() != dict.total_rows() || p.x.size() != dict.op().in_size()) return false;
  const Vec mag = dict.magnitudes(dict.analyze(p.x));
  for (Index k = 0; k < mag.size(); ++k) {
    if (p.u[k] < mag[k] - tol * (1.0 + mag[k])) return false;
  }
  return true;
}

PenaltyValue rls_from_norms(const Vec& band_l1, const CompositeDictionary& dict, double eps) {
  PenaltyValue v;
  const double c = dict.field_constant();
  for (Index d = 0; d < dict.band_count(); ++d) {
    const double arg = eps + band_l1[d];
    if (arg <= 0.0) {
      v.minus_infinity = true;
      continue;
    }
    v.value += c * static_cast<double>(dict.bands()[static_cast<std::size_t>(d)].size) *
               std::log(arg);
  }
  if (v.minus_infinity) v.value = 0.0;
  return v;
}

PenaltyValue eval_rls(const Vec& x, const CompositeDictionary& dict, double eps) {
  if (eps < 0.0) throw Error("eval_rls: eps must be nonnegative");
  return rls_from_norms(dict.band_l1(dict.analyze(x)), dict, eps);
}

namespace {

void check_eps(const Vec& eps, const CompositeDictionary& dict) {
  if (eps.size() != dict.band_count()) throw Error("eps must have one entry per band");
  for (Index d = 0; d < eps.size(); ++d) {
    if (!(eps[d] > 0.0)) throw Error("eps_d must be positive");
  }
}

double band_q_sum(const Vec& mag, const Band& b, double eps, double vareps) {
  double q = 0.0;
  for (Index k = b.offset; k < b.offset + b.size; ++k) q += std::log1p(vareps + mag[k] / eps);
  return q;
}

}  // namespace

PenaltyValue rlsl_from_magnitudes(const Vec& mag, const CompositeDictionary& dict,
                                  const Vec& eps, double vareps) {
  check_eps(eps, dict);
  if (vareps < 0.0) throw Error("eval_rlsl: vareps must be nonnegative");
  PenaltyValue v;
  for (std::size_t d = 0; d < dict.bands().size(); ++d) {
    const auto& b = dict.bands()[d];
    const double e = eps[static_cast<Index>(d)];
    const double q = band_q_sum(mag, b, e, vareps);
    if (q <= 0.0) {
      v.minus_infinity = true;
      continue;
    }
    for (Index k = b.offset; k < b.offset + b.size; ++k) {
      v.value += std::log((e * (1.0 + vareps) + mag[k]) * q);
    }
  }
  if (v.minus_infinity) v.value = 0.0;
  return v;
}

PenaltyValue eval_rlsl(const Vec& x, const CompositeDictionary& dict, const Vec& eps,
                       double vareps) {
  return rlsl_from_magnitudes(dict.magnitudes(dict.analyze(x)), dict, eps, vareps);
}

RlslSplit rlsl_split(const Vec& x, const CompositeDictionary& dict, const Vec& eps,
                     double vareps) {
  check_eps(eps, dict);
  const Vec mag = dict.magnitudes(dict.analyze(x));
  RlslSplit s;
  for (std::size_t d = 0; d < dict.bands().size(); ++d) {
    const auto& b = dict.bands()[d];
    const double e = eps[static_cast<Index>(d)];
    for (Index k = b.offset; k < b.offset + b.size; ++k) {
      s.magnitude_term += std::log(e * (1.0 + vareps) + mag[k]);
    }
    const double q = band_q_sum(mag, b, e, vareps);
    if (q <= 0.0) {
      s.band_term.minus_infinity = true;
    } else {
      s.band_term.value += static_cast<double>(b.size) * std::log(q);
    }
  }
  if (s.band_term.minus_infinity) s.band_term.value = 0.0;
  return s;
}

namespace {

double default_tol(const Vec& mag, double tol) {
  if (tol >= 0.0) return tol;
  return 1e-8 * (mag.size() ? mag.maxCoeff() : 0.0);
}

}  // namespace

double eval_l10(const Vec& x, const CompositeDictionary& dict, double tol) {
  const Vec mag = dict.magnitudes(dict.analyze(x));
  const double t = default_tol(mag, tol);
  double out = 0.0;
  for (const auto& b : dict.bands()) {
    if (mag.segment(b.offset, b.size).sum() > t) out += static_cast<double>(b.size);
  }
  return out;
}

double eval_l0_l00(const Vec& x, const CompositeDictionary& dict, double tol) {
  const Vec mag = dict.magnitudes(dict.analyze(x));
  const double t = default_tol(mag, tol);
  double out = 0.0;
  for (const auto& b : dict.bands()) {
    Index nnz = 0;
    for (Index k = b.offset; k < b.offset + b.size; ++k) nnz += mag[k] > t;
    out += static_cast<double>(nnz);
    if (nnz > 0) out += static_cast<double>(b.size);
  }
  return out;
}

double g2_co_l1(const LiftedPoint& p, const CompositeDictionary& dict, double eps) {
  double g = 0.0;
  const double c = dict.field_constant();
  for (const auto& b : dict.bands()) {
    g += c * static_cast<double>(b.size) * std::log(eps + p.u.segment(b.offset, b.size).sum());
  }
  return g;
}

Vec grad_g2_co_l1(const LiftedPoint& p, const CompositeDictionary& dict, double eps) {
  if (!(eps > 0.0)) throw Error("grad_g2_co_l1: eps must be positive");
  const Index l = dict.total_rows();
  Vec g = Vec::Zero(l + p.x.size());
  const double c = dict.field_constant();
  for (const auto& b : dict.bands()) {
    const double v = c * static_cast<double>(b.size) / (eps + p.u.segment(b.offset, b.size).sum());
    g.segment(b.offset, b.size).setConstant(v);
  }
  return g;
}

double g2_co_irw(const LiftedPoint& p, const CompositeDictionary& dict, const Vec& eps,
                 double vareps) {
  check_eps(eps, dict);
  double g = 0.0;
  for (std::size_t d = 0; d < dict.bands().size(); ++d) {
    const auto& b = dict.bands()[d];
    const double e = eps[static_cast<Index>(d)];
    const double q = band_q_sum(p.u, b, e, vareps);
    g += static_cast<double>(b.size) * std::log(q);
    for (Index k = b.offset; k < b.offset + b.size; ++k) g += std::log(e * (1.0 + vareps) + p.u[k]);
  }
  return g;
}

Vec grad_g2_co_irw(const LiftedPoint& p, const CompositeDictionary& dict, const Vec& eps,
                   double vareps) {
  check_eps(eps, dict);
  const Index l = dict.total_rows();
  Vec g = Vec::Zero(l + p.x.size());
  for (std::size_t d = 0; d < dict.bands().size(); ++d) {
    const auto& b = dict.bands()[d];
    const double e = eps[static_cast<Index>(d)];
    const double lam = static_cast<double>(b.size) / band_q_sum(p.u, b, e, vareps) + 1.0;
    for (Index k = b.offset; k < b.offset + b.size; ++k) {
      g[k] = lam / (e * (1.0 + vareps) + p.u[k]);
    }
  }
  return g;
}

double lipschitz_sq_co_l1(double l_max, double eps) {
  return std::pow(l_max, 4) / std::pow(eps, 4);
}

double lipschitz_sq_co_irw_scalar(double eps, double vareps) {
  const double lg = std::log1p(vareps);
  const double e2 = eps * eps;
  return 2.0 * (1.0 / (e2 * e2) +
                (2.0 / e2) * (1.0 / (e2 * std::pow(lg, 4)) + 1.0 / (e2 * lg * lg)));
}

namespace {

template <class G2, class Grad>
MajorizationCheck majorize(const LiftedPoint& anchor, const LiftedPoint& probe,
                           const CompositeDictionary& dict, double gamma, const Vec& y,
                           const LinOp& phi, G2 g2, Grad grad) {
  if (!is_feasible(dict, anchor) || !is_feasible(dict, probe)) {
    throw Error("check_majorization: infeasible lifted point");
  }
  const double data = gamma * (y - phi.forward(probe.x)).squaredNorm();
  const Index l = dict.total_rows();
  const Vec gr = grad(anchor);
  MajorizationCheck c;
  c.objective = data + g2(probe);
  c.surrogate = data + g2(anchor) + gr.head(l).dot(probe.u - anchor.u);
  c.gap = c.surrogate - c.objective;
  const double scale = 1.0 + std::abs(c.objective);
  const bool same = (probe.u - anchor.u).norm() == 0.0 && (probe.x - anchor.x).norm() == 0.0;
  c.holds = same ? std::abs(c.gap) <= 1e-12 * scale : c.gap >= -1e-10 * scale;
  return c;
}

}  // namespace

MajorizationCheck check_majorization_co_l1(const LiftedPoint& anchor, const LiftedPoint& probe,
                                           const CompositeDictionary& dict, double eps,
                                           double gamma, const Vec& y, const LinOp& phi) {
  return majorize(
      anchor, probe, dict, gamma, y, phi,
      [&](const LiftedPoint& p) { return g2_co_l1(p, dict, eps); },
      [&](const LiftedPoint& p) { return grad_g2_co_l1(p, dict, eps); });
}

MajorizationCheck check_majorization_co_irw(const LiftedPoint& anchor,
                                            const LiftedPoint& probe,
                                            const CompositeDictionary& dict, const Vec& eps,
                                            double vareps, double gamma, const Vec& y,
                                            const LinOp& phi) {
  return majorize(
      anchor, probe, dict, gamma, y, phi,
      [&](const LiftedPoint& p) { return g2_co_irw(p, dict, eps, vareps); },
      [&](const LiftedPoint& p) { return grad_g2_co_irw(p, dict, eps, vareps); });
}

GapTable logsum_l0_gap(const Vec& x, double gamma, const std::vector<double>& eps_sequence) {
  GapTable t;
  double prev_eps = 1.0;
  for (double e : eps_sequence) {
    if (!(e > 0.0) || e >= 1.0) throw Error("logsum_l0_gap: eps must lie in (0, 1)");
    if (e >= prev_eps && !t.rows.empty()) throw Error("logsum_l0_gap: eps must decrease");
    prev_eps = e;
    const double inv = std::log(1.0 / e);
    double r = 0.0;
    for (Index n = 0; n < x.size(); ++n) {
      if (x[n] != 0.0) r += std::log(e + std::abs(x[n]));
    }
    t.rows.push_back({e, gamma / inv, r / inv});
  }
  t.monotone = true;
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    if (std::abs(t.rows[i].residual) > std::abs(t.rows[i - 1].residual)) t.monotone = false;
  }
  return t;
}

double mean_log_term(const Vec& z_abs, double eps, double vareps) {
  double q = 0.0;
  for (Index i = 0; i < z_abs.size(); ++i) q += std::log1p(vareps + z_abs[i] / eps);
  return q / static_cast<double>(z_abs.size());
}

double log_prior(const Vec& z_abs, double lambda, double eps, double vareps, Field field) {
  if (z_abs.size() == 0) throw Error("log_prior: empty band");
  if (!(eps > 0.0)) throw Error("log_prior: eps must be positive");
  const double lo = field == Field::complex ? 2.0 : 1.0;
  if (!(lambda > lo) || !std::isfinite(lambda)) throw Error("log_prior: lambda outside its domain");
  const double l = static_cast<double>(z_abs.size());
  const double qsum = l * mean_log_term(z_abs, eps, vareps);
  if (field == Field::real) return l * (std::log(lambda - 1.0) - std::log(eps)) - lambda * qsum;
  return l * (std::log((lambda - 1.0) * (lambda - 2.0)) - 2.0 * std::log(eps)) - lambda * qsum;
}

}  // namespace cirl
