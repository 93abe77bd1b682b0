#include "cirl/inner_solver.hpp"

#include <algorithm>
#include <cmath>

namespace cirl {

void InnerConfig::validate() const {
  if (max_iterations < 1) throw Error("InnerConfig: max_iterations must be >= 1");
  if (!(stop_tolerance > 0.0) || !(cg_tolerance > 0.0)) {
    throw Error("InnerConfig: tolerances must be positive");
  }
  if (cg_max_iterations < 1) throw Error("InnerConfig: cg_max_iterations must be >= 1");
  if (rho < 0.0) throw Error("InnerConfig: rho must be nonnegative");
  if (!(residual_tolerance > 0.0)) throw Error("InnerConfig: residual_tolerance must be positive");
}

Vec soft_threshold(const Vec& z, const Vec& tau) {
  if (z.size() != tau.size()) throw Error("soft_threshold: size mismatch");
  Vec out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double m = std::abs(z[i]) - tau[i];
    out[i] = m > 0.0 ? std::copysign(m, z[i]) : 0.0;
  }
  return out;
}

CVec soft_threshold(const CVec& z, const Vec& tau) {
  if (z.size() != tau.size()) throw Error("soft_threshold: size mismatch");
  CVec out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]);
    out[i] = a > tau[i] ? z[i] * ((a - tau[i]) / a) : cplx{0.0, 0.0};
  }
  return out;
}

Vec soft_threshold_storage(const Vec& s, const Vec& tau, Field field) {
  if (field == Field::real) return soft_threshold(s, tau);
  const Index l = tau.size();
  if (s.size() != 2 * l) throw Error("soft_threshold_storage: size mismatch");
  Vec out(2 * l);
  for (Index k = 0; k < l; ++k) {
    const double a = std::hypot(s[k], s[l + k]);
    const double f = a > tau[k] ? (a - tau[k]) / a : 0.0;
    out[k] = s[k] * f;
    out[l + k] = s[l + k] * f;
  }
  return out;
}

CgResult cg_solve(const SymmetricMap& apply_a, const Vec& b, const Vec& x0, double tolerance,
                  int max_iterations) {
  CgResult res;
  res.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    return res;
  }
  Vec ap(b.size());
  apply_a(res.x, ap);
  Vec r = b - ap;
  Vec p = r;
  double rr = r.squaredNorm();
  if (!std::isfinite(rr)) throw Error("cg_solve: non-finite value; check the operator");
  const double target = tolerance * bnorm;
  while (std::sqrt(rr) > target && res.iterations < max_iterations) {
    apply_a(p, ap);
    const double pap = p.dot(ap);
    if (!std::isfinite(pap)) throw Error("cg_solve: non-finite value; check the operator");
    if (pap <= 0.0) break;
    const double alpha = rr / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    if (!std::isfinite(rr_new)) throw Error("cg_solve: non-finite value; check the operator");
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++res.iterations;
  }
  res.relative_residual = std::sqrt(rr) / bnorm;
  return res;
}

Vec cg_solve(const SymmetricMap& apply_a, const Vec& b, const InnerConfig& cfg) {
  const Vec x0 = cfg.warm_start ? *cfg.warm_start : Vec::Zero(b.size());
  return cg_solve(apply_a, b, x0, cfg.cg_tolerance, cfg.cg_max_iterations).x;
}

Vec effective_weights(const CompositeDictionary& dict, const Vec& lambda, const Vec& w) {
  if (lambda.size() != dict.band_count()) throw Error("effective_weights: lambda size mismatch");
  const Index l = dict.total_rows();
  if (w.size() != 0 && w.size() != l) throw Error("effective_weights: weight size mismatch");
  Vec kappa(l);
  for (const auto& b : dict.bands()) {
    const double lam = lambda[&b - dict.bands().data()];
    for (Index k = b.offset; k < b.offset + b.size; ++k) {
      kappa[k] = w.size() ? lam * w[k] : lam;
    }
  }
  return kappa;
}

double weighted_objective(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                          const Vec& kappa, double gamma, const Vec& x) {
  const double data = (y - phi.forward(x)).squaredNorm();
  const Vec mag = dict.magnitudes(dict.analyze(x));
  return gamma * data + kappa.dot(mag);
}

namespace {

double median_positive(const Vec& v) {
  std::vector<double> pos;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) pos.push_back(v[i]);
  }
  if (pos.empty()) return 0.0;
  const std::size_t mid = pos.size() / 2;
  std::nth_element(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(mid), pos.end());
  return pos[mid];
}

// Expand per-row values to coefficient storage.
Vec to_storage(const Vec& per_row, Field field) {
  if (field == Field::real) return per_row;
  Vec s(2 * per_row.size());
  s << per_row, per_row;
  return s;
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

InnerResult solve_weighted_analysis_l1(const Vec& y, const LinOp& phi,
                                       const CompositeDictionary& dict, const Vec& lambda,
                                       const Vec& w, double gamma, const InnerConfig& cfg) {
  for (Index d = 0; d < lambda.size(); ++d) {
    if (!(lambda[d] >= 0.0)) throw Error("solve_weighted_analysis_l1: lambda must be >= 0");
  }
  for (Index k = 0; k < w.size(); ++k) {
    if (!(w[k] >= 0.0)) throw Error("solve_weighted_analysis_l1: weights must be >= 0");
  }
  return solve_weighted_analysis_l1(y, phi, dict, effective_weights(dict, lambda, w), gamma,
                                    cfg);
}

InnerResult solve_weighted_analysis_l1(const Vec& y, const LinOp& phi,
                                       const CompositeDictionary& dict, const Vec& kappa,
                                       double gamma, const InnerConfig& cfg) {
  cfg.validate();
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error("solve_weighted_analysis_l1: gamma must be positive and finite");
  }
  if (y.size() != phi.out_size()) throw Error("solve_weighted_analysis_l1: y does not match Phi");
  if (phi.in_size() != dict.op().in_size()) {
    throw Error("solve_weighted_analysis_l1: Phi and Psi domains differ");
  }
  if (kappa.size() != dict.total_rows()) {
    throw Error("solve_weighted_analysis_l1: threshold size mismatch");
  }
  if (!all_finite(y) || !all_finite(kappa)) {
    throw Error("solve_weighted_analysis_l1: non-finite input");
  }
  const LinOp& psi = dict.op();
  const Field field = dict.field();
  const Index n = phi.in_size();
  const Index ls = psi.out_size();

  // Rows with a zero threshold leave the splitting entirely.
  const Vec mask = to_storage((kappa.array() > 0.0).cast<double>().matrix(), field);
  const bool any_active = mask.sum() > 0.0;

  InnerResult res;
  res.x = cfg.warm_start ? *cfg.warm_start : Vec::Zero(n);
  if (res.x.size() != n) throw Error("solve_weighted_analysis_l1: warm start size mismatch");

  const Vec phit_y = phi.adjoint(y);
  Vec px(phi.out_size());
  Vec cx(ls);
  auto objective = [&](const Vec& x, const Vec& coeffs) {
    phi.apply(x, px);
    return gamma * (y - px).squaredNorm() + kappa.dot(dict.magnitudes(coeffs));
  };

  psi.apply(res.x, cx);
  double best = objective(res.x, cx);
  Vec best_x = res.x;

  double rho = cfg.rho > 0.0 ? cfg.rho : gamma * median_positive(kappa);
  if (!(rho > 0.0)) rho = gamma;

  Vec tau_row(kappa.size());
  Vec nu = Vec::Zero(ls);  // unscaled dual
  if (cfg.warm_dual && cfg.warm_dual->size() == ls) nu = cfg.warm_dual->cwiseProduct(mask);
  Vec z = cx.cwiseProduct(mask);

  Vec tmp_n(n), tmp_m(phi.out_size()), tmp_l(ls);
  double rho_now = rho;
  SymmetricMap apply_a = [&](const Vec& v, Vec& out) {
    phi.apply(v, tmp_m);
    phi.apply_adjoint(tmp_m, out);
    out *= 2.0 * gamma;
    if (any_active) {
      psi.apply(v, tmp_l);
      tmp_l.array() *= mask.array();
      psi.apply_adjoint(tmp_l, tmp_n);
      out += rho_now * tmp_n;
    }
  };

  Vec x = res.x;
  res.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iterations));
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    // x-update.
    Vec b = 2.0 * gamma * phit_y;
    if (any_active) {
      tmp_l = (rho_now * z - nu).cwiseProduct(mask);
      psi.apply_adjoint(tmp_l, tmp_n);
      b += tmp_n;
    }
    const Vec x_prev = x;
    x = cg_solve(apply_a, b, x, cfg.cg_tolerance, cfg.cg_max_iterations).x;
    if (!all_finite(x)) throw Error("solve_weighted_analysis_l1: iterate became non-finite");

    // z- and dual updates.
    psi.apply(x, cx);
    const Vec z_prev = z;
    if (any_active) {
      tau_row = kappa / rho_now;
      z = soft_threshold_storage(cx + nu / rho_now, tau_row, field).cwiseProduct(mask);
      nu += rho_now * (cx.cwiseProduct(mask) - z);
    }

    const double f = objective(x, cx);
    if (f < best) {
      best = f;
      best_x = x;
    }
    res.objective_trace.push_back(best);
    res.iterations_used = it;

    // Converged when x has settled and the splitting is consistent; the
    // x-change alone can stall while ADMM is still far from a solution.
    const double xn = x.norm();
    const double change = (x - x_prev).norm();
    double r_rel = 0.0, s_rel = 0.0;
    if (any_active) {
      const Vec cm = cx.cwiseProduct(mask);
      r_rel = (cm - z).norm() / std::max({cm.norm(), z.norm(), 1e-300});
      psi.apply_adjoint(z - z_prev, tmp_n);
      const double s_abs = rho_now * tmp_n.norm();
      psi.apply_adjoint(nu, tmp_n);
      s_rel = s_abs / std::max(tmp_n.norm(), 1e-300);
      if (s_abs == 0.0) s_rel = 0.0;
    }
    if (change <= cfg.stop_tolerance * (xn > 0.0 ? xn : 1.0) && r_rel <= cfg.residual_tolerance &&
        s_rel <= cfg.residual_tolerance) {
      res.converged = true;
      break;
    }

    if (cfg.adaptive_rho && any_active) {
      if (r_rel > 10.0 * s_rel) {
        rho_now *= 2.0;
      } else if (s_rel > 10.0 * r_rel) {
        rho_now *= 0.5;
      }
    }
  }
  if (cfg.monotone) {
    res.x = best_x;
    res.final_objective = best;
  } else {
    res.x = x;
    psi.apply(x, cx);
    res.final_objective = objective(x, cx);
  }
  res.dual = nu;
  return res;
}

}  // namespace cirl
