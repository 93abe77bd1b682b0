#include "cirl/reweighting.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

#include "cirl/penalties.hpp"

namespace cirl {

Algorithm parse_algorithm(const std::string& name) {
  std::string k = name;
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (k == "l1") return Algorithm::l1;
  if (k == "co_l1") return Algorithm::co_l1;
  if (k == "irw_l1") return Algorithm::irw_l1;
  if (k == "co_irw_l1_eps") return Algorithm::co_irw_l1_eps;
  if (k == "co_irw_l1") return Algorithm::co_irw_l1;
  throw Error("unknown algorithm: " + name);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::l1:
      return "L1";
    case Algorithm::co_l1:
      return "Co-L1";
    case Algorithm::irw_l1:
      return "IRW-L1";
    case Algorithm::co_irw_l1_eps:
      return "Co-IRW-L1-eps";
    case Algorithm::co_irw_l1:
      return "Co-IRW-L1";
  }
  return "?";
}

std::string algorithm_key(Algorithm a) {
  switch (a) {
    case Algorithm::l1:
      return "l1";
    case Algorithm::co_l1:
      return "co_l1";
    case Algorithm::irw_l1:
      return "irw_l1";
    case Algorithm::co_irw_l1_eps:
      return "co_irw_l1_eps";
    case Algorithm::co_irw_l1:
      return "co_irw_l1";
  }
  return "?";
}

void OuterConfig::validate(const CompositeDictionary& dict) const {
  if (max_outer < 1) throw Error("OuterConfig: max_outer must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error("OuterConfig: gamma must be positive");
  if (eps < 0.0 || vareps < 0.0) throw Error("OuterConfig: eps and vareps must be >= 0");
  if (!(outer_tolerance >= 0.0)) throw Error("OuterConfig: outer_tolerance must be >= 0");
  const bool needs_eps_d =
      algorithm == Algorithm::co_irw_l1_eps || (algorithm == Algorithm::co_irw_l1 && pin_eps);
  if (needs_eps_d) {
    if (eps_d.size() != dict.band_count()) throw Error("OuterConfig: eps_d needs one entry per band");
    for (Index d = 0; d < eps_d.size(); ++d) {
      if (!(eps_d[d] > 0.0)) throw Error("OuterConfig: eps_d must be positive");
    }
  }
  inner.validate();
}

double lambda_profile(double qbar, Field field) {
  if (!(qbar > 0.0)) return kLambdaMax;
  const double lam = field == Field::real
                         ? 1.0 + 1.0 / qbar
                         : (3.0 * qbar + 2.0 + std::sqrt(qbar * qbar + 4.0)) / (2.0 * qbar);
  return std::min(lam, kLambdaMax);
}

namespace {

double profile_value(const Vec& z, double eps, double vareps, Field field) {
  const double q = mean_log_term(z, eps, vareps);
  const double lam = lambda_profile(q, field);
  return log_prior(z, lam, eps, vareps, field);
}

}  // namespace

LambdaEps estimate_lambda_eps(const Vec& z_abs, Field field, double vareps) {
  if (z_abs.size() == 0) throw Error("estimate_lambda_eps: empty band");
  if (vareps < 0.0) throw Error("estimate_lambda_eps: vareps must be >= 0");
  double sum = 0.0;
  Index nz = 0;
  for (Index i = 0; i < z_abs.size(); ++i) {
    if (z_abs[i] < 0.0 || !std::isfinite(z_abs[i])) {
      throw Error("estimate_lambda_eps: magnitudes must be finite and nonnegative");
    }
    if (z_abs[i] > 0.0) {
      sum += z_abs[i];
      ++nz;
    }
  }
  LambdaEps out;
  if (nz == 0) {
    out.lambda = kLambdaMax;
    out.eps = kEpsFloor;
    out.degenerate = true;
    return out;
  }
  const double s = sum / static_cast<double>(nz);
  const double lo = std::log(1e-6 * s), hi = std::log(1e3 * s);
  constexpr int kGrid = 40;
  auto g = [&](double le) { return profile_value(z_abs, std::exp(le), vareps, field); };

  int best_i = 0;
  double best_v = -INFINITY;
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = lo + (hi - lo) * i / (kGrid - 1);
    const double v = g(grid[i]);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  double best_le = grid[best_i];
  // Golden-section refinement on the bracketing cell pair.
  double a = grid[std::max(best_i - 1, 0)];
  double b = grid[std::min(best_i + 1, kGrid - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = g(c), fd = g(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = g(d);
    }
  }
  const double le = 0.5 * (a + b);
  const double v = g(le);
  if (v > best_v) {
    best_v = v;
    best_le = le;
  }
  out.eps = std::exp(best_le);
  out.lambda = lambda_profile(mean_log_term(z_abs, out.eps, vareps), field);
  out.log_prior = best_v;
  return out;
}

ObjectiveValue outer_objective(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                               const OuterConfig& cfg, const Vec& eps_d, const Vec& x) {
  ObjectiveValue o;
  const double data = cfg.gamma * (y - phi.forward(x)).squaredNorm();
  const Vec mag = dict.magnitudes(dict.analyze(x));
  PenaltyValue p;
  switch (cfg.algorithm) {
    case Algorithm::l1:
      p.value = mag.sum();
      break;
    case Algorithm::co_l1:
      p = rls_from_norms(dict.band_l1(dict.analyze(x)), dict, cfg.eps);
      break;
    case Algorithm::irw_l1: {
      const double c = dict.field_constant();
      for (Index k = 0; k < mag.size(); ++k) {
        if (cfg.eps + mag[k] <= 0.0) {
          p.minus_infinity = true;
        } else {
          p.value += c * std::log(cfg.eps + mag[k]);
        }
      }
      break;
    }
    case Algorithm::co_irw_l1_eps:
    case Algorithm::co_irw_l1:
      p = rlsl_from_magnitudes(mag, dict, eps_d, cfg.vareps);
      break;
  }
  o.minus_infinity = p.minus_infinity;
  o.value = p.minus_infinity ? 0.0 : data + p.value;
  return o;
}

namespace {

// Carry the dual of the previous inner solve to new thresholds.
Vec rescale_dual(const Vec& dual, const Vec& kappa_old, const Vec& kappa_new, Field field) {
  const Index l = kappa_new.size();
  Vec out = dual;
  for (Index k = 0; k < l; ++k) {
    const double f = kappa_old[k] > 0.0 ? kappa_new[k] / kappa_old[k] : 0.0;
    if (field == Field::real) {
      out[k] = std::clamp(out[k] * f, -kappa_new[k], kappa_new[k]);
    } else {
      double re = out[k] * f, im = out[l + k] * f;
      const double m = std::hypot(re, im);
      if (m > kappa_new[k]) {
        re *= kappa_new[k] / m;
        im *= kappa_new[k] / m;
      }
      out[k] = re;
      out[l + k] = im;
    }
  }
  return out;
}

// Updates lambda, w and eps from x^(t); returns true if a clamp fired.
bool update_weights(const OuterConfig& cfg, const CompositeDictionary& dict, const Vec& mag,
                    const Vec& band_l1, WeightState& st, std::vector<std::string>& warnings) {
  const Index nb = dict.band_count();
  const double c = dict.field_constant();
  const Field field = dict.field();
  bool clamped = false;
  switch (cfg.algorithm) {
    case Algorithm::l1:
      break;
    case Algorithm::co_l1: {
      const double smax = band_l1.size() ? band_l1.maxCoeff() : 0.0;
      const double floor = 1e-12 * (smax > 0.0 ? smax : 1.0);
      for (Index d = 0; d < nb; ++d) {
        const double den = cfg.eps + band_l1[d];
        if (den < floor) clamped = true;
        st.lambda[d] = c * static_cast<double>(dict.bands()[static_cast<std::size_t>(d)].size) /
                       std::max(den, floor);
      }
      break;
    }
    case Algorithm::irw_l1: {
      const double zmax = mag.size() ? mag.maxCoeff() : 0.0;
      const double floor = 1e-12 * (zmax > 0.0 ? zmax : 1.0);
      for (Index k = 0; k < mag.size(); ++k) {
        const double den = cfg.eps + mag[k];
        if (den < floor) clamped = true;
        st.w[k] = 1.0 / std::max(den, floor);
      }
      break;
    }
    case Algorithm::co_irw_l1_eps:
    case Algorithm::co_irw_l1: {
      for (Index d = 0; d < nb; ++d) {
        const auto& b = dict.bands()[static_cast<std::size_t>(d)];
        const Vec z = mag.segment(b.offset, b.size);
        if (cfg.algorithm == Algorithm::co_irw_l1 && !cfg.pin_eps) {
          const LambdaEps le = estimate_lambda_eps(z, field, cfg.vareps);
          if (le.degenerate) clamped = true;
          st.lambda[d] = le.lambda;
          st.eps[d] = le.eps;
        } else {
          const double q = mean_log_term(z, st.eps[d], cfg.vareps);
          if (!(q > 0.0)) clamped = true;
          st.lambda[d] = lambda_profile(q, field);
        }
        for (Index k = b.offset; k < b.offset + b.size; ++k) {
          st.w[k] = 1.0 / (st.eps[d] * (1.0 + cfg.vareps) + mag[k]);
        }
      }
      break;
    }
  }
  if (clamped) {
    warnings.push_back("iteration " + std::to_string(st.t) +
                       ": zero band or coefficient, weight clamped");
  }
  if (cfg.lambda_perturbation != 0.0 && cfg.algorithm != Algorithm::l1) {
    const double f = (st.t % 2 == 1) ? 1.0 + cfg.lambda_perturbation
                                     : 1.0 - cfg.lambda_perturbation;
    st.lambda *= f;
  }
  return clamped;
}

RecoveryResult run_outer(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                         const OuterConfig& cfg) {
  cfg.validate(dict);
  const auto start = std::chrono::steady_clock::now();
  const Index nb = dict.band_count();
  const Index l = dict.total_rows();

  WeightState st;
  st.lambda = Vec::Ones(nb);
  st.w = Vec::Ones(l);
  if (cfg.algorithm == Algorithm::co_irw_l1_eps ||
      (cfg.algorithm == Algorithm::co_irw_l1 && cfg.pin_eps)) {
    st.eps = cfg.eps_d;
  } else if (cfg.algorithm == Algorithm::co_irw_l1) {
    st.eps = Vec::Ones(nb);
  } else {
    st.eps = Vec::Constant(nb, cfg.eps);
  }

  RecoveryResult res;
  Vec x = cfg.inner.warm_start ? *cfg.inner.warm_start : Vec::Zero(phi.in_size());
  Vec dual;
  Vec kappa_prev;
  InnerConfig inner = cfg.inner;
  for (int t = 1; t <= cfg.max_outer; ++t) {
    st.t = t;
    const Vec kappa = effective_weights(dict, st.lambda, st.w);
    inner.warm_start = x;
    if (dual.size()) {
      inner.warm_dual = rescale_dual(dual, kappa_prev, kappa, dict.field());
    } else {
      inner.warm_dual.reset();
    }
    const InnerResult ir = solve_weighted_analysis_l1(y, phi, dict, kappa, cfg.gamma, inner);
    dual = ir.dual;
    kappa_prev = kappa;

    const double xn = ir.x.norm();
    const double change = (ir.x - x).norm() / (xn > 0.0 ? xn : 1.0);
    x = ir.x;

    const Vec coeffs = dict.analyze(x);
    const Vec mag = dict.magnitudes(coeffs);
    Vec band_l1(nb);
    for (Index d = 0; d < nb; ++d) {
      const auto& b = dict.bands()[static_cast<std::size_t>(d)];
      band_l1[d] = mag.segment(b.offset, b.size).sum();
    }
    update_weights(cfg, dict, mag, band_l1, st, res.warnings);

    TraceRecord rec;
    rec.t = t;
    rec.lambda = st.lambda;
    rec.eps = st.eps;
    rec.band_l1 = band_l1;
    const ObjectiveValue ov = outer_objective(y, phi, dict, cfg, st.eps, x);
    rec.objective = ov.value;
    rec.objective_minus_infinity = ov.minus_infinity;
    rec.inner_iterations = ir.iterations_used;
    rec.relative_change = change;
    res.trace.push_back(rec);
    if (cfg.record_iterates) res.iterates.push_back(x);

    if (change < cfg.outer_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.x_hat = x;
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace

RecoveryResult run_recovery(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                            const OuterConfig& cfg) {
  return run_outer(y, phi, dict, cfg);
}

RecoveryResult run_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                      OuterConfig cfg) {
  cfg.algorithm = Algorithm::l1;
  return run_outer(y, phi, dict, cfg);
}

RecoveryResult run_co_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                         OuterConfig cfg) {
  cfg.algorithm = Algorithm::co_l1;
  return run_outer(y, phi, dict, cfg);
}

RecoveryResult run_irw_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                          OuterConfig cfg) {
  cfg.algorithm = Algorithm::irw_l1;
  return run_outer(y, phi, dict, cfg);
}

RecoveryResult run_co_irw_l1_eps(const Vec& y, const LinOp& phi,
                                 const CompositeDictionary& dict, OuterConfig cfg) {
  cfg.algorithm = Algorithm::co_irw_l1_eps;
  return run_outer(y, phi, dict, cfg);
}

RecoveryResult run_co_irw_l1(const Vec& y, const LinOp& phi, const CompositeDictionary& dict,
                             OuterConfig cfg) {
  cfg.algorithm = Algorithm::co_irw_l1;
  return run_outer(y, phi, dict, cfg);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_trace_csv(std::ostream& os, const RecoveryResult& r) {
  os << "t,band,lambda,eps_d,band_l1_norm,objective,inner_iters\n";
  for (const auto& rec : r.trace) {
    const std::string obj = rec.objective_minus_infinity ? "-inf" : format_double(rec.objective);
    for (Index d = 0; d < rec.lambda.size(); ++d) {
      os << rec.t << ',' << d << ',' << format_double(rec.lambda[d]) << ','
         << format_double(rec.eps[d]) << ',' << format_double(rec.band_l1[d]) << ',' << obj << ','
         << rec.inner_iterations << '\n';
    }
  }
}

}  // namespace cirl
