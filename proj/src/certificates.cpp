#include "cirl/certificates.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "cirl/experiments.hpp"
#include "cirl/penalties.hpp"
#include "cirl/reweighting.hpp"
#include "cirl/rng.hpp"

namespace cirl {

using nlohmann::json;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
  json instance = json::object();
};

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Vec normal_vec(Index n, Rng& rng) {
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

// ---- operators -------------------------------------------------------------

Outcome operators(std::uint64_t seed) {
  struct Named {
    std::string name;
    LinOp op;
  };
  std::vector<Named> ops;
  ops.push_back({"spread_spectrum_real", split_real(make_spread_spectrum(96, 30, seed).op)});
  ops.push_back({"spread_spectrum_complex",
                 make_spread_spectrum(100, 40, seed + 1, Field::complex).op});
  ops.push_back({"partial_fourier_video_real",
                 split_real(make_partial_fourier_video(48, 6, 10, 0.15, seed + 2).op)});
  ops.push_back({"partial_fourier_video_complex",
                 make_partial_fourier_video(40, 5, 12, 0.15, seed + 3, Field::complex).op});
  ops.push_back({"finite_difference_vertical", make_finite_difference(12, 10, Axis::vertical)});
  ops.push_back(
      {"finite_difference_horizontal", make_finite_difference(12, 10, Axis::horizontal)});
  for (Wavelet w : {Wavelet::db1, Wavelet::db2, Wavelet::db3}) {
    ops.push_back({"owt_" + to_string(w), make_owt(w, 2, 16, 24).op()});
  }
  for (Wavelet w : {Wavelet::db1, Wavelet::db2}) {
    ops.push_back({"uwt_" + to_string(w), make_uwt(w, 2, 12, 8).op()});
  }
  ops.push_back({"concat_owt_db1_db2",
                 concat_dictionaries({make_owt(Wavelet::db1, 2, 16, 16),
                                      make_owt(Wavelet::db2, 1, 16, 16)})
                     .op()});
  ops.push_back({"concat_uwt_fd",
                 concat_dictionaries({make_uwt(Wavelet::db1, 1, 12, 12),
                                      make_finite_difference_dictionary(12, 12)})
                     .op()});
  ops.push_back({"owt_db2_complex", make_owt(Wavelet::db2, 2, 16, 16, Field::complex).op()});

  Outcome out;
  double worst = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const double m = adjoint_mismatch(ops[i].op, 20, derive_seed(seed, i, 0x41));
    worst = std::max(worst, m);
    if (!(m <= 1e-10)) {
      out.passed = false;
      out.instance["adjoint"][ops[i].name] = m;
    }
  }
  // Frame identities.
  Rng rng(derive_seed(seed, 0x50));
  double frame = 0.0;
  for (Wavelet w : {Wavelet::db1, Wavelet::db2, Wavelet::db3}) {
    const auto d = make_owt(w, 2, 16, 24);
    const Vec x = normal_vec(d.cols(), rng);
    const Vec c = d.analyze(x);
    frame = std::max(frame, std::abs(c.norm() - x.norm()) / x.norm());
    frame = std::max(frame, (d.op().adjoint(c) - x).norm() / x.norm());
  }
  for (Wavelet w : {Wavelet::db1, Wavelet::db2}) {
    const auto d = make_uwt(w, 3, 16, 16);
    const Vec x = normal_vec(d.cols(), rng);
    frame = std::max(frame, (d.op().adjoint(d.analyze(x)) - x).norm() / x.norm());
  }
  if (!(frame <= 1e-10)) {
    out.passed = false;
    out.instance["frame_identity"] = frame;
  }
  out.detail = "max adjoint mismatch " + sci(worst) + ", frame identity " + sci(frame) + " over " +
               std::to_string(ops.size()) + " operators";
  out.instance["seed"] = seed;
  return out;
}

// ---- algorithms ------------------------------------------------------------

TrialInstance small_instance(std::uint64_t seed) {
  ExperimentSpec s;
  s.generator = Generator::finite_diff;
  s.alpha = 3;
  s.transitions = 6;
  s.n1 = s.n2 = 16;
  s.sampling_ratio = 0.3;
  s.snr_db = 40.0;
  s.algorithms = {Algorithm::co_l1};
  return make_instance(s, seed);
}

Outcome reduction(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x52));
  Eigen::MatrixXd a(12, 24);
  for (Index j = 0; j < 24; ++j)
    for (Index i = 0; i < 12; ++i) a(i, j) = rng.normal() / std::sqrt(12.0);
  const LinOp phi = make_dense(a);
  const auto dict = make_singleton_bands(make_finite_difference(4, 6, Axis::vertical));
  Vec x0 = Vec::Zero(24);
  x0.tail(12).setConstant(1.0);
  const Vec y = phi.forward(x0) + 0.01 * normal_vec(12, rng);

  OuterConfig cfg;
  cfg.max_outer = 8;
  cfg.outer_tolerance = 0.0;
  cfg.gamma = 100.0;
  cfg.eps = 0.01;
  cfg.record_iterates = true;
  cfg.algorithm = Algorithm::co_l1;
  const auto ra = run_recovery(y, phi, dict, cfg);
  cfg.algorithm = Algorithm::irw_l1;
  const auto rb = run_recovery(y, phi, dict, cfg);

  Outcome out;
  double worst = 0.0;
  if (ra.iterates.size() != 8 || rb.iterates.size() != 8) {
    out.passed = false;
  } else {
    for (std::size_t t = 0; t < 8; ++t) {
      worst = std::max(worst, (ra.iterates[t] - rb.iterates[t]).norm() /
                                  std::max(1.0, ra.iterates[t].norm()));
    }
  }
  out.passed = out.passed && worst <= 1e-8;
  out.detail = "max iterate gap " + sci(worst) + " over 8 iterations (N=24, M=12, L_d=1)";
  out.instance = {{"seed", seed}, {"max_gap", worst}};
  return out;
}

// Slope of the penalty along a scaling of band d at the iterate, against the
// surrogate slope lambda_d sum_i w_i |z_i| the update committed to.
double tangency_error(const CompositeDictionary& dict, const OuterConfig& cfg, const Vec& x,
                      const TraceRecord& rec) {
  const Vec coeffs = dict.analyze(x);
  const Vec mag = dict.magnitudes(coeffs);
  const Vec norms = dict.band_l1(coeffs);
  const double h = 1e-6;
  double worst = 0.0;
  for (Index d = 0; d < dict.band_count(); ++d) {
    const auto& b = dict.bands()[static_cast<std::size_t>(d)];
    double fd = 0.0, committed = 0.0;
    if (cfg.algorithm == Algorithm::co_l1) {
      Vec up = norms, um = norms;
      up[d] *= 1.0 + h;
      um[d] *= 1.0 - h;
      fd = (rls_from_norms(up, dict, cfg.eps).value - rls_from_norms(um, dict, cfg.eps).value) /
           (2.0 * h);
      committed = rec.lambda[d] * norms[d];
    } else {
      Vec mp = mag, mm = mag;
      mp.segment(b.offset, b.size) *= 1.0 + h;
      mm.segment(b.offset, b.size) *= 1.0 - h;
      fd = (rlsl_from_magnitudes(mp, dict, cfg.eps_d, cfg.vareps).value -
            rlsl_from_magnitudes(mm, dict, cfg.eps_d, cfg.vareps).value) /
           (2.0 * h);
      double s = 0.0;
      for (Index k = b.offset; k < b.offset + b.size; ++k) {
        s += mag[k] / (cfg.eps_d[d] * (1.0 + cfg.vareps) + mag[k]);
      }
      committed = rec.lambda[d] * s;
    }
    if (fd != 0.0) worst = std::max(worst, std::abs(committed - fd) / std::abs(fd));
  }
  return worst;
}

Outcome descent(std::uint64_t seed, double perturbation) {
  Outcome out;
  double worst = -INFINITY, tangency = 0.0;
  for (int k = 0; k < 5; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k), 0x44);
    const TrialInstance inst = small_instance(s);
    for (Algorithm alg : {Algorithm::co_l1, Algorithm::co_irw_l1_eps}) {
      OuterConfig cfg;
      cfg.algorithm = alg;
      cfg.max_outer = 16;
      cfg.outer_tolerance = 0.0;
      cfg.gamma = 1.0 / inst.sigma2;
      cfg.eps = 1e-3;
      cfg.eps_d = Vec::Constant(inst.dict.band_count(), 1e-3);
      cfg.vareps = 1e-3;
      cfg.lambda_perturbation = perturbation;
      cfg.record_iterates = true;
      cfg.inner = InnerConfig();
      cfg.inner.max_iterations = 200;
      const auto r = run_recovery(inst.y, inst.phi, inst.dict, cfg);
      for (std::size_t t = 0; t < r.trace.size(); ++t) {
        const double tan = tangency_error(inst.dict, cfg, r.iterates[t], r.trace[t]);
        tangency = std::max(tangency, tan);
        double rise = 0.0;
        if (t > 0) {
          const double prev = r.trace[t - 1].objective;
          rise = (r.trace[t].objective - prev) / std::max(std::abs(prev), 1e-300);
          worst = std::max(worst, rise);
        }
        if ((rise > 1e-6 || tan > 1e-6) && out.passed) {
          out.passed = false;
          out.instance = {{"seed", seed},
                          {"instance_seed", s},
                          {"algorithm", algorithm_key(alg)},
                          {"iteration", r.trace[t].t},
                          {"objective", r.trace[t].objective},
                          {"relative_rise", rise},
                          {"tangency_error", tan},
                          {"lambda_perturbation", perturbation}};
        }
      }
    }
  }
  out.detail = "largest relative rise " + sci(std::max(worst, 0.0)) + ", surrogate slope error " +
               sci(tangency) + " over 5 instances x 2 algorithms x 16 iterations";
  if (out.passed) out.instance = {{"seed", seed}};
  return out;
}

// ---- penalties -------------------------------------------------------------

CompositeDictionary banded(const std::vector<Index>& sizes) {
  Index n = 0;
  std::vector<Band> bands;
  for (Index s : sizes) {
    bands.push_back({"b" + std::to_string(bands.size()), n, s});
    n += s;
  }
  return CompositeDictionary(make_identity(n), bands);
}

LiftedPoint random_feasible(const CompositeDictionary& dict, Rng& rng) {
  LiftedPoint p = tight_lift(dict, normal_vec(dict.cols(), rng));
  for (Index k = 0; k < p.u.size(); ++k) p.u[k] += 0.05 + rng.uniform();
  return p;
}

Outcome majorization(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x4d));
  const auto dict = make_finite_difference_dictionary(6, 6);
  Eigen::MatrixXd a(18, 36);
  for (Index j = 0; j < 36; ++j)
    for (Index i = 0; i < 18; ++i) a(i, j) = rng.normal();
  const LinOp phi = make_dense(a);
  const Vec y = normal_vec(18, rng);
  const Vec eps = Vec::Constant(2, 0.3);
  Outcome out;
  int bad = 0;
  double worst = INFINITY;
  for (int k = 0; k < 100; ++k) {
    const LiftedPoint anchor = random_feasible(dict, rng);
    const LiftedPoint probe = k == 0 ? anchor : random_feasible(dict, rng);
    const auto m1 = check_majorization_co_l1(anchor, probe, dict, 0.2, 1.5, y, phi);
    const auto m2 = check_majorization_co_irw(anchor, probe, dict, eps, 0.1, 1.5, y, phi);
    if (k > 0) worst = std::min({worst, m1.gap, m2.gap});
    if (!m1.holds || !m2.holds) ++bad;
  }
  out.passed = bad == 0;
  out.detail = "100 anchor/probe pairs, smallest off-anchor gap " + sci(worst);
  out.instance = {{"seed", seed}, {"failures", bad}};
  return out;
}

double grad_error(const std::function<double(const Vec&)>& f, const Vec& analytic, const Vec& u) {
  const double h = 1e-6;
  Vec num(u.size());
  for (Index k = 0; k < u.size(); ++k) {
    Vec p = u, m = u;
    p[k] += h;
    m[k] -= h;
    num[k] = (f(p) - f(m)) / (2.0 * h);
  }
  return (num - analytic).norm() / analytic.norm();
}

Outcome gradients(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x47));
  const auto dict = make_owt(Wavelet::db2, 1, 8, 8);
  Vec ed(dict.band_count());
  for (Index d = 0; d < ed.size(); ++d) ed[d] = 0.3 + 0.2 * static_cast<double>(d);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const LiftedPoint p = random_feasible(dict, rng);
    const Index l = dict.total_rows();
    worst = std::max(worst, grad_error([&](const Vec& u) { return g2_co_l1({u, p.x}, dict, 0.5); },
                                       grad_g2_co_l1(p, dict, 0.5).head(l), p.u));
    worst = std::max(worst,
                     grad_error([&](const Vec& u) { return g2_co_irw({u, p.x}, dict, ed, 0.1); },
                                grad_g2_co_irw(p, dict, ed, 0.1).head(l), p.u));
  }
  Outcome out;
  out.passed = worst <= 1e-5;
  out.detail = "50 points, largest relative error " + sci(worst);
  out.instance = {{"seed", seed}, {"worst", worst}};
  return out;
}

Outcome lipschitz(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x4c));
  Outcome out;
  double ratio = 0.0;
  const std::pair<Index, double> a_settings[] = {{1, 0.1}, {4, 0.5}, {16, 1.0}};
  for (auto [lmax, eps] : a_settings) {
    const auto dict = banded({lmax, std::max<Index>(1, lmax / 2), 1});
    const Index l = dict.total_rows();
    const double beta = lipschitz_sq_co_l1(static_cast<double>(lmax), eps);
    for (int t = 0; t < 10000; ++t) {
      const double scale = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
      LiftedPoint a{Vec(l), Vec::Zero(l)}, b{Vec(l), Vec::Zero(l)};
      for (Index k = 0; k < l; ++k) {
        a.u[k] = scale * rng.uniform();
        b.u[k] = scale * rng.uniform();
      }
      const double lhs =
          (grad_g2_co_l1(a, dict, eps) - grad_g2_co_l1(b, dict, eps)).squaredNorm();
      const double rhs = beta * (a.u - b.u).squaredNorm();
      if (rhs > 0.0) ratio = std::max(ratio, lhs / rhs);
    }
  }
  const auto one = banded({1});
  const std::pair<double, double> c_settings[] = {{0.1, 0.5}, {1.0, 0.1}, {0.5, 1.0}};
  for (auto [e, ve] : c_settings) {
    const Vec eps = Vec::Constant(1, e);
    const double beta = lipschitz_sq_co_irw_scalar(e, ve);
    for (int t = 0; t < 10000; ++t) {
      const double scale = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
      LiftedPoint a{Vec::Constant(1, scale * rng.uniform()), Vec::Zero(1)};
      LiftedPoint b{Vec::Constant(1, scale * rng.uniform()), Vec::Zero(1)};
      const double d = grad_g2_co_irw(a, one, eps, ve)[0] - grad_g2_co_irw(b, one, eps, ve)[0];
      const double rhs = beta * std::pow(a.u[0] - b.u[0], 2);
      if (rhs > 0.0) ratio = std::max(ratio, d * d / rhs);
    }
  }
  out.passed = ratio <= 1.0 + 1e-12;
  out.detail = "6 x 10^4 pairs, largest |dgrad|^2 / (beta |dv|^2) = " + sci(ratio);
  out.instance = {{"seed", seed}, {"ratio", ratio}};
  return out;
}

Outcome estimator(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x45));
  Outcome out;
  double shortfall = -INFINITY, stationarity = 0.0;
  for (Field f : {Field::real, Field::complex}) {
    for (int band = 0; band < 10; ++band) {
      const Index l = 20 + static_cast<Index>(rng.below(40));
      const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
      Vec z(l);
      for (Index i = 0; i < l; ++i) {
        const double m = std::abs(rng.normal()) * scale;
        z[i] = rng.uniform() < 0.5 ? 1e-3 * m : m;
      }
      const LambdaEps est = estimate_lambda_eps(z, f, 0.0);
      const double lo = f == Field::real ? 1.0 : 2.0;
      double grid = -INFINITY;
      for (int i = 0; i < 60; ++i) {
        const double e = z.mean() * std::pow(10.0, -5.0 + 7.0 * i / 59.0);
        for (int j = 0; j < 60; ++j) {
          grid = std::max(grid, log_prior(z, lo + std::pow(10.0, -3.0 + 6.0 * j / 59.0), e, 0.0, f));
        }
      }
      shortfall = std::max(shortfall, grid - est.log_prior);
      if (f == Field::complex) {
        const double q = mean_log_term(z, est.eps, 0.0);
        stationarity = std::max(
            stationarity, std::abs(1.0 / (est.lambda - 1.0) + 1.0 / (est.lambda - 2.0) - q));
      }
    }
  }
  out.passed = shortfall <= 1e-6 && stationarity <= 1e-8;
  out.detail = "20 bands, grid excess " + sci(std::max(shortfall, 0.0)) +
               ", complex stationarity residual " + sci(stationarity);
  out.instance = {{"seed", seed}, {"grid_excess", shortfall}, {"stationarity", stationarity}};
  return out;
}

Outcome gap(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x42));
  const std::vector<double> seq = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  Outcome out;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Vec x = Vec::Zero(200);
    for (std::size_t i : rng.sample_without_replacement(200, 10)) {
      x[static_cast<Index>(i)] = rng.sign() * (1.0 + rng.uniform());
    }
    const auto t = logsum_l0_gap(x, 1.0, seq);
    const double nnz = static_cast<double>((x.array() != 0.0).count());
    const double final_ratio = std::abs(t.rows.back().residual) / nnz;
    worst = std::max(worst, final_ratio);
    if (!t.monotone || !(final_ratio < 0.05)) out.passed = false;
  }
  out.detail = "20 sparse vectors, largest final |residual| / ||x||_0 = " + sci(worst);
  out.instance = {{"seed", seed}, {"worst", worst}};
  return out;
}

}  // namespace

bool CertificateReport::all_passed() const {
  for (const auto& c : items)
    if (!c.passed) return false;
  return !items.empty();
}

std::string CertificateReport::to_json() const {
  json j = json::array();
  for (const auto& c : items) {
    json e = {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}};
    if (!c.passed && !c.instance.empty()) e["instance"] = json::parse(c.instance);
    j.push_back(e);
  }
  return json{{"certificates", j}, {"all_passed", all_passed()}}.dump(2);
}

CertificateReport run_certificates(const CertificateOptions& opt) {
  const std::pair<std::string, std::function<Outcome()>> suite[] = {
      {"operator_adjoints", [&] { return operators(opt.seed); }},
      {"co_l1_irw_l1_reduction", [&] { return reduction(opt.seed); }},
      {"mm_descent", [&] { return descent(opt.seed, opt.lambda_perturbation); }},
      {"majorization", [&] { return majorization(opt.seed); }},
      {"gradients", [&] { return gradients(opt.seed); }},
      {"lipschitz", [&] { return lipschitz(opt.seed); }},
      {"lambda_eps_estimator", [&] { return estimator(opt.seed); }},
      {"logsum_l0_gap", [&] { return gap(opt.seed); }},
  };
  CertificateReport rep;
  for (const auto& [name, fn] : suite) {
    Certificate c;
    c.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      Outcome o = fn();
      c.passed = o.passed;
      c.detail = o.detail;
      c.instance = o.instance.dump();
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("error: ") + e.what();
      c.instance = json{{"seed", opt.seed}, {"error", e.what()}}.dump();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.items.push_back(std::move(c));
  }
  return rep;
}

}  // namespace cirl
