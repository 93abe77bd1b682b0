#include "cirl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cirl/rng.hpp"
#include "json.hpp"

namespace cirl {

std::pair<Index, Index> split_transitions(double alpha, Index total) {
  if (!(alpha > 0.0)) throw Error("split_transitions: alpha must be positive");
  if (total < 2) throw Error("split_transitions: need at least two transitions");
  const Index k1 = static_cast<Index>(std::floor(static_cast<double>(total) * alpha / (alpha + 1.0) + 0.5));
  return {k1, total - k1};
}

namespace {

// Piecewise-constant length-n signal with k jumps at distinct positions.
Vec step_signal(Index n, Index k, Rng& rng) {
  const auto pos = rng.sample_without_replacement(static_cast<std::size_t>(n - 1),
                                                  static_cast<std::size_t>(k));
  Vec jump = Vec::Zero(n);
  for (std::size_t p : pos) jump[static_cast<Index>(p) + 1] = rng.normal();
  Vec x(n);
  double level = 0.0;
  for (Index i = 0; i < n; ++i) {
    level += jump[i];
    x[i] = level;
  }
  return x;
}

}  // namespace

Image gen_finite_diff_2d(double alpha, Index total, Index n, std::uint64_t seed) {
  const auto [k1, k2] = split_transitions(alpha, total);
  if (k1 >= n || k2 >= n) throw Error("gen_finite_diff_2d: transition count must be < n");
  Rng rng(derive_seed(seed, 0x46));
  const Vec x1 = step_signal(n, k1, rng);
  const Vec x2 = step_signal(n, k2, rng);
  Image img{n, n, Field::real, Vec(n * n)};
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) img.data[i + n * j] = x1[i] + x2[j];
  return img;
}

Image gen_shepp_logan(Index n1, Index n2, bool complex_valued) {
  if (n1 < 16 || n2 < 16) throw Error("gen_shepp_logan: sides must be >= 16");
  struct Ellipse {
    double a, ax, by, x0, y0, phi;
  };
  static const Ellipse table[10] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},          {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},      {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},         {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},       {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},     {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  const Index n = n1 * n2;
  Image img{n1, n2, complex_valued ? Field::complex : Field::real,
            Vec::Zero(complex_valued ? 2 * n : n)};
  for (Index j = 0; j < n2; ++j) {
    const double x = (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(n2) - 1.0;
    for (Index i = 0; i < n1; ++i) {
      const double y = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n1);
      double v = 0.0;
      for (const auto& e : table) {
        const double th = e.phi * M_PI / 180.0;
        const double dx = x - e.x0, dy = y - e.y0;
        const double u = dx * std::cos(th) + dy * std::sin(th);
        const double w = -dx * std::sin(th) + dy * std::cos(th);
        if (u * u / (e.ax * e.ax) + w * w / (e.by * e.by) <= 1.0) v += e.a;
      }
      img.data[i + n1 * j] = v;
    }
  }
  if (complex_valued) img.data.tail(n) = img.data.head(n);
  return img;
}

Image gen_dmri_profile(Index n1, Index frames, std::uint64_t seed) {
  if (n1 < 32 || frames < 8) throw Error("gen_dmri_profile: need n1 >= 32 and T >= 8");
  Rng rng(derive_seed(seed, 0x44));
  const double nd = static_cast<double>(n1);
  struct Stripe {
    double centre, amp, width, level, phase;
    int cycles;
  };
  const int count = 2 + static_cast<int>(rng.below(2));
  std::vector<Stripe> stripes;
  for (int b = 0; b < count; ++b) {
    Stripe s;
    s.centre = nd * (0.3 + 0.4 * (b + 0.5) / count) + nd * 0.04 * (rng.uniform() - 0.5);
    s.amp = nd * (0.02 + 0.02 * rng.uniform());
    s.width = nd * (0.06 + 0.04 * rng.uniform());
    s.level = 0.4 + 0.4 * rng.uniform();
    s.phase = 2.0 * M_PI * rng.uniform();
    s.cycles = 1 + static_cast<int>(rng.below(2));
    stripes.push_back(s);
  }
  Image img{n1, frames, Field::real, Vec(n1 * frames)};
  for (Index t = 0; t < frames; ++t) {
    for (Index i = 0; i < n1; ++i) {
      const double r = static_cast<double>(i) / nd;
      double v = 0.2 + 0.15 * std::sin(M_PI * r) + 0.05 * std::cos(3.0 * M_PI * r);
      for (const auto& s : stripes) {
        const double c = s.centre + s.amp * std::sin(2.0 * M_PI * s.cycles *
                                                         static_cast<double>(t) /
                                                         static_cast<double>(frames) +
                                                     s.phase);
        // Pixel coverage of the interval [c - w/2, c + w/2].
        const double lo = std::max(static_cast<double>(i), c - s.width / 2.0);
        const double hi = std::min(static_cast<double>(i) + 1.0, c + s.width / 2.0);
        v += s.level * std::max(0.0, hi - lo);
      }
      img.data[i + n1 * t] = v;
    }
  }
  return img;
}

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

long parse_positive(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0) throw Error("");
    return v;
  } catch (...) {
    throw Error(std::string("load_image_pgm: malformed header (") + what + ")");
  }
}

}  // namespace

Image load_image_pgm(const std::string& path, Index crop_rows, Index crop_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_image_pgm: cannot open " + path);
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") throw Error("load_image_pgm: not a PGM file");
  const long cols = parse_positive(next_token(in), "width");
  const long rows = parse_positive(next_token(in), "height");
  const long maxval = parse_positive(next_token(in), "maxval");
  if (maxval > 65535) throw Error("load_image_pgm: unsupported depth");
  Image img{rows, cols, Field::real, Vec(rows * cols)};
  const double scale = 1.0 / static_cast<double>(maxval);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      long v = 0;
      if (magic == "P2") {
        const std::string tok = next_token(in);
        if (tok.empty()) throw Error("load_image_pgm: truncated data");
        v = std::stol(tok);
      } else if (maxval < 256) {
        const int c = in.get();
        if (c == EOF) throw Error("load_image_pgm: truncated data");
        v = c;
      } else {
        const int hi = in.get(), lo = in.get();
        if (lo == EOF || hi == EOF) throw Error("load_image_pgm: truncated data");
        v = (hi << 8) | lo;
      }
      if (v < 0 || v > maxval) throw Error("load_image_pgm: pixel exceeds maxval");
      img.data[i + rows * j] = static_cast<double>(v) * scale;
    }
  }
  if (crop_rows > 0 || crop_cols > 0) return center_crop(img, crop_rows, crop_cols);
  return img;
}

Image center_crop(const Image& img, Index rows, Index cols) {
  if (rows > img.n1 || cols > img.n2 || rows < 1 || cols < 1) {
    throw Error("center_crop: window larger than the image");
  }
  const Index top = (img.n1 - rows) / 2, left = (img.n2 - cols) / 2;
  const Index parts = img.field == Field::complex ? 2 : 1;
  Image out{rows, cols, img.field, Vec(parts * rows * cols)};
  for (Index p = 0; p < parts; ++p)
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i)
        out.data[p * rows * cols + i + rows * j] =
            img.data[p * img.n1 * img.n2 + (top + i) + img.n1 * (left + j)];
  return out;
}

void write_pgm(const std::string& path, const Image& img, int maxval) {
  if (maxval < 1 || maxval > 65535) throw Error("write_pgm: maxval out of range");
  const Index n = img.n1 * img.n2;
  Vec v = img.data.head(n);
  if (img.field == Field::complex) {
    for (Index k = 0; k < n; ++k) v[k] = std::hypot(img.data[k], img.data[n + k]);
    const double m = v.maxCoeff();
    if (m > 0.0) v /= m;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_pgm: cannot open " + path);
  out << "P5\n" << img.n2 << ' ' << img.n1 << '\n' << maxval << '\n';
  for (Index i = 0; i < img.n1; ++i) {
    for (Index j = 0; j < img.n2; ++j) {
      const double c = std::clamp(v[i + img.n1 * j], 0.0, 1.0);
      const long q = std::lround(c * maxval);
      if (maxval < 256) {
        out.put(static_cast<char>(q));
      } else {
        out.put(static_cast<char>((q >> 8) & 0xff));
        out.put(static_cast<char>(q & 0xff));
      }
    }
  }
}

Image load_raw_float32(const std::string& path, const std::string& sidecar) {
  std::ifstream meta(sidecar);
  if (!meta) throw Error("load_raw_float32: cannot open " + sidecar);
  Index n1 = 0, frames = 0;
  try {
    const auto j = nlohmann::json::parse(meta);
    n1 = j.at("n1").get<Index>();
    frames = j.at("frames").get<Index>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("load_raw_float32: ") + e.what());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_raw_float32: cannot open " + path);
  Image img{n1, frames, Field::real, Vec(n1 * frames)};
  for (Index k = 0; k < n1 * frames; ++k) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("load_raw_float32: truncated data");
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    img.data[k] = f;
  }
  return img;
}

NoisyMeasurement add_awgn(const Vec& y_clean, double target_snr_db, std::uint64_t seed,
                          Field field) {
  if (std::isnan(target_snr_db)) throw Error("add_awgn: target SNR is NaN");
  const double energy = y_clean.squaredNorm();
  if (energy == 0.0) throw Error("add_awgn: clean measurement is zero");
  NoisyMeasurement out{y_clean, 0.0};
  if (std::isinf(target_snr_db) && target_snr_db > 0) return out;
  const double m = static_cast<double>(field == Field::complex ? y_clean.size() / 2 : y_clean.size());
  out.sigma2 = energy / (m * std::pow(10.0, target_snr_db / 10.0));
  const double sd = std::sqrt(field == Field::complex ? out.sigma2 / 2.0 : out.sigma2);
  Rng rng(derive_seed(seed, 0x57));
  for (Index i = 0; i < out.y.size(); ++i) out.y[i] += sd * rng.normal();
  return out;
}

double recovery_snr_db(const Vec& x_true, const Vec& x_hat) {
  if (x_true.size() != x_hat.size()) throw Error("recovery_snr_db: size mismatch");
  const double err = (x_true - x_hat).squaredNorm();
  if (err == 0.0) return INFINITY;
  return 10.0 * std::log10(x_true.squaredNorm() / err);
}

std::string DictionarySpec::label() const {
  std::string s;
  switch (family) {
    case DictFamily::finite_difference:
      return "fd";
    case DictFamily::owt:
      s = "owt";
      break;
    case DictFamily::uwt:
      s = "uwt";
      break;
  }
  for (Wavelet w : wavelets) s += "-" + to_string(w);
  return s + "_lvl" + std::to_string(levels);
}

CompositeDictionary build_dictionary(const DictionarySpec& spec, Index n1, Index n2,
                                     Field field) {
  if (spec.family == DictFamily::finite_difference) {
    return make_finite_difference_dictionary(n1, n2, field);
  }
  if (spec.wavelets.empty()) throw Error("build_dictionary: no wavelets listed");
  std::vector<CompositeDictionary> parts;
  for (Wavelet w : spec.wavelets) {
    if (spec.family == DictFamily::owt) {
      parts.push_back(make_owt(w, spec.levels, n1, n2, field));
    } else {
      if (w == Wavelet::db3) throw Error("build_dictionary: undecimated transform supports db1, db2");
      parts.push_back(make_uwt(w, spec.levels, n1, n2, field));
    }
  }
  return concat_dictionaries(parts);
}

DictionarySpec parse_dictionary(const std::string& text, Index levels) {
  DictionarySpec d;
  d.levels = levels;
  if (text == "fd" || text == "finite-difference") return d;
  std::stringstream ss(text);
  std::string part;
  std::getline(ss, part, '-');
  if (part == "owt") {
    d.family = DictFamily::owt;
  } else if (part == "uwt") {
    d.family = DictFamily::uwt;
  } else {
    throw Error("unknown dictionary: " + text);
  }
  while (std::getline(ss, part, '-')) d.wavelets.push_back(parse_wavelet(part));
  if (d.wavelets.empty()) throw Error("dictionary needs at least one wavelet: " + text);
  return d;
}

void ExperimentSpec::validate() const {
  if (!(sampling_ratio > 0.0) || sampling_ratio > 1.0) {
    throw Error("ExperimentSpec: sampling ratio must lie in (0, 1]");
  }
  if (trials < 1) throw Error("ExperimentSpec: trials must be >= 1");
  if (algorithms.empty()) throw Error("ExperimentSpec: no algorithms");
  if (n1 < 1 || n2 < 1) throw Error("ExperimentSpec: empty image");
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(trial), 0x54);
}

TrialInstance make_instance(const ExperimentSpec& spec, std::uint64_t seed) {
  spec.validate();
  TrialInstance inst;
  switch (spec.generator) {
    case Generator::finite_diff:
      inst.truth = gen_finite_diff_2d(spec.alpha, spec.transitions, spec.n1, derive_seed(seed, 1));
      break;
    case Generator::shepp_logan:
      inst.truth = gen_shepp_logan(spec.n1, spec.n2, spec.complex_signal);
      break;
    case Generator::image_file:
      inst.truth = load_image_pgm(spec.image_path, spec.n1, spec.n2);
      break;
    case Generator::dmri_profile:
      inst.truth = gen_dmri_profile(spec.n1, spec.n2, spec.base_seed);
      break;
    case Generator::dmri_file:
      if (spec.image_path.size() >= 4 &&
          spec.image_path.substr(spec.image_path.size() - 4) == ".pgm") {
        inst.truth = load_image_pgm(spec.image_path);
      } else {
        inst.truth = load_raw_float32(spec.image_path, spec.sidecar_path);
      }
      break;
  }
  const Image& x = inst.truth;
  const Index n = x.n1 * x.n2;
  const bool real = x.field == Field::real;
  SampledOp sampled;
  if (spec.op == OperatorKind::spread_spectrum) {
    const double rows = real ? spec.sampling_ratio * n / 2.0 : spec.sampling_ratio * n;
    const Index m = std::max<Index>(1, std::lround(rows));
    sampled = make_spread_spectrum(n, m, derive_seed(seed, 2), x.field, real);
  } else {
    const double rows = real ? spec.sampling_ratio * x.n1 / 2.0 : spec.sampling_ratio * x.n1;
    const Index m1 = std::max<Index>(1, std::lround(rows));
    sampled = make_partial_fourier_video(x.n1, x.n2, m1, spec.density_sigma, derive_seed(seed, 2),
                                         x.field, real);
  }
  inst.pattern = sampled.pattern;
  inst.phi = real ? split_real(sampled.op) : sampled.op;
  const Vec y_clean = inst.phi.forward(x.data);
  const auto noisy = add_awgn(y_clean, spec.snr_db, derive_seed(seed, 3), inst.phi.range_field());
  inst.y = noisy.y;
  inst.sigma2 = noisy.sigma2;
  const double wn = (inst.y - y_clean).squaredNorm();
  inst.measurement_snr_db = wn > 0.0 ? 10.0 * std::log10(y_clean.squaredNorm() / wn) : INFINITY;
  inst.dict = build_dictionary(spec.dictionary, x.n1, x.n2, x.field);
  return inst;
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

std::vector<Algorithm> canonical(const std::vector<Algorithm>& algs) {
  std::vector<Algorithm> out = algs;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

TrialOutput run_trials(const std::vector<ExperimentSpec>& points, int threads,
                       const ReconstructionSink& sink) {
  struct Job {
    std::size_t point;
    int trial;
    std::size_t first_record;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<Algorithm>> algs;
  std::size_t total = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    points[p].validate();
    algs.push_back(canonical(points[p].algorithms));
    for (int t = 0; t < points[p].trials; ++t) {
      jobs.push_back({p, t, total});
      total += algs[p].size();
    }
  }
  TrialOutput out;
  out.records.resize(total);
  std::mutex sink_mutex;

  auto run_job = [&](const Job& job) {
    const ExperimentSpec& spec = points[job.point];
    const std::uint64_t seed = trial_seed(spec.base_seed, job.trial);
    std::optional<TrialInstance> inst;
    std::string setup_error;
    try {
      inst = make_instance(spec, seed);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    for (std::size_t a = 0; a < algs[job.point].size(); ++a) {
      TrialRecord& rec = out.records[job.first_record + a];
      rec.experiment = spec.name;
      rec.algorithm = algs[job.point][a];
      rec.sweep_param = spec.sweep_param;
      rec.trial = job.trial;
      rec.seed = seed;
      if (!inst) {
        rec.failed = true;
        rec.error = setup_error;
        continue;
      }
      rec.measurement_snr_db = inst->measurement_snr_db;
      try {
        OuterConfig cfg = spec.outer;
        cfg.algorithm = rec.algorithm;
        const double floor = 1e-12 * inst->y.squaredNorm() / static_cast<double>(inst->y.size());
        cfg.gamma = 1.0 / std::max(inst->sigma2, floor);
        const RecoveryResult r = run_recovery(inst->y, inst->phi, inst->dict, cfg);
        rec.recovery_snr_db = recovery_snr_db(inst->truth.data, r.x_hat);
        rec.outer_iters = static_cast<int>(r.trace.size());
        rec.wall_time = r.wall_time;
        if (sink) {
          Image est = inst->truth;
          est.data = r.x_hat;
          std::lock_guard<std::mutex> lock(sink_mutex);
          sink(spec, rec, est);
        }
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (workers == 1) {
    for (const auto& j : jobs) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) run_job(jobs[k]);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Records are ordered point, trial, algorithm by construction; reorder to
  // point, algorithm, trial.
  std::vector<TrialRecord> sorted;
  sorted.reserve(total);
  std::size_t base = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::size_t na = algs[p].size();
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<double> snrs;
      for (int t = 0; t < points[p].trials; ++t) {
        const TrialRecord& r = out.records[base + static_cast<std::size_t>(t) * na + a];
        sorted.push_back(r);
        if (!r.failed) snrs.push_back(r.recovery_snr_db);
      }
      out.medians.push_back({points[p].name, algs[p][a], points[p].sweep_param, median(snrs),
                             static_cast<int>(snrs.size())});
    }
    base += na * static_cast<std::size_t>(points[p].trials);
  }
  out.records = std::move(sorted);
  return out;
}

TrialOutput run_trials(const ExperimentSpec& spec, int threads) {
  return run_trials(std::vector<ExperimentSpec>{spec}, threads);
}

void write_results_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << "experiment,algorithm,sweep_param,trial_seed,recovery_snr_db,outer_iters\n";
  for (const auto& r : records) {
    os << r.experiment << ',' << to_string(r.algorithm) << ',' << r.sweep_param << ',' << r.seed
       << ',' << (r.failed ? std::string("failed") : format_double(r.recovery_snr_db)) << ','
       << r.outer_iters << '\n';
  }
}

void write_medians_csv(std::ostream& os, const std::vector<MedianRecord>& medians) {
  os << "experiment,algorithm,sweep_param,median_snr_db,trial_count\n";
  for (const auto& m : medians) {
    os << m.experiment << ',' << to_string(m.algorithm) << ',' << m.sweep_param << ','
       << format_double(m.median_snr_db) << ',' << m.trial_count << '\n';
  }
}

void write_timings_json(std::ostream& os, const std::vector<TrialRecord>& records) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records) {
    j.push_back({{"experiment", r.experiment},
                 {"algorithm", to_string(r.algorithm)},
                 {"sweep_param", r.sweep_param},
                 {"trial_seed", r.seed},
                 {"wall_time_s", r.wall_time},
                 {"failed", r.failed},
                 {"error", r.error}});
  }
  os << j.dump(2) << '\n';
}

namespace {

std::string ratio_label(double r) {
  std::ostringstream s;
  s << r;
  return s.str();
}

const std::vector<Algorithm> kFour = {Algorithm::l1, Algorithm::co_l1, Algorithm::irw_l1,
                                      Algorithm::co_irw_l1};

}  // namespace

std::vector<ExperimentSpec> alpha_sweep_protocol(bool paper_scale) {
  ExperimentSpec base;
  base.name = "alpha-sweep";
  base.generator = Generator::finite_diff;
  base.n1 = base.n2 = paper_scale ? 48 : 32;
  base.transitions = paper_scale ? 28 : 20;
  base.sampling_ratio = 0.25;
  base.snr_db = 40.0;
  base.trials = 25;
  base.algorithms = kFour;
  base.dictionary = DictionarySpec{};
  const std::vector<double> alphas =
      paper_scale ? std::vector<double>{1, 3, 6, 13, 27} : std::vector<double>{1, 3, 9, 19};
  std::vector<ExperimentSpec> out;
  for (double a : alphas) {
    ExperimentSpec s = base;
    s.alpha = a;
    s.sweep_param = ratio_label(a);
    out.push_back(s);
  }
  return out;
}

std::vector<ExperimentSpec> image_protocol(bool paper_scale, const std::string& target,
                                           const std::string& image_path) {
  ExperimentSpec base;
  base.name = "image";
  base.algorithms = kFour;
  base.trials = paper_scale ? 7 : 5;
  base.dictionary.levels = 1;
  base.dictionary.family = DictFamily::uwt;
  const bool camera = target == "cameraman";
  if (!camera && target != "shepp") throw Error("image target must be shepp or cameraman");
  if (camera && !image_path.empty()) {
    base.generator = Generator::image_file;
    base.image_path = image_path;
    base.n1 = paper_scale ? 96 : 32;
    base.n2 = paper_scale ? 104 : 32;
  } else {
    base.generator = Generator::shepp_logan;
    base.complex_signal = !camera;
    base.n1 = base.n2 = paper_scale ? 96 : (camera ? 32 : 64);
  }
  if (camera) {
    base.name = "image-cameraman";
    base.snr_db = 30.0;
    base.dictionary.wavelets = {Wavelet::db1, Wavelet::db2};
  } else {
    base.name = "image-shepp";
    base.snr_db = 40.0;
    base.dictionary.wavelets = {Wavelet::db1};
  }
  const std::vector<double> ratios =
      paper_scale ? std::vector<double>{0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4}
                  : std::vector<double>{0.2, 0.3};
  std::vector<ExperimentSpec> out;
  for (double r : ratios) {
    ExperimentSpec s = base;
    s.sampling_ratio = r;
    s.sweep_param = ratio_label(r);
    out.push_back(s);
  }
  return out;
}

std::vector<ExperimentSpec> dmri_protocol(bool paper_scale) {
  ExperimentSpec base;
  base.name = "dmri";
  base.generator = Generator::dmri_profile;
  base.op = OperatorKind::partial_fourier_video;
  base.n1 = paper_scale ? 144 : 64;
  base.n2 = paper_scale ? 48 : 32;
  base.snr_db = 30.0;
  base.trials = paper_scale ? 7 : 5;
  base.algorithms = kFour;
  base.dictionary.family = DictFamily::owt;
  base.dictionary.wavelets = {Wavelet::db1, Wavelet::db2, Wavelet::db3};
  base.dictionary.levels = 2;
  const std::vector<double> ratios =
      paper_scale ? std::vector<double>{0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4}
                  : std::vector<double>{0.2, 0.3};
  std::vector<ExperimentSpec> out;
  for (double r : ratios) {
    ExperimentSpec s = base;
    s.sampling_ratio = r;
    s.sweep_param = ratio_label(r);
    out.push_back(s);
  }
  return out;
}

std::vector<ExperimentSpec> dictionary_sweep_protocol(bool paper_scale,
                                                      const std::string& image_path) {
  ExperimentSpec base;
  base.name = "dictionary-sweep";
  if (!image_path.empty()) {
    base.generator = Generator::image_file;
    base.image_path = image_path;
    base.n1 = paper_scale ? 96 : 32;
    base.n2 = paper_scale ? 104 : 32;
  } else {
    base.generator = Generator::shepp_logan;
    base.n1 = base.n2 = paper_scale ? 96 : 32;
  }
  base.sampling_ratio = 0.4;
  base.snr_db = 30.0;
  base.trials = 3;
  base.algorithms = {Algorithm::co_irw_l1};
  const std::vector<Wavelet> all = {Wavelet::db1, Wavelet::db2, Wavelet::db3};
  std::vector<ExperimentSpec> out;
  for (DictFamily fam : {DictFamily::owt, DictFamily::uwt}) {
    const int max_count = fam == DictFamily::owt ? 3 : 2;
    for (int count = 1; count <= max_count; ++count) {
      for (Index lv = 1; lv <= 3; ++lv) {
        ExperimentSpec s = base;
        s.dictionary.family = fam;
        s.dictionary.levels = lv;
        s.dictionary.wavelets.assign(all.begin(), all.begin() + count);
        s.sweep_param = s.dictionary.label();
        out.push_back(s);
      }
    }
  }
  return out;
}

}  // namespace cirl
