// cirl: single reconstructions, experiment protocols and the certificate suite.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cirl/certificates.hpp"
#include "cirl/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cirl;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every flag that reaches the manifest. Names match the long flags.
struct RecoverFlags {
  std::string algo;
  std::string gen = "finite-diff";
  double alpha = 1.0;
  long transitions = 20;
  long n1 = 32;
  long n2 = 0;  // 0: square
  bool complex_signal = false;
  std::string image;
  std::string sidecar;
  std::string op = "spread-spectrum";
  double mn = 0.25;
  double density_sigma = 0.15;
  double snr = 40.0;
  std::uint64_t seed = 1;
  std::string dict = "fd";
  long levels = 1;
  long max_outer = 16;
  double outer_tol = 1e-6;
  double eps = 0.0;
  std::string eps_d;
  double vareps = 0.0;
  double gamma = 0.0;  // 0: 1/sigma^2
  bool pin_eps = false;
  long inner_iters = 60;
  double inner_tol = 1e-6;
};

struct ExperimentFlags {
  std::string name;
  bool paper_scale = false;
  long trials = 0;  // 0: protocol default
  std::uint64_t seed = 1;
  long threads = 1;
  std::string target = "shepp";
  std::string image;
  std::string dict;
  long levels = 0;  // 0: protocol default
  long max_outer = 16;
  long inner_iters = 60;
  bool dump = false;
};

struct CertifyFlags {
  std::uint64_t seed = 1;
  bool inject_bug = false;
};

// ---- config files ------------------------------------------------------------

std::string token(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw UsageError("config: unsupported value " + v.dump());
}

// A config is either a flat {flag: value} object or a manifest holding one
// under "args" next to "command".
void load_config(const std::string& path, std::string& command, std::vector<std::string>& out) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  if (j.contains("command")) command = j["command"].get<std::string>();
  const json& args = j.contains("args") ? j["args"] : j;
  for (const auto& [key, v] : args.items()) {
    if (key == "command") continue;
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back("--" + key);
      continue;
    }
    if (v.is_null() || (v.is_string() && v.get<std::string>().empty())) continue;
    std::string val;
    if (v.is_array()) {
      for (const auto& e : v) val += (val.empty() ? "" : ",") + token(e);
    } else {
      val = token(v);
    }
    out.push_back("--" + key + "=" + val);
  }
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CIRL_OUTPUT_DIR"); env && *env) return env;
  return "cirl_out";
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

json manifest(const std::string& command, json args) {
  return {{"command", command}, {"args", std::move(args)}, {"version", kVersion}};
}

// ---- recover -----------------------------------------------------------------

Generator parse_generator(const std::string& g) {
  if (g == "finite-diff") return Generator::finite_diff;
  if (g == "shepp-logan" || g == "shepp") return Generator::shepp_logan;
  if (g == "image") return Generator::image_file;
  if (g == "dmri") return Generator::dmri_profile;
  if (g == "dmri-file") return Generator::dmri_file;
  throw UsageError("unknown generator: " + g);
}

Vec parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      v.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw UsageError("bad number in list: " + part);
    }
  }
  return Eigen::Map<Vec>(v.data(), static_cast<Index>(v.size()));
}

json recover_args(const RecoverFlags& f) {
  return {{"algo", f.algo},
          {"gen", f.gen},
          {"alpha", f.alpha},
          {"transitions", f.transitions},
          {"n1", f.n1},
          {"n2", f.n2},
          {"complex", f.complex_signal},
          {"image", f.image},
          {"sidecar", f.sidecar},
          {"op", f.op},
          {"mn", f.mn},
          {"density-sigma", f.density_sigma},
          {"snr", f.snr},
          {"seed", f.seed},
          {"dict", f.dict},
          {"levels", f.levels},
          {"max-outer", f.max_outer},
          {"outer-tol", f.outer_tol},
          {"eps", f.eps},
          {"eps-d", f.eps_d},
          {"vareps", f.vareps},
          {"gamma", f.gamma},
          {"pin-eps", f.pin_eps},
          {"inner-iters", f.inner_iters},
          {"inner-tol", f.inner_tol}};
}

int cmd_recover(const RecoverFlags& f, const fs::path& out) {
  ExperimentSpec spec;
  OuterConfig cfg;
  TrialInstance inst;
  try {
    spec.name = "recover";
    spec.generator = parse_generator(f.gen);
    spec.alpha = f.alpha;
    spec.transitions = f.transitions;
    spec.n1 = f.n1;
    spec.n2 = f.n2 > 0 ? f.n2 : f.n1;
    spec.complex_signal = f.complex_signal;
    spec.image_path = f.image;
    spec.sidecar_path = f.sidecar;
    if (f.op == "spread-spectrum") {
      spec.op = OperatorKind::spread_spectrum;
    } else if (f.op == "partial-fourier") {
      spec.op = OperatorKind::partial_fourier_video;
    } else {
      throw UsageError("unknown operator: " + f.op);
    }
    spec.sampling_ratio = f.mn;
    spec.density_sigma = f.density_sigma;
    spec.snr_db = f.snr;
    spec.base_seed = f.seed;
    spec.dictionary = parse_dictionary(f.dict, f.levels);
    spec.algorithms = {parse_algorithm(f.algo)};
    spec.validate();

    cfg.algorithm = spec.algorithms.front();
    cfg.max_outer = static_cast<int>(f.max_outer);
    cfg.outer_tolerance = f.outer_tol;
    cfg.eps = f.eps;
    cfg.vareps = f.vareps;
    cfg.pin_eps = f.pin_eps;
    cfg.inner.max_iterations = static_cast<int>(f.inner_iters);
    cfg.inner.stop_tolerance = f.inner_tol;

    inst = make_instance(spec, f.seed);
    if (!f.eps_d.empty()) {
      const Vec e = parse_list(f.eps_d);
      cfg.eps_d = e.size() == 1 ? Vec::Constant(inst.dict.band_count(), e[0]) : e;
    }
    const double floor = 1e-12 * inst.y.squaredNorm() / static_cast<double>(inst.y.size());
    cfg.gamma = f.gamma > 0.0 ? f.gamma : 1.0 / std::max(inst.sigma2, floor);
    cfg.validate(inst.dict);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const RecoveryResult r = run_recovery(inst.y, inst.phi, inst.dict, cfg);
  const double snr = recovery_snr_db(inst.truth.data, r.x_hat);

  fs::create_directories(out);
  {
    std::ofstream os(out / "trace.csv", std::ios::binary);
    write_trace_csv(os, r);
  }
  Image est = inst.truth;
  est.data = r.x_hat;
  write_pgm((out / "xhat.pgm").string(), est);
  json m = manifest("recover", recover_args(f));
  m["derived"] = {{"sigma2", inst.sigma2},
                  {"gamma", cfg.gamma},
                  {"measurements", inst.y.size()},
                  {"bands", inst.dict.band_count()},
                  {"dictionary", spec.dictionary.label()},
                  {"measurement_snr_db", inst.measurement_snr_db},
                  {"recovery_snr_db", std::isfinite(snr) ? json(snr) : json("inf")},
                  {"outer_iters", r.trace.size()}};
  for (const auto& w : r.warnings) m["warnings"].push_back(w);
  write_file(out / "manifest.json", m.dump(2) + "\n");

  std::cout << to_string(cfg.algorithm) << ": recovery SNR " << format_double(snr) << " dB after "
            << r.trace.size() << " outer iterations\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

// ---- experiment ----------------------------------------------------------------

json experiment_args(const ExperimentFlags& f) {
  return {{"name", f.name},         {"paper-scale", f.paper_scale}, {"trials", f.trials},
          {"seed", f.seed},         {"threads", f.threads},         {"target", f.target},
          {"image", f.image},       {"dict", f.dict},               {"levels", f.levels},
          {"max-outer", f.max_outer}, {"inner-iters", f.inner_iters}, {"dump", f.dump}};
}

int cmd_experiment(const ExperimentFlags& f, const fs::path& out) {
  std::vector<ExperimentSpec> points;
  try {
    if (f.name == "alpha-sweep") {
      points = alpha_sweep_protocol(f.paper_scale);
    } else if (f.name == "image") {
      points = image_protocol(f.paper_scale, f.target, f.image);
    } else if (f.name == "dmri") {
      points = dmri_protocol(f.paper_scale);
    } else if (f.name == "dictionary-sweep") {
      points = dictionary_sweep_protocol(f.paper_scale, f.image);
    } else {
      throw UsageError("unknown experiment: " + f.name);
    }
    if (f.threads < 1) throw UsageError("--threads must be >= 1");
    for (auto& p : points) {
      p.base_seed = f.seed;
      if (f.trials > 0) p.trials = static_cast<int>(f.trials);
      if (!f.dict.empty() || f.levels > 0) {
        if (f.name == "dictionary-sweep") throw UsageError("dictionary-sweep fixes its dictionaries");
        const std::string d = f.dict.empty() ? p.dictionary.label().substr(0, p.dictionary.label().find('_'))
                                             : f.dict;
        p.dictionary = parse_dictionary(d, f.levels > 0 ? f.levels : p.dictionary.levels);
      }
      p.outer.max_outer = static_cast<int>(f.max_outer);
      p.outer.inner.max_iterations = static_cast<int>(f.inner_iters);
      p.validate();
      p.outer.validate(build_dictionary(p.dictionary, 16, 16, Field::real));
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  fs::create_directories(out);
  ReconstructionSink sink = nullptr;
  if (f.dump) {
    fs::create_directories(out / "reconstructions");
    sink = [&](const ExperimentSpec& s, const TrialRecord& rec, const Image& est) {
      const std::string file = s.name + "_" + algorithm_key(rec.algorithm) + "_" + s.sweep_param +
                               "_" + std::to_string(rec.seed) + ".pgm";
      write_pgm((out / "reconstructions" / file).string(), est);
    };
  }
  const TrialOutput res = run_trials(points, static_cast<int>(f.threads), sink);

  {
    std::ofstream os(out / "results.csv", std::ios::binary);
    write_results_csv(os, res.records);
  }
  {
    std::ofstream os(out / "medians.csv", std::ios::binary);
    write_medians_csv(os, res.medians);
  }
  {
    std::ofstream os(out / "timings.json", std::ios::binary);
    write_timings_json(os, res.records);
  }
  json m = manifest("experiment", experiment_args(f));
  int failures = 0;
  for (const auto& r : res.records) {
    if (r.failed) {
      ++failures;
      m["failures"].push_back({{"algorithm", algorithm_key(r.algorithm)},
                               {"sweep_param", r.sweep_param},
                               {"trial_seed", r.seed},
                               {"error", r.error}});
    }
  }
  json pts = json::array();
  for (const auto& p : points) {
    pts.push_back({{"experiment", p.name},
                   {"sweep_param", p.sweep_param},
                   {"n1", p.n1},
                   {"n2", p.n2},
                   {"sampling_ratio", p.sampling_ratio},
                   {"snr_db", p.snr_db},
                   {"dictionary", p.dictionary.label()},
                   {"trials", p.trials}});
  }
  m["derived"] = {{"points", pts}};
  write_file(out / "manifest.json", m.dump(2) + "\n");

  for (const auto& md : res.medians) {
    std::cout << md.experiment << ' ' << md.sweep_param << ' ' << to_string(md.algorithm)
              << " median " << format_double(md.median_snr_db) << " dB (" << md.trial_count
              << " trials)\n";
  }
  if (failures > 0) {
    std::cerr << failures << " trial(s) failed; see manifest.json\n";
    return 1;
  }
  return 0;
}

// ---- certify -------------------------------------------------------------------

int cmd_certify(const CertifyFlags& f, const fs::path& out) {
  CertificateOptions opt;
  opt.seed = f.seed;
  opt.lambda_perturbation = f.inject_bug ? 0.01 : 0.0;
  const CertificateReport rep = run_certificates(opt);
  for (const auto& c : rep.items) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << " ("
              << format_double(std::round(c.seconds * 100.0) / 100.0) << " s)\n";
    if (!c.passed) std::cout << "  instance: " << c.instance << '\n';
  }
  fs::create_directories(out);
  write_file(out / "certificates.json", rep.to_json() + "\n");
  write_file(out / "manifest.json",
             manifest("certify", {{"seed", f.seed}, {"inject-bug", f.inject_bug}}).dump(2) + "\n");
  return rep.all_passed() ? 0 : 1;
}

bool is_command(const std::string& s) {
  return s == "recover" || s == "experiment" || s == "certify";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite iteratively reweighted l1 recovery"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string out_flag, config;
  RecoverFlags rf;
  ExperimentFlags ef;
  CertifyFlags cf;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_flag, "Output directory (default $CIRL_OUTPUT_DIR or ./cirl_out)");
    sub->add_option("--config", config, "JSON file of flag values or a run manifest");
  };

  auto* rec = app.add_subcommand("recover", "Reconstruct one generated instance");
  common(rec);
  rec->add_option("--algo", rf.algo, "l1, co-l1, irw-l1, co-irw-l1-eps, co-irw-l1")->required();
  rec->add_option("--gen", rf.gen, "finite-diff, shepp-logan, image, dmri, dmri-file");
  rec->add_option("--alpha", rf.alpha, "Transition ratio k1/k2");
  rec->add_option("--transitions", rf.transitions, "Total transitions K");
  rec->add_option("--n1", rf.n1, "Rows (side length for finite-diff)");
  rec->add_option("--n2", rf.n2, "Columns or frames; 0 for n1");
  rec->add_flag("--complex", rf.complex_signal, "Complex Shepp-Logan");
  rec->add_option("--image", rf.image, "PGM or raw float32 ground truth");
  rec->add_option("--sidecar", rf.sidecar, "JSON sidecar for raw float32");
  rec->add_option("--op", rf.op, "spread-spectrum or partial-fourier");
  rec->add_option("--mn", rf.mn, "Sampling ratio M/N");
  rec->add_option("--density-sigma", rf.density_sigma, "Variable-density width (partial Fourier)");
  rec->add_option("--snr", rf.snr, "Measurement SNR in dB");
  rec->add_option("--seed", rf.seed, "Instance seed");
  rec->add_option("--dict", rf.dict, "fd, owt-db1[-db2...], uwt-db1[-db2]");
  rec->add_option("--levels", rf.levels, "Wavelet levels")->check(CLI::PositiveNumber);
  rec->add_option("--max-outer", rf.max_outer, "Outer iterations");
  rec->add_option("--outer-tol", rf.outer_tol, "Outer stopping tolerance");
  rec->add_option("--eps", rf.eps, "Co-L1 / IRW-L1 guard");
  rec->add_option("--eps-d", rf.eps_d, "Per-band eps for Co-IRW-L1-eps (comma list or one value)");
  rec->add_option("--vareps", rf.vareps, "Inner guard of the log-sum-log penalty");
  rec->add_option("--gamma", rf.gamma, "Data weight; 0 for 1/sigma^2");
  rec->add_flag("--pin-eps", rf.pin_eps, "Co-IRW-L1: keep eps-d fixed");
  rec->add_option("--inner-iters", rf.inner_iters, "Inner iterations per outer step");
  rec->add_option("--inner-tol", rf.inner_tol, "Inner stopping tolerance");

  auto* exp = app.add_subcommand("experiment", "Run a named protocol");
  common(exp);
  exp->add_option("name,--name", ef.name, "alpha-sweep, image, dmri, dictionary-sweep")
      ->required();
  exp->add_flag("--paper-scale", ef.paper_scale, "Published sizes instead of desk scale");
  exp->add_option("--trials", ef.trials, "Trials per point; 0 for the protocol default");
  exp->add_option("--seed", ef.seed, "Base seed");
  exp->add_option("--threads", ef.threads, "Worker threads; 1 is bitwise deterministic");
  exp->add_option("--target", ef.target, "Image target: shepp or cameraman");
  exp->add_option("--image", ef.image, "PGM used by the cameraman and dictionary protocols");
  exp->add_option("--dict", ef.dict, "Override the dictionary");
  exp->add_option("--levels", ef.levels, "Override the wavelet levels");
  exp->add_option("--max-outer", ef.max_outer, "Outer iterations");
  exp->add_option("--inner-iters", ef.inner_iters, "Inner iterations per outer step");
  exp->add_flag("--dump", ef.dump, "Write every reconstruction as PGM");

  auto* cert = app.add_subcommand("certify", "Run the numerical certificate suite");
  common(cert);
  cert->add_option("--seed", cf.seed, "Seed of the random instances");
  cert->add_flag("--inject-bug", cf.inject_bug, "Perturb the lambda updates by 1%");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Config values go right after the subcommand so later flags win.
    std::string cfg_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) cfg_path = args[i].substr(9);
    }
    if (!cfg_path.empty()) {
      std::string command;
      std::vector<std::string> extra;
      load_config(cfg_path, command, extra);
      const bool has_command = !args.empty() && is_command(args[0]);
      if (!has_command) {
        if (command.empty()) throw UsageError("no subcommand given and none in " + cfg_path);
        args.insert(args.begin(), command);
      } else if (!command.empty() && command != args[0]) {
        throw UsageError("config is for '" + command + "', not '" + args[0] + "'");
      }
      // A positional experiment name on the command line replaces the file's.
      if (args[0] == "experiment" && args.size() > 1 && args[1][0] != '-') {
        std::erase_if(extra, [](const std::string& s) { return s.rfind("--name=", 0) == 0; });
      }
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const fs::path out = output_dir(out_flag);
  try {
    if (rec->parsed()) return cmd_recover(rf, out);
    if (exp->parsed()) return cmd_experiment(ef, out);
    return cmd_certify(cf, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 1;
  }
}
