#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cirl/reweighting.hpp"
#include "cirl/sampling.hpp"

namespace cirl {

// Column-major image (index i + n1 j); complex images use [re; im] storage.
struct Image {
  Index n1 = 0;
  Index n2 = 0;
  Field field = Field::real;
  Vec data;
};

// Transition counts (k1 vertical, k2 horizontal) for ratio alpha: k1 is
// K alpha / (alpha + 1) rounded half up, k2 = K - k1.
std::pair<Index, Index> split_transitions(double alpha, Index total);

// X = x1 1^T + 1 x2^T on an n x n grid, x1 with k1 and x2 with k2 jumps at
// distinct random locations and unit-variance Gaussian jump heights.
Image gen_finite_diff_2d(double alpha, Index total, Index n, std::uint64_t seed);

// Ten-ellipse phantom (modified intensities) on [-1, 1]^2 with pixel
// centres; the complex version copies the real part into the imaginary part.
Image gen_shepp_logan(Index n1, Index n2, bool complex_valued);

// Synthetic spatio-temporal profile: n1 spatial rows by T frames, a smooth
// static background and a few bands whose edges oscillate in time.
Image gen_dmri_profile(Index n1, Index frames, std::uint64_t seed);

// Binary (P5) or ASCII (P2) graymap with maxval up to 65535, scaled to
// [0, 1]. A nonzero crop size selects the centred window.
Image load_image_pgm(const std::string& path, Index crop_rows = 0, Index crop_cols = 0);
Image center_crop(const Image& img, Index rows, Index cols);
// Writes P5; values are clamped to [0, 1]. Complex images are written as
// magnitudes scaled by their maximum.
void write_pgm(const std::string& path, const Image& img, int maxval = 255);

// Raw little-endian float32 frames with a JSON sidecar {"n1":..,"frames":..}.
Image load_raw_float32(const std::string& path, const std::string& sidecar);

struct NoisyMeasurement {
  Vec y;
  double sigma2 = 0.0;
};

// Adds white Gaussian noise with sigma^2 = ||y||^2 / (M 10^(snr/10)); M is
// the number of samples (complex samples when field is complex, whose real
// and imaginary parts each get sigma^2 / 2). An infinite target adds nothing.
NoisyMeasurement add_awgn(const Vec& y_clean, double target_snr_db, std::uint64_t seed,
                          Field field);

// 10 log10(||x||^2 / ||x - x_hat||^2); +inf when x_hat == x.
double recovery_snr_db(const Vec& x_true, const Vec& x_hat);

enum class Generator { finite_diff, shepp_logan, image_file, dmri_profile, dmri_file };
enum class OperatorKind { spread_spectrum, partial_fourier_video };
enum class DictFamily { finite_difference, owt, uwt };

struct DictionarySpec {
  DictFamily family = DictFamily::finite_difference;
  std::vector<Wavelet> wavelets;  // concatenated in order
  Index levels = 1;

  std::string label() const;
};

CompositeDictionary build_dictionary(const DictionarySpec& spec, Index n1, Index n2,
                                     Field field);
// "fd", "uwt-db1", "owt-db1-db2-db3", ...
DictionarySpec parse_dictionary(const std::string& text, Index levels);

struct ExperimentSpec {
  std::string name = "custom";
  std::string sweep_param = "";  // label written to the tables

  Generator generator = Generator::finite_diff;
  double alpha = 1.0;
  Index transitions = 20;
  Index n1 = 32;
  Index n2 = 32;  // frames for the video generators
  bool complex_signal = false;
  std::string image_path;
  std::string sidecar_path;

  OperatorKind op = OperatorKind::spread_spectrum;
  // Real measurements per unknown after splitting when the signal is real,
  // complex samples per unknown otherwise.
  double sampling_ratio = 0.25;
  double density_sigma = 0.15;

  double snr_db = 40.0;
  std::vector<Algorithm> algorithms;
  int trials = 1;
  std::uint64_t base_seed = 1;
  DictionarySpec dictionary;
  OuterConfig outer;  // gamma is set per trial from the noise level

  void validate() const;
};

// Problem instance for one trial; x is fixed for file-based generators.
struct TrialInstance {
  Image truth;
  LinOp phi;
  Vec y;
  double sigma2 = 0.0;
  double measurement_snr_db = 0.0;
  CompositeDictionary dict;
  SamplingPattern pattern;
};

std::uint64_t trial_seed(std::uint64_t base_seed, int trial);
TrialInstance make_instance(const ExperimentSpec& spec, std::uint64_t seed);

struct TrialRecord {
  std::string experiment;
  Algorithm algorithm = Algorithm::l1;
  std::string sweep_param;
  int trial = 0;
  std::uint64_t seed = 0;
  double recovery_snr_db = 0.0;
  double measurement_snr_db = 0.0;
  int outer_iters = 0;
  double wall_time = 0.0;
  bool failed = false;
  std::string error;
};

struct MedianRecord {
  std::string experiment;
  Algorithm algorithm = Algorithm::l1;
  std::string sweep_param;
  double median_snr_db = 0.0;
  int trial_count = 0;
};

struct TrialOutput {
  std::vector<TrialRecord> records;  // sorted by point, algorithm, trial
  std::vector<MedianRecord> medians;
};

// Called once per (point, algorithm, trial) with the reconstruction.
using ReconstructionSink =
    std::function<void(const ExperimentSpec&, const TrialRecord&, const Image& estimate)>;

// Runs every algorithm on `trials` paired instances of each point. Work is
// spread over up to `threads` workers; the output order does not depend on
// scheduling.
TrialOutput run_trials(const std::vector<ExperimentSpec>& points, int threads = 1,
                       const ReconstructionSink& sink = nullptr);
TrialOutput run_trials(const ExperimentSpec& spec, int threads = 1);

double median(std::vector<double> v);

// Results CSV: experiment, algorithm, sweep_param, trial_seed,
// recovery_snr_db, outer_iters. Wall times are kept out of the CSV so that
// replays compare byte for byte; see write_timings_json.
void write_results_csv(std::ostream& os, const std::vector<TrialRecord>& records);
void write_medians_csv(std::ostream& os, const std::vector<MedianRecord>& medians);
void write_timings_json(std::ostream& os, const std::vector<TrialRecord>& records);

// Named protocols at desk scale, or the published sizes when paper_scale.
std::vector<ExperimentSpec> alpha_sweep_protocol(bool paper_scale);
std::vector<ExperimentSpec> image_protocol(bool paper_scale, const std::string& target,
                                           const std::string& image_path);
std::vector<ExperimentSpec> dmri_protocol(bool paper_scale);
std::vector<ExperimentSpec> dictionary_sweep_protocol(bool paper_scale,
                                                      const std::string& image_path);

}  // namespace cirl
