#include "cirl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>

#include "cirl/fft.hpp"
#include "cirl/rng.hpp"
#include "json.hpp"

namespace cirl {

Index SamplingPattern::total_rows() const {
  Index m = 0;
  for (const auto& f : frames) m += static_cast<Index>(f.size());
  return m;
}

std::string to_json(const SamplingPattern& p) {
  nlohmann::json j;
  j["seed"] = p.seed;
  j["density_sigma"] = p.density_sigma;
  j["total_rows"] = p.total_rows();
  j["frames"] = p.frames;
  return j.dump();
}

SamplingPattern pattern_from_json(const std::string& text) {
  SamplingPattern p;
  try {
    const auto j = nlohmann::json::parse(text);
    p.seed = j.at("seed").get<std::uint64_t>();
    p.density_sigma = j.at("density_sigma").get<double>();
    p.frames = j.at("frames").get<std::vector<std::vector<Index>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("pattern_from_json: ") + e.what());
  }
  return p;
}

Index signed_frequency(Index k, Index n) { return k <= n / 2 ? k : k - n; }

std::vector<std::vector<Index>> frequency_classes(Index n, bool conjugate_exclusion) {
  std::vector<std::vector<Index>> classes;
  if (!conjugate_exclusion) {
    for (Index k = 0; k < n; ++k) classes.push_back({k});
    return classes;
  }
  classes.push_back({0});
  for (Index f = 1; 2 * f < n; ++f) classes.push_back({f, n - f});
  if (n % 2 == 0 && n > 1) classes.push_back({n / 2});
  return classes;
}

namespace {

Index pick_member(const std::vector<Index>& cls, Rng& rng) {
  if (cls.size() == 1) return cls[0];
  return cls[static_cast<std::size_t>(rng.below(cls.size()))];
}

// Rows are laid out frame by frame; frame t reads samples
// [t * n, (t + 1) * n) of the domain.
class FourierSampleImpl final : public LinOpImpl {
 public:
  FourierSampleImpl(Index n, std::vector<std::vector<Index>> rows, Vec signs, bool complex_domain)
      : n_(n),
        rows_(std::move(rows)),
        signs_(std::move(signs)),
        complex_(complex_domain),
        plan_(std::make_shared<FftPlan>(static_cast<std::size_t>(n))) {
    for (const auto& r : rows_) m_ += static_cast<Index>(r.size());
    total_n_ = n_ * static_cast<Index>(rows_.size());
  }

  void forward(VecCRef in, VecRef out) const override {
    std::vector<cplx> buf(static_cast<std::size_t>(n_));
    Index row = 0;
    for (std::size_t t = 0; t < rows_.size(); ++t) {
      const Index base = static_cast<Index>(t) * n_;
      for (Index i = 0; i < n_; ++i) {
        const double s = signs_.size() ? signs_[i] : 1.0;
        const double im = complex_ ? in[total_n_ + base + i] : 0.0;
        buf[static_cast<std::size_t>(i)] = {s * in[base + i], s * im};
      }
      plan_->forward(buf);
      for (Index k : rows_[t]) {
        const cplx v = buf[static_cast<std::size_t>(k)];
        out[row] = v.real();
        out[m_ + row] = v.imag();
        ++row;
      }
    }
  }

  void adjoint(VecCRef in, VecRef out) const override {
    std::vector<cplx> buf(static_cast<std::size_t>(n_));
    Index row = 0;
    for (std::size_t t = 0; t < rows_.size(); ++t) {
      const Index base = static_cast<Index>(t) * n_;
      std::fill(buf.begin(), buf.end(), cplx{0.0, 0.0});
      for (Index k : rows_[t]) {
        buf[static_cast<std::size_t>(k)] = {in[row], in[m_ + row]};
        ++row;
      }
      plan_->inverse(buf);
      for (Index i = 0; i < n_; ++i) {
        const double s = signs_.size() ? signs_[i] : 1.0;
        const cplx v = buf[static_cast<std::size_t>(i)] * s;
        out[base + i] = v.real();
        if (complex_) out[total_n_ + base + i] = v.imag();
      }
    }
  }

 private:
  Index n_;
  std::vector<std::vector<Index>> rows_;
  Vec signs_;
  bool complex_;
  std::shared_ptr<const FftPlan> plan_;
  Index m_ = 0;
  Index total_n_ = 0;
};

}  // namespace

SampledOp make_spread_spectrum(Index n, Index m, std::uint64_t seed, Field domain) {
  return make_spread_spectrum(n, m, seed, domain, domain == Field::real);
}

SampledOp make_spread_spectrum(Index n, Index m, std::uint64_t seed, Field domain,
                               bool conjugate_exclusion) {
  if (n < 1 || m < 1 || m > n) throw Error("make_spread_spectrum: need 1 <= M <= N");
  const auto classes = frequency_classes(n, conjugate_exclusion);
  if (m > static_cast<Index>(classes.size())) {
    throw Error("make_spread_spectrum: M exceeds the number of admissible rows");
  }
  Rng rng(derive_seed(seed, 0x55));
  Vec signs(n);
  for (Index i = 0; i < n; ++i) signs[i] = rng.sign();
  const auto picked =
      rng.sample_without_replacement(classes.size(), static_cast<std::size_t>(m));
  std::vector<Index> rows;
  rows.reserve(picked.size());
  for (std::size_t c : picked) rows.push_back(pick_member(classes[c], rng));
  std::sort(rows.begin(), rows.end());

  SampledOp out;
  out.pattern.frames = {rows};
  out.pattern.seed = seed;
  out.signs = signs;
  out.op = LinOp(std::make_shared<FourierSampleImpl>(n, out.pattern.frames, signs,
                                                     domain == Field::complex),
                 m, n, domain, Field::complex);
  return out;
}

SampledOp make_partial_fourier_video(Index n1, Index frames, Index m1, double density_sigma,
                                     std::uint64_t seed, Field domain) {
  return make_partial_fourier_video(n1, frames, m1, density_sigma, seed, domain,
                                    domain == Field::real);
}

SampledOp make_partial_fourier_video(Index n1, Index frames, Index m1, double density_sigma,
                                     std::uint64_t seed, Field domain,
                                     bool conjugate_exclusion) {
  if (n1 < 1 || frames < 1) throw Error("make_partial_fourier_video: empty image");
  if (m1 < 1 || m1 > n1) throw Error("make_partial_fourier_video: need 1 <= m1 <= n1");
  if (!(density_sigma > 0.0)) throw Error("make_partial_fourier_video: density_sigma must be > 0");
  const auto classes = frequency_classes(n1, conjugate_exclusion);
  if (m1 > static_cast<Index>(classes.size())) {
    throw Error("make_partial_fourier_video: m1 exceeds the number of admissible rows");
  }
  // Class 0 is always DC in either layout.
  std::vector<double> weight(classes.size());
  const double width = density_sigma * static_cast<double>(n1);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const double f = static_cast<double>(signed_frequency(classes[c][0], n1));
    weight[c] = std::exp(-f * f / (2.0 * width * width));
  }

  SamplingPattern pattern;
  pattern.seed = seed;
  pattern.density_sigma = density_sigma;
  for (Index t = 0; t < frames; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t), 0x56));
    std::vector<Index> rows{0};
    std::vector<std::size_t> pool;
    for (std::size_t c = 1; c < classes.size(); ++c) pool.push_back(c);
    std::vector<double> w;
    for (std::size_t c : pool) w.push_back(weight[c]);
    for (Index k = 1; k < m1; ++k) {
      double total = 0.0;
      for (double v : w) total += v;
      std::size_t pick = pool.size() - 1;
      if (total > 0.0) {
        double r = rng.uniform() * total;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          r -= w[i];
          if (r < 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<std::size_t>(rng.below(pool.size()));
      }
      rows.push_back(pick_member(classes[pool[pick]], rng));
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(rows.begin(), rows.end());
    pattern.frames.push_back(std::move(rows));
  }

  SampledOp out;
  out.pattern = pattern;
  out.op = LinOp(std::make_shared<FourierSampleImpl>(n1, pattern.frames, Vec(),
                                                     domain == Field::complex),
                 pattern.total_rows(), n1 * frames, domain, Field::complex);
  return out;
}

}  // namespace cirl
