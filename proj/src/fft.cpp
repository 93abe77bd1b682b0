#include "cirl/fft.hpp"

#include <bit>
#include <cmath>

namespace cirl {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void FftPlan::Radix2::init(std::size_t len) {
  n = len;
  bitrev.assign(n, 0);
  const int bits = n > 1 ? std::countr_zero(n) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
    bitrev[i] = r;
  }
  twiddle.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(a), std::sin(a)};
  }
}

void FftPlan::Radix2::run(std::span<cplx> data, bool inverse) const {
  for (std::size_t i = 0; i < n; ++i) {
    if (i < bitrev[i]) std::swap(data[i], data[bitrev[i]]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx w = twiddle[k * stride];
        if (inverse) w = std::conj(w);
        const cplx a = data[start + k];
        const cplx b = data[start + k + half] * w;
        data[start + k] = a + b;
        data[start + k + half] = a - b;
      }
    }
  }
}

FftPlan::FftPlan(std::size_t n)
    : n_(n), scale_(n > 0 ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0), pow2_(is_pow2(n)) {
  if (n == 0) throw Error("FftPlan: length must be positive");
  if (pow2_) {
    radix_.init(n);
    return;
  }
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  radix_.init(m);
  chirp_.resize(n);
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small and exact.
    const std::uint64_t kk = (static_cast<std::uint64_t>(k) * k) % two_n;
    const double a = -M_PI * static_cast<double>(kk) / static_cast<double>(n);
    chirp_[k] = {std::cos(a), std::sin(a)};
  }
  chirp_fft_.assign(m, cplx{0.0, 0.0});
  chirp_fft_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    chirp_fft_[k] = std::conj(chirp_[k]);
    chirp_fft_[m - k] = std::conj(chirp_[k]);
  }
  radix_.run(chirp_fft_, false);
}

void FftPlan::transform(std::span<cplx> data, bool inverse) const {
  if (data.size() != n_) throw Error("FftPlan: length mismatch");
  if (n_ == 1) return;
  if (pow2_) {
    radix_.run(data, inverse);
    for (auto& v : data) v *= scale_;
    return;
  }
  // The inverse is conj(forward(conj(x))).
  const std::size_t m = radix_.n;
  std::vector<cplx> work(m, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx xk = inverse ? std::conj(data[k]) : data[k];
    work[k] = xk * chirp_[k];
  }
  radix_.run(work, false);
  for (std::size_t k = 0; k < m; ++k) work[k] *= chirp_fft_[k];
  radix_.run(work, true);
  const double s = scale_ / static_cast<double>(m);
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx v = work[k] * chirp_[k] * s;
    data[k] = inverse ? std::conj(v) : v;
  }
}

CVec dft(const CVec& x, bool inverse) {
  CVec out = x;
  FftPlan plan(static_cast<std::size_t>(x.size()));
  std::span<cplx> s(out.data(), static_cast<std::size_t>(out.size()));
  if (inverse) {
    plan.inverse(s);
  } else {
    plan.forward(s);
  }
  return out;
}

CVec dft_direct(const CVec& x, bool inverse) {
  const Index n = x.size();
  CVec out = CVec::Zero(n);
  const double sgn = inverse ? 1.0 : -1.0;
  for (Index k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (Index j = 0; j < n; ++j) {
      const std::int64_t p = (static_cast<std::int64_t>(j) * k) % n;
      const double a = sgn * 2.0 * M_PI * static_cast<double>(p) / static_cast<double>(n);
      acc += x[j] * cplx{std::cos(a), std::sin(a)};
    }
    out[k] = acc / std::sqrt(static_cast<double>(n));
  }
  return out;
}

Vec to_split(const CVec& z) {
  const Index n = z.size();
  Vec s(2 * n);
  s.head(n) = z.real();
  s.tail(n) = z.imag();
  return s;
}

CVec from_split(const Vec& s) {
  if (s.size() % 2 != 0) throw Error("from_split: odd storage length");
  const Index n = s.size() / 2;
  CVec z(n);
  for (Index i = 0; i < n; ++i) z[i] = {s[i], s[n + i]};
  return z;
}

}  // namespace cirl
