#include "lab/sampling.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lab {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

void check_q(double q, const char* who) {
  if (!(q >= 0.0 && q <= 1.0 - 1e-8))
    throw Error(std::string(who) + ": q must lie in [0, 1 - 1e-8]");
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : gen_(mix64(mix64(seed) ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1)))) {}

double RandomSource::uniform() { return ((gen_() >> 11) + 0.5) * 0x1p-53; }

DiscretePMF DiscretePMF::from_log_weights(long long lo,
                                          std::vector<double> lw) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : lw) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw Error("DiscretePMF: log weight not finite");
    mx = std::max(mx, v);
  }
  if (!(mx > -std::numeric_limits<double>::infinity()))
    throw Error("DiscretePMF: no positive weight");
  double s = 0.0;
  for (double v : lw) s += std::exp(v - mx);
  const double shift = mx + std::log(s);
  for (double& v : lw) v -= shift;
  DiscretePMF p;
  p.lo = lo;
  p.log_weights = std::move(lw);
  return p;
}

double DiscretePMF::mass(long long s) const {
  if (s < lo || s > hi()) return 0.0;
  return std::exp(log_weights[size_t(s - lo)]);
}

long long DiscretePMF::sample(RandomSource& rng) const {
  const double u = rng.uniform();
  double cum = 0.0;
  for (size_t i = 0; i + 1 < log_weights.size(); ++i) {
    cum += std::exp(log_weights[i]);
    if (u <= cum) return lo + (long long)i;
  }
  return hi();
}

double q_geometric_pmf(long long s, double xi, double q) {
  if (s < 0) return 0.0;
  if (!(xi >= 0.0 && xi < 1.0))
    throw Error("q_geometric_pmf: xi must lie in [0, 1)");
  check_q(q, "q_geometric_pmf");
  return std::pow(xi, double(s)) * q_pochhammer_inf(xi, q) /
         q_pochhammer(q, q, s);
}

long long sample_q_geometric(double xi, double q, RandomSource& rng) {
  if (!(xi >= 0.0 && xi < 1.0))
    throw Error("sample_q_geometric: xi must lie in [0, 1)");
  check_q(q, "sample_q_geometric");
  const double u = rng.uniform();
  // head weight (xi;q)_inf by plain products: basic operations only, so the
  // draw path is exactly reproducible
  double w = 1.0;
  long long guard = 0;
  for (double f = xi; f > 4.9e-17; f *= q) {
    w *= 1.0 - f;
    if (++guard > 2000000) throw Error("sample_q_geometric: factor cap");
  }
  double cum = w;
  long long s = 0;
  double qs = 1.0;
  while (u > cum) {
    qs *= q;
    const double wn = w * (xi / (1.0 - qs));
    if (!(wn > 0.0) || cum + wn == cum) break;
    w = wn;
    cum += w;
    ++s;
  }
  return s;
}

DiscretePMF push_pmf(long long gap, long long m, double q) {
  if (gap < 0 || m < 0) throw Error("push_pmf: negative input");
  check_q(q, "push_pmf");
  const long long smin = std::max<long long>(0, m - gap);
  const double lq = std::log(q);
  const long long top = std::max(m, gap);
  std::vector<double> lqq(size_t(top) + 1, 0.0);
  double qk = q;
  for (long long n = 1; n <= top; ++n) {
    lqq[size_t(n)] = lqq[size_t(n - 1)] + std::log(1.0 - qk);
    qk *= q;
  }
  std::vector<double> lw;
  lw.reserve(size_t(m - smin) + 1);
  for (long long s = smin; s <= m; ++s) {
    const double e = double(s) * double(gap - m + s);
    lw.push_back((e == 0.0 ? 0.0 : e * lq) + lqq[size_t(m)] - lqq[size_t(s)] -
                 lqq[size_t(m - s)] + lqq[size_t(gap)] -
                 lqq[size_t(gap - m + s)]);
  }
  return DiscretePMF::from_log_weights(smin, std::move(lw));
}

long long sample_push(long long gap, long long m, double q,
                      RandomSource& rng) {
  return push_pmf(gap, m, q).sample(rng);
}

DiscretePMF theta_pmf(double zeta, double q) {
  if (!(zeta > 0.0)) throw Error("theta_pmf: zeta must be positive");
  if (!(q > 0.0 && q <= 1.0 - 1e-8))
    throw Error("theta_pmf: q must lie in (0, 1 - 1e-8], window too wide");
  const double lq = std::log(q), lz = std::log(zeta);
  const long long kc = llround(lz / -lq);
  const long long halfw = (long long)std::ceil(8.0 / std::sqrt(-lq)) + 8;
  std::vector<double> lw;
  lw.reserve(size_t(2 * halfw) + 1);
  for (long long k = kc - halfw; k <= kc + halfw; ++k)
    lw.push_back(0.5 * double(k) * double(k) * lq + double(k) * lz);
  // windowed normalization must reproduce the triple product for theta3
  const double mx = *std::max_element(lw.begin(), lw.end());
  double s = 0.0;
  for (double v : lw) s += std::exp(v - mx);
  const double log_norm = mx + std::log(s);
  const double rq = std::sqrt(q);
  const double log_tp = log_q_pochhammer_inf(cd(q, 0), q).real() +
                        log_q_pochhammer_inf(cd(-rq * zeta, 0), q).real() +
                        log_q_pochhammer_inf(cd(-rq / zeta, 0), q).real();
  if (std::abs(log_norm - log_tp) > 1e-9 * std::max(1.0, std::abs(log_tp)))
    throw Error("theta_pmf: window normalization disagrees with theta3");
  return DiscretePMF::from_log_weights(kc - halfw, std::move(lw));
}

long long sample_theta_shift(double zeta, double q, RandomSource& rng) {
  return theta_pmf(zeta, q).sample(rng);
}

double sample_inverse_gamma(double alpha, RandomSource& rng) {
  if (!(alpha > 0.0))
    throw Error("sample_inverse_gamma: alpha must be positive");
  return 1.0 / boost::math::gamma_p_inv(alpha, rng.uniform());
}

double sample_gumbel_normal(NoiseKind kind, RandomSource& rng) {
  const double u = rng.uniform();
  if (kind == NoiseKind::gumbel) return -std::log(-std::log(u));
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

double mixed_shift_cdf(long long n, double zeta, double q) {
  if (!(zeta > 0.0)) throw Error("mixed_shift_cdf: zeta must be positive");
  if (!(q > 0.0 && q <= 1.0 - 1e-8))
    throw Error("mixed_shift_cdf: q must lie in (0, 1 - 1e-8]");
  const double lq = std::log(q);
  const double cut =
      std::log(std::numeric_limits<double>::epsilon() / 8 * (1.0 - q));
  double s = 0.0;
  long long guard = 0;
  for (double t = std::log(zeta) + (double(n) + 0.5) * lq; t > cut; t += lq) {
    s += (t > 36.0 ? t : std::log1p(std::exp(t)));
    if (++guard > 2000000) throw Error("mixed_shift_cdf: factor cap");
  }
  return std::exp(-s);
}

}  // namespace lab
