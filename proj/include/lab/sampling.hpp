#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lab/specfun.hpp"

namespace lab {

// Deterministic uniform stream. Equal (seed, stream_id) reproduces the same
// draw sequence across runs; the engine sequence is standard-mandated and the
// double mapping is fixed bit arithmetic. Not shareable between threads: one
// source per replica.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0);

  // strictly inside (0, 1)
  double uniform();

 private:
  std::mt19937_64 gen_;
};

// integer pmf on [lo, lo + log_weights.size()), stored in logs; construction
// shifts the logs so the exponentiated weights sum to 1
struct DiscretePMF {
  long long lo = 0;
  std::vector<double> log_weights;

  static DiscretePMF from_log_weights(long long lo, std::vector<double> lw);

  long long hi() const { return lo + (long long)log_weights.size() - 1; }
  double mass(long long s) const;
  // inverse-CDF draw; the floating-point residual folds into the top bin
  long long sample(RandomSource& rng) const;
};

// P(s) = xi^s (xi;q)_inf / (q;q)_s on s >= 0
double q_geometric_pmf(long long s, double xi, double q);

// lazy inverse-CDF draw from the q-Geometric law; requires 0 <= xi < 1
long long sample_q_geometric(double xi, double q, RandomSource& rng);

// pushing weights phi_{q^{-1}, q^{gap}, 0}(s | m) rewritten in base q,
//   P(s) = q^{s(gap - m + s)} [m choose s]_q (q;q)_gap / (q;q)_{gap - m + s}
// on max(0, m - gap) <= s <= m
DiscretePMF push_pmf(long long gap, long long m, double q);
long long sample_push(long long gap, long long m, double q, RandomSource& rng);

// shift law P(S = k) proportional to q^{k^2/2} zeta^k over a window around the
// mode carrying all but < 1e-14 of the mass; the builder cross-checks the
// window normalization against the triple product for theta3 and refuses
// q > 1 - 1e-8 (window too wide)
DiscretePMF theta_pmf(double zeta, double q);
long long sample_theta_shift(double zeta, double q, RandomSource& rng);

// 1/G for G ~ Gamma(alpha, 1), by quantile transform
double sample_inverse_gamma(double alpha, RandomSource& rng);

enum class NoiseKind { gumbel, normal };
// Gumbel via -log(-log U); normal via the erfc-inverse quantile
double sample_gumbel_normal(NoiseKind kind, RandomSource& rng);

// P(chi + S <= n) = 1/(-zeta q^{n + 1/2}; q)_inf for independent
// chi ~ qGeo(q), S ~ Theta(zeta; q); evaluated as a log product so very
// negative n cannot overflow
double mixed_shift_cdf(long long n, double zeta, double q);

}  // namespace lab
