#pragma once

#include <functional>
#include <vector>

#include "lab/sampling.hpp"

namespace lab {

struct ModelParams {
  double q = 0.0;
  std::vector<double> a, b;
  double gamma = 0.0;
  std::vector<double> A, B;
  double Upsilon = 0.0;
};

// geometric q-PushTASEP, packed initial data x_k(0) = k: per sweep t each
// particle jumps by q-Geo(a_k b_t) and is pushed by
// phi_{q^{-1}, q^{gap}, 0}(. | displacement of the left neighbor); returns
// x_N(T)
long long simulate_qpush(int N, int T, const ModelParams& p,
                         RandomSource& rng);

// q-PushTASEP with particle creation, empty initial data: existing particles
// follow the pushing rules with jumps q-Geo(a_k a_t), then a new particle
// appears at distance 1 + q-Geo(gamma a_t) from the rightmost; particle 0
// stays at 0; returns x_T^hs(T)
long long simulate_qpush_creation(int T, const ModelParams& p,
                                  RandomSource& rng);

// ASEP with step initial data x_k(0) = -k, left jump rate q, right jump
// rate 1; the first `window` particles are simulated (event-driven, exact)
// and the light cone requires window >= x + ceil(10 tau); returns the
// integrated current J(x, tau)
long long simulate_asep_current(long long x, double tau, double q, int window,
                                RandomSource& rng);

// shared DP for directed-polymer partition functions: log Z(T, N) over
// up-right paths (1,1) -> (T,N), site log weights supplied through `logw`
// which is called once per site in sweep order (i = 1..T outer, j ascending);
// `half` restricts the lattice to i >= j
double log_partition_dp(int T, int N, bool half,
                        const std::function<double(int, int)>& logw);

// full-space log Gamma polymer: w_{i,j} ~ Gamma^{-1}(A_i + B_j) drawn fresh,
// A indexed by the path-length coordinate i = 1..T, B by j = 1..N
double log_partition_full(int N, int T, const ModelParams& p,
                          RandomSource& rng);

// half-space log Gamma polymer on i >= j, T >= N: diagonal weights
// Gamma^{-1}(A_i + Upsilon), bulk Gamma^{-1}(A_i + A_j)
double log_partition_half(int N, int T, const ModelParams& p,
                          RandomSource& rng);

}  // namespace lab
