#include "lab/models.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace lab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

}  // namespace

long long simulate_qpush(int N, int T, const ModelParams& p,
                         RandomSource& rng) {
  if (N < 1) throw Error("simulate_qpush: N must be positive");
  if (T < 0) throw Error("simulate_qpush: T must be nonnegative");
  if (int(p.a.size()) < N || int(p.b.size()) < T)
    throw Error("simulate_qpush: parameter lists shorter than N, T");
  for (int k = 0; k < N; ++k)
    for (int t = 0; t < T; ++t)
      if (!(p.a[k] > 0.0 && p.b[t] > 0.0 && p.a[k] * p.b[t] < 1.0))
        throw Error("simulate_qpush: requires 0 < a_k b_t < 1");

  std::vector<long long> x(N);
  for (int k = 0; k < N; ++k) x[k] = k + 1;
  for (int t = 0; t < T; ++t) {
    long long prev_old = 0, prev_disp = 0;
    for (int k = 0; k < N; ++k) {
      const long long old = x[k];
      const long long v = sample_q_geometric(p.a[k] * p.b[t], p.q, rng);
      long long w = 0;
      if (k > 0) w = sample_push(old - prev_old - 1, prev_disp, p.q, rng);
      x[k] = old + v + w;
      assert(k == 0 || x[k] > prev_old + prev_disp);
      prev_old = old;
      prev_disp = v + w;
    }
  }
  return x[N - 1];
}

long long simulate_qpush_creation(int T, const ModelParams& p,
                                  RandomSource& rng) {
  if (T < 0) throw Error("simulate_qpush_creation: T must be nonnegative");
  if (int(p.a.size()) < T)
    throw Error("simulate_qpush_creation: parameter list shorter than T");
  if (!(p.gamma >= 0.0)) throw Error("simulate_qpush_creation: gamma < 0");
  for (int i = 0; i < T; ++i) {
    if (!(p.a[i] > 0.0 && p.gamma * p.a[i] < 1.0))
      throw Error("simulate_qpush_creation: requires gamma a_i < 1");
    for (int j = i + 1; j < T; ++j)
      if (!(p.a[i] * p.a[j] < 1.0))
        throw Error("simulate_qpush_creation: requires a_i a_j < 1");
  }

  std::vector<long long> x{0};
  for (int t = 1; t <= T; ++t) {
    const double at = p.a[t - 1];
    long long prev_old = 0, prev_disp = 0;
    for (int k = 1; k < t; ++k) {
      const long long old = x[k];
      const long long v = sample_q_geometric(p.a[k - 1] * at, p.q, rng);
      const long long w = sample_push(old - prev_old - 1, prev_disp, p.q, rng);
      x[k] = old + v + w;
      assert(x[k] > prev_old + prev_disp);
      prev_old = old;
      prev_disp = v + w;
    }
    const long long vt = sample_q_geometric(p.gamma * at, p.q, rng);
    x.push_back(x[t - 1] + 1 + vt);
  }
  return x[T];
}

long long simulate_asep_current(long long x, double tau, double q, int window,
                                RandomSource& rng) {
  if (!(q >= 0.0 && q < 1.0))
    throw Error("simulate_asep_current: q must lie in [0, 1)");
  if (!(tau >= 0.0)) throw Error("simulate_asep_current: tau < 0");
  if (window < 1 || window < x + (long long)std::ceil(10.0 * tau))
    throw Error("simulate_asep_current: window too small for the light cone");

  std::vector<long long> pos(window);
  for (int k = 0; k < window; ++k) pos[k] = -(k + 1);
  double t = 0.0;
  std::vector<char> right_ok(window), left_ok(window);
  while (true) {
    double rate = 0.0;
    for (int k = 0; k < window; ++k) {
      right_ok[k] = (k == 0) || (pos[k - 1] > pos[k] + 1);
      left_ok[k] = (k == window - 1) || (pos[k + 1] < pos[k] - 1);
      rate += (right_ok[k] ? 1.0 : 0.0) + (left_ok[k] ? q : 0.0);
    }
    t += -std::log(rng.uniform()) / rate;
    if (t > tau) break;
    double r = rng.uniform() * rate;
    int mk = 0, md = 0;
    for (int k = 0; k < window && r >= 0.0; ++k) {
      if (right_ok[k]) {
        mk = k;
        md = 1;
        r -= 1.0;
        if (r < 0.0) break;
      }
      if (left_ok[k]) {
        mk = k;
        md = -1;
        r -= q;
      }
    }
    pos[mk] += md;
  }
  long long current = 0;
  for (int k = 0; k < window; ++k) current += (pos[k] > x);
  current -= std::max<long long>(0, std::min<long long>(window, -x - 1));
  return current;
}

double log_partition_dp(int T, int N, bool half,
                        const std::function<double(int, int)>& logw) {
  if (N < 1 || T < 1) throw Error("log_partition_dp: N, T must be positive");
  if (half && T < N) throw Error("log_partition_dp: half space needs T >= N");
  std::vector<double> f(size_t(N) + 1, kNegInf);
  for (int i = 1; i <= T; ++i) {
    const int jmax = half ? std::min(i, N) : N;
    const int jprev = half ? std::min(i - 1, N) : N;
    for (int j = 1; j <= jmax; ++j) {
      const double left = (i > 1 && j <= jprev) ? f[j] : kNegInf;
      const double down = (j > 1) ? f[j - 1] : kNegInf;
      const double w = logw(i, j);
      f[j] = (i == 1 && j == 1) ? w : w + logaddexp(left, down);
    }
  }
  return f[N];
}

double log_partition_full(int N, int T, const ModelParams& p,
                          RandomSource& rng) {
  if (int(p.A.size()) < T || int(p.B.size()) < N)
    throw Error("log_partition_full: parameter lists shorter than T, N");
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < N; ++j)
      if (!(p.A[i] + p.B[j] > 0.0))
        throw Error("log_partition_full: requires A_i + B_j > 0");
  return log_partition_dp(T, N, false, [&](int i, int j) {
    return std::log(sample_inverse_gamma(p.A[i - 1] + p.B[j - 1], rng));
  });
}

double log_partition_half(int N, int T, const ModelParams& p,
                          RandomSource& rng) {
  if (T < N) throw Error("log_partition_half: needs T >= N");
  if (int(p.A.size()) < T)
    throw Error("log_partition_half: parameter list shorter than T");
  for (int i = 1; i <= T; ++i)
    for (int j = 1; j <= std::min(i, N); ++j) {
      if (i == j && !(p.A[i - 1] + p.Upsilon > 0.0))
        throw Error("log_partition_half: requires A_i + Upsilon > 0");
      if (i != j && !(p.A[i - 1] + p.A[j - 1] > 0.0))
        throw Error("log_partition_half: requires A_i + A_j > 0");
    }
  return log_partition_dp(T, N, true, [&](int i, int j) {
    const double alpha =
        (i == j) ? p.A[i - 1] + p.Upsilon : p.A[i - 1] + p.A[j - 1];
    return std::log(sample_inverse_gamma(alpha, rng));
  });
}

}  // namespace lab
