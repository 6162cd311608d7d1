#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "lab/models.hpp"
#include "lab/sampling.hpp"
#include "lab/symfunc.hpp"

using lab::ModelParams;
using lab::RandomSource;

namespace {

ModelParams qpush_params(double q, std::vector<double> a,
                         std::vector<double> b) {
  ModelParams p;
  p.q = q;
  p.a = std::move(a);
  p.b = std::move(b);
  return p;
}

double pmf_cdf(const lab::DiscretePMF& p, long long s) {
  double c = 0.0;
  for (long long t = p.lo; t <= std::min(s, p.hi()); ++t) c += p.mass(t);
  return c;
}

// empirical CDF of draw(rng) - base over n replicas, one stream per replica
std::vector<double> empirical_cdf(
    const std::function<long long(RandomSource&)>& draw, long long base,
    std::uint64_t seed, int n, size_t len) {
  std::vector<double> counts(len, 0.0);
  for (int r = 0; r < n; ++r) {
    RandomSource rng(seed, std::uint64_t(r));
    const long long v = draw(rng) - base;
    REQUIRE(v >= 0);
    REQUIRE(size_t(v) < len);
    counts[size_t(v)] += 1.0;
  }
  double c = 0.0;
  for (auto& x : counts) {
    c += x;
    x = c / n;
  }
  return counts;
}

// log of the sum over up-right lattice paths (1,1) -> (T,N) of the product
// of site weights, by direct enumeration
double path_enum_log(int T, int N, bool half,
                     const std::vector<std::vector<double>>& lw, int* paths) {
  double total = 0.0;
  int count = 0;
  std::function<void(int, int, double)> rec = [&](int i, int j, double acc) {
    if (i == T && j == N) {
      total += std::exp(acc);
      ++count;
      return;
    }
    if (i < T) rec(i + 1, j, acc + lw[size_t(i)][size_t(j - 1)]);
    if (j < N && (!half || i > j))
      rec(i, j + 1, acc + lw[size_t(i - 1)][size_t(j)]);
  };
  rec(1, 1, lw[0][0]);
  if (paths) *paths = count;
  return std::log(total);
}

// E[J(0,tau)] for step-initial ASEP from the exact generator on a 12-site
// box (positions -7..4, seven particles) via a uniformized matrix
// exponential; the box walls bias the mean by O(1e-4) at tau = 1, far
// below the Monte Carlo noise it is compared against
double asep_mean_oracle(double q, double tau) {
  const int S = 12;
  std::vector<int> states;
  std::vector<int> index(size_t(1) << S, -1);
  for (int m = 0; m < (1 << S); ++m)
    if (std::popcount(unsigned(m)) == 7) {
      index[size_t(m)] = int(states.size());
      states.push_back(m);
    }
  const int n = int(states.size());
  const size_t ns = states.size();
  std::vector<std::vector<std::pair<int, double>>> trans(ns);
  std::vector<double> exit(ns, 0.0);
  for (int si = 0; si < n; ++si) {
    const int m = states[size_t(si)];
    for (int s = 0; s < S; ++s) {
      if (!((m >> s) & 1)) continue;
      if (s + 1 < S && !((m >> (s + 1)) & 1)) {
        trans[size_t(si)].emplace_back(index[size_t(m ^ (1 << s) ^ (1 << (s + 1)))],
                                       1.0);
        exit[size_t(si)] += 1.0;
      }
      if (s > 0 && !((m >> (s - 1)) & 1)) {
        trans[size_t(si)].emplace_back(index[size_t(m ^ (1 << s) ^ (1 << (s - 1)))],
                                       q);
        exit[size_t(si)] += q;
      }
    }
  }
  const double lambda = *std::max_element(exit.begin(), exit.end());
  std::vector<double> v(ns, 0.0), vn(ns, 0.0), w(ns, 0.0);
  v[size_t(index[0x7F])] = 1.0;  // particles at -1..-7
  double pois = std::exp(-lambda * tau), cum = 0.0;
  for (int k = 0; cum < 1.0 - 1e-12; ++k) {
    REQUIRE(k < 2000);
    if (k > 0) {
      pois *= lambda * tau / k;
      std::fill(vn.begin(), vn.end(), 0.0);
      for (int si = 0; si < n; ++si) {
        if (v[size_t(si)] == 0.0) continue;
        vn[size_t(si)] += v[size_t(si)] * (1.0 - exit[size_t(si)] / lambda);
        for (const auto& [tj, rate] : trans[size_t(si)])
          vn[size_t(tj)] += v[size_t(si)] * rate / lambda;
      }
      v.swap(vn);
    }
    for (int si = 0; si < n; ++si) w[size_t(si)] += pois * v[size_t(si)];
    cum += pois;
  }
  double mean = 0.0;
  for (int si = 0; si < n; ++si)
    mean += w[size_t(si)] * std::popcount(unsigned(states[size_t(si)]) >> 8);
  return mean;
}

}  // namespace

TEST_CASE("simulations replay bitwise under identical seeds") {
  const ModelParams qp = qpush_params(0.5, {0.3, 0.5, 0.4}, {0.6, 0.4, 0.5});
  ModelParams cr;
  cr.q = 0.5;
  cr.a = {0.4, 0.5, 0.3};
  cr.gamma = 0.3;
  ModelParams pf;
  pf.A = {0.8, 1.3, 0.6};
  pf.B = {0.9, 0.7, 1.1};
  pf.Upsilon = 0.5;
  for (std::uint64_t seed : {std::uint64_t(1), std::uint64_t(42)}) {
    RandomSource a1(seed, 7), a2(seed, 7);
    CHECK(lab::simulate_qpush(3, 3, qp, a1) ==
          lab::simulate_qpush(3, 3, qp, a2));
    RandomSource b1(seed, 8), b2(seed, 8);
    CHECK(lab::simulate_qpush_creation(3, cr, b1) ==
          lab::simulate_qpush_creation(3, cr, b2));
    RandomSource c1(seed, 9), c2(seed, 9);
    CHECK(lab::simulate_asep_current(0, 1.0, 0.4, 20, c1) ==
          lab::simulate_asep_current(0, 1.0, 0.4, 20, c2));
    RandomSource d1(seed, 10), d2(seed, 10);
    CHECK(lab::log_partition_full(3, 3, pf, d1) ==
          lab::log_partition_full(3, 3, pf, d2));
    RandomSource e1(seed, 11), e2(seed, 11);
    CHECK(lab::log_partition_half(3, 3, pf, e1) ==
          lab::log_partition_half(3, 3, pf, e2));
  }
  for (std::uint64_t s = 0; s < 50; ++s) {
    RandomSource r1(s, 0), r2(s, 1);
    CHECK(lab::simulate_qpush(3, 3, qp, r1) >= 3);
    CHECK(lab::simulate_qpush_creation(3, cr, r2) >= 3);
  }
}

TEST_CASE("qpush degenerate cases and validation") {
  RandomSource rng(1, 0);
  for (int N : {1, 3, 7}) {
    const ModelParams p =
        qpush_params(0.5, std::vector<double>(size_t(N), 0.4), {});
    CHECK(lab::simulate_qpush(N, 0, p, rng) == N);
  }
  {
    // one particle never gets pushed: plain sum of q-geometric jumps
    const ModelParams p = qpush_params(0.5, {0.7}, {0.6, 0.4, 0.5, 0.7});
    RandomSource r1(9, 1), r2(9, 1);
    const long long got = lab::simulate_qpush(1, 4, p, r1);
    long long want = 1;
    for (double bt : p.b) want += lab::sample_q_geometric(0.7 * bt, 0.5, r2);
    CHECK(got == want);
  }
  RandomSource r(2, 0);
  const ModelParams ok = qpush_params(0.5, {0.5}, {0.5});
  CHECK_THROWS_AS(lab::simulate_qpush(0, 1, ok, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_qpush(1, -1, ok, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_qpush(2, 1, ok, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_qpush(1, 2, ok, r), lab::Error);
  CHECK_THROWS_AS(
      lab::simulate_qpush(1, 1, qpush_params(0.5, {2.0}, {0.6}), r),
      lab::Error);
  CHECK_THROWS_AS(
      lab::simulate_qpush(1, 1, qpush_params(0.5, {0.0}, {0.6}), r),
      lab::Error);
}

TEST_CASE("qpush rightmost particle matches the enumerated first-row law") {
  const int n = 100000;
  const ModelParams p = qpush_params(0.5, {0.5, 0.5}, {0.5, 0.5});
  const auto F = empirical_cdf(
      [&](RandomSource& rng) { return lab::simulate_qpush(2, 2, p, rng); }, 2,
      2026, n, 64);
  lab::MeasureParams mp;
  mp.a = {0.5, 0.5};
  mp.b = {0.5, 0.5};
  mp.q = 0.5;
  // masses below the box bound are exact: the box only cuts larger first
  // parts and the normalization is the closed-form product
  const lab::EnumerationBox box{12, 2};
  const auto mass = lab::first_row_masses(lab::MeasureKind::qW, mp, box);
  double fe = 0.0;
  for (long long s = 0; s <= 6; ++s) {
    fe += mass[size_t(s)];
    const double sig = std::sqrt(fe * (1.0 - fe) / n);
    REQUIRE(std::abs(F[size_t(s)] - fe) < 4.0 * sig + 1e-9);
  }
  CHECK(lab::enumerated_cdf(lab::Observable::mu1_qW, 6, mp, box) ==
        doctest::Approx(fe).epsilon(1e-12));
}

TEST_CASE("creation chain degenerate cases and validation") {
  ModelParams p;
  p.q = 0.5;
  p.a = {0.4, 0.5, 0.3};
  p.gamma = 0.3;
  RandomSource rng(3, 0);
  CHECK(lab::simulate_qpush_creation(0, p, rng) == 0);
  {
    RandomSource r1(4, 2), r2(4, 2);
    const long long got = lab::simulate_qpush_creation(1, p, r1);
    CHECK(got == 1 + lab::sample_q_geometric(0.3 * 0.4, 0.5, r2));
  }
  ModelParams z = p;
  z.gamma = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    RandomSource r(s, 0);
    CHECK(lab::simulate_qpush_creation(1, z, r) == 1);
  }
  RandomSource r(5, 0);
  CHECK_THROWS_AS(lab::simulate_qpush_creation(-1, p, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_qpush_creation(4, p, r), lab::Error);
  ModelParams bad = p;
  bad.gamma = 3.0;
  CHECK_THROWS_AS(lab::simulate_qpush_creation(2, bad, r), lab::Error);
  bad = p;
  bad.a = {1.5, 0.9};
  bad.gamma = 0.1;
  CHECK_THROWS_AS(lab::simulate_qpush_creation(2, bad, r), lab::Error);
  bad = p;
  bad.gamma = -0.1;
  CHECK_THROWS_AS(lab::simulate_qpush_creation(1, bad, r), lab::Error);
}

TEST_CASE("creation chain matches the enumerated half-space first-row law") {
  const int n = 100000;
  ModelParams p;
  p.q = 0.5;
  p.a = {0.4, 0.4};
  p.gamma = 0.3;
  const auto F = empirical_cdf(
      [&](RandomSource& rng) { return lab::simulate_qpush_creation(2, p, rng); },
      2, 2027, n, 64);
  lab::MeasureParams mp;
  mp.a = {0.4, 0.4};
  mp.gamma = 0.3;
  mp.q = 0.5;
  const lab::EnumerationBox box{12, 2};
  const auto mass = lab::first_row_masses(lab::MeasureKind::hsqW, mp, box);
  double fe = 0.0;
  for (long long s = 0; s <= 6; ++s) {
    fe += mass[size_t(s)];
    const double sig = std::sqrt(fe * (1.0 - fe) / n);
    REQUIRE(std::abs(F[size_t(s)] - fe) < 4.0 * sig + 1e-9);
  }
  CHECK(lab::enumerated_cdf(lab::Observable::mu1_hsqW, 6, mp, box) ==
        doctest::Approx(fe).epsilon(1e-12));
}

TEST_CASE("asep current basics and validation") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    RandomSource r(s, 3);
    CHECK(lab::simulate_asep_current(0, 0.0, 0.4, 10, r) == 0);
  }
  for (std::uint64_t s = 0; s < 30; ++s) {
    RandomSource r(s, 4);
    const long long j = lab::simulate_asep_current(0, 1.0, 0.4, 20, r);
    CHECK(j >= 0);
    CHECK(j <= 20);
  }
  RandomSource r(6, 0);
  CHECK_THROWS_AS(lab::simulate_asep_current(0, 1.0, 1.0, 20, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_asep_current(0, 1.0, -0.1, 20, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_asep_current(0, -1.0, 0.4, 20, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_asep_current(0, 1.0, 0.4, 9, r), lab::Error);
  CHECK_THROWS_AS(lab::simulate_asep_current(5, 1.0, 0.4, 14, r), lab::Error);
}

TEST_CASE("asep current mean matches a truncated generator oracle") {
  const double q = 0.4, tau = 1.0;
  const double want = asep_mean_oracle(q, tau);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < n; ++r) {
    RandomSource rng(7, std::uint64_t(r));
    const double j = double(lab::simulate_asep_current(0, tau, q, 20, rng));
    sum += j;
    sum2 += j * j;
  }
  const double mean = sum / n;
  const double serr = std::sqrt((sum2 / n - mean * mean) / n);
  REQUIRE(std::abs(mean - want) < 4.0 * serr);

  // doubling the particle window moves the mean by far less than the noise
  const int m = 20000;
  double sum40 = 0.0, sum402 = 0.0;
  for (int r = 0; r < m; ++r) {
    RandomSource rng(8, std::uint64_t(r));
    const double j = double(lab::simulate_asep_current(0, tau, q, 40, rng));
    sum40 += j;
    sum402 += j * j;
  }
  const double mean40 = sum40 / m;
  const double serr40 = std::sqrt((sum402 / m - mean40 * mean40) / m);
  CHECK(std::abs(mean - mean40) <
        4.0 * std::sqrt(serr * serr + serr40 * serr40));
}

TEST_CASE("polymer dp equals path enumeration on fixed environments") {
  const std::vector<std::vector<double>> lw{
      {0.3, -0.8, 0.5}, {1.1, 0.0, -0.4}, {-1.2, 0.7, 0.2}};
  auto at = [&](int i, int j) { return lw[size_t(i - 1)][size_t(j - 1)]; };
  int paths = 0;
  const double full33 = path_enum_log(3, 3, false, lw, &paths);
  CHECK(paths == 6);
  CHECK(lab::log_partition_dp(3, 3, false, at) ==
        doctest::Approx(full33).epsilon(1e-13));
  const double half33 = path_enum_log(3, 3, true, lw, &paths);
  CHECK(paths == 2);
  CHECK(lab::log_partition_dp(3, 3, true, at) ==
        doctest::Approx(half33).epsilon(1e-13));

  const std::vector<std::vector<double>> lw42{
      {0.2, -0.5}, {0.9, 0.1}, {-0.3, 0.6}, {0.4, -0.9}};
  auto at42 = [&](int i, int j) { return lw42[size_t(i - 1)][size_t(j - 1)]; };
  const double full42 = path_enum_log(4, 2, false, lw42, &paths);
  CHECK(paths == 4);
  CHECK(lab::log_partition_dp(4, 2, false, at42) ==
        doctest::Approx(full42).epsilon(1e-13));
  const double half42 = path_enum_log(4, 2, true, lw42, &paths);
  CHECK(paths == 3);
  CHECK(lab::log_partition_dp(4, 2, true, at42) ==
        doctest::Approx(half42).epsilon(1e-13));
}

TEST_CASE("polymer partition functions replay the drawn environment") {
  ModelParams p;
  p.A = {0.8, 1.3, 0.6};
  p.B = {0.9, 0.7};
  p.Upsilon = 0.5;
  {
    RandomSource r1(11, 3), r2(11, 3);
    CHECK(lab::log_partition_full(1, 1, p, r1) ==
          std::log(lab::sample_inverse_gamma(0.8 + 0.9, r2)));
  }
  {
    RandomSource r1(12, 3), r2(12, 3);
    const double got = lab::log_partition_full(1, 3, p, r1);
    double want = 0.0;
    for (int i = 0; i < 3; ++i)
      want += std::log(lab::sample_inverse_gamma(p.A[size_t(i)] + p.B[0], r2));
    CHECK(got == want);
  }
  {
    RandomSource r1(13, 3), r2(13, 3);
    CHECK(lab::log_partition_half(1, 1, p, r1) ==
          std::log(lab::sample_inverse_gamma(0.8 + 0.5, r2)));
  }
  {
    // single row: the first weight sits on the diagonal, the rest are bulk
    RandomSource r1(14, 3), r2(14, 3);
    const double got = lab::log_partition_half(1, 3, p, r1);
    double want = std::log(lab::sample_inverse_gamma(p.A[0] + p.Upsilon, r2));
    want += std::log(lab::sample_inverse_gamma(p.A[1] + p.A[0], r2));
    want += std::log(lab::sample_inverse_gamma(p.A[2] + p.A[0], r2));
    CHECK(got == want);
  }
  RandomSource r(15, 0);
  ModelParams bad;
  bad.A = {0.2, 0.2};
  bad.B = {-0.3, 0.5};
  CHECK_THROWS_AS(lab::log_partition_full(2, 2, bad, r), lab::Error);
  CHECK_THROWS_AS(lab::log_partition_full(3, 2, bad, r), lab::Error);
  CHECK_THROWS_AS(lab::log_partition_half(3, 2, p, r), lab::Error);
  ModelParams hb;
  hb.A = {0.5, 0.4};
  hb.Upsilon = -0.6;
  CHECK_THROWS_AS(lab::log_partition_half(1, 2, hb, r), lab::Error);
  hb.A = {0.6, -0.7};
  hb.Upsilon = 2.0;
  CHECK_THROWS_AS(lab::log_partition_half(2, 2, hb, r), lab::Error);
}

TEST_CASE("push distribution monotonicity and one-site pathwise coupling") {
  for (double q : {0.2, 0.5, 0.8}) {
    for (long long gap = 0; gap <= 10; ++gap) {
      for (long long m = 0; m <= 10; ++m) {
        const auto p0 = lab::push_pmf(gap, m, q);
        const auto pm = lab::push_pmf(gap, m + 1, q);
        const auto pg = lab::push_pmf(gap + 1, m, q);
        for (long long s = -1; s <= m + 1; ++s) {
          // more displacement pushes harder, more room pushes less,
          // and one extra site of room relaxes the push by at most one
          CHECK(pmf_cdf(pm, s) <= pmf_cdf(p0, s) + 1e-12);
          CHECK(pmf_cdf(pg, s) >= pmf_cdf(p0, s) - 1e-12);
          CHECK(pmf_cdf(pg, s) <= pmf_cdf(p0, s + 1) + 1e-12);
        }
      }
    }
  }
  // with one particle the walk is a plain q-geometric sum, and the
  // inverse-CDF draw is monotone in its rate parameter stream by stream
  const std::vector<double> b{0.6, 0.4, 0.5, 0.7};
  for (double q : {0.0, 0.5}) {
    const ModelParams lo = qpush_params(q, {0.3}, b);
    const ModelParams hi = qpush_params(q, {0.5}, b);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      RandomSource r1(seed, 0), r2(seed, 0);
      REQUIRE(lab::simulate_qpush(1, 4, lo, r1) <=
              lab::simulate_qpush(1, 4, hi, r2));
    }
  }
}

TEST_CASE("enumerated first-row law is monotone in each a parameter") {
  const lab::EnumerationBox box{14, 2};
  auto cdf = [&](lab::MeasureKind kind, const lab::MeasureParams& mp) {
    auto m = lab::first_row_masses(kind, mp, box);
    for (size_t i = 1; i < m.size(); ++i) m[i] += m[i - 1];
    return m;
  };
  lab::MeasureParams base;
  base.a = {0.4, 0.5};
  base.b = {0.5, 0.6};
  base.q = 0.5;
  const auto fb = cdf(lab::MeasureKind::qW, base);
  for (size_t which : {size_t(0), size_t(1)}) {
    lab::MeasureParams up = base;
    up.a[which] += 0.2;
    const auto fu = cdf(lab::MeasureKind::qW, up);
    for (size_t s = 0; s <= 8; ++s) CHECK(fu[s] <= fb[s] + 1e-9);
  }
  lab::MeasureParams hb;
  hb.a = {0.3, 0.4};
  hb.gamma = 0.2;
  hb.q = 0.5;
  const auto fh = cdf(lab::MeasureKind::hsqW, hb);
  for (size_t which : {size_t(0), size_t(1)}) {
    lab::MeasureParams up = hb;
    up.a[which] += 0.25;
    const auto fu = cdf(lab::MeasureKind::hsqW, up);
    for (size_t s = 0; s <= 8; ++s) CHECK(fu[s] <= fh[s] + 1e-9);
  }
  lab::MeasureParams ub = hb;
  ub.gamma = 0.45;
  const auto fg = cdf(lab::MeasureKind::hsqW, ub);
  for (size_t s = 0; s <= 8; ++s) CHECK(fg[s] <= fh[s] + 1e-9);
}
