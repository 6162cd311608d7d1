#include "lab/symfunc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>

namespace lab {

long long part(const Partition& p, size_t i) {
  return (i >= 1 && i <= p.size()) ? p[i - 1] : 0;
}

long long part_weight(const Partition& p) {
  long long w = 0;
  for (long long v : p) w += v;
  return w;
}

Partition conjugate(const Partition& p) {
  Partition c;
  if (p.empty()) return c;
  c.resize(p[0]);
  for (long long i = 0; i < p[0]; ++i)
    c[i] = std::count_if(p.begin(), p.end(),
                         [&](long long v) { return v >= i + 1; });
  return c;
}

bool conjugate_even(const Partition& p) {
  // every column height even <=> parts pair up: p_1=p_2, p_3=p_4, ...
  if (p.size() % 2) return false;
  for (size_t i = 0; i + 1 < p.size(); i += 2)
    if (p[i] != p[i + 1]) return false;
  return true;
}

bool interlaces(const Partition& eta, const Partition& mu) {
  size_t n = std::max(eta.size(), mu.size());
  for (size_t i = 1; i <= n; ++i) {
    if (part(mu, i) < part(eta, i)) return false;
    if (part(eta, i) < part(mu, i + 1)) return false;
  }
  return true;
}

bool contained_in(const Partition& rho, const Partition& lam) {
  for (size_t i = 1; i <= rho.size(); ++i)
    if (rho[i - 1] > part(lam, i)) return false;
  return true;
}

bool EnumerationBox::holds(const Partition& p) const {
  return part(p, 1) <= max_first_part && (long long)p.size() <= max_length;
}

namespace {

double ipow(double x, long long e) {
  double r = 1.0, b = x;
  for (; e > 0; e >>= 1, b *= b)
    if (e & 1) r *= b;
  return r;
}

void partition_rec(Partition& cur, long long ub, long long remaining,
                   const std::function<void(const Partition&)>& f) {
  f(cur);
  if (remaining == 0) return;
  for (long long v = 1; v <= ub; ++v) {
    cur.push_back(v);
    partition_rec(cur, v, remaining - 1, f);
    cur.pop_back();
  }
}

// rho inside lam with at most `depth` boxes in every column of lam/rho,
// i.e. rho_i >= lam_{i+depth}; exactly the support of s_{lam/rho} in
// `depth` variables
void bounded_skew_rec(const Partition& lam, size_t i, long long ub,
                      size_t depth, Partition& cur,
                      const std::function<void(const Partition&)>& f) {
  if (i == lam.size()) {
    Partition trimmed = cur;
    while (!trimmed.empty() && trimmed.back() == 0) trimmed.pop_back();
    f(trimmed);
    return;
  }
  long long lo = (i + depth < lam.size()) ? lam[i + depth] : 0;
  long long hi = std::min(ub, lam[i]);
  for (long long v = lo; v <= hi; ++v) {
    cur.push_back(v);
    bounded_skew_rec(lam, i + 1, v, depth, cur, f);
    cur.pop_back();
  }
}

void for_each_bounded_skew(const Partition& lam, size_t depth,
                           const std::function<void(const Partition&)>& f) {
  if (lam.empty()) {
    f(lam);
    return;
  }
  Partition cur;
  bounded_skew_rec(lam, 0, lam[0], depth, cur, f);
}

}  // namespace

void for_each_partition(const EnumerationBox& box,
                        const std::function<void(const Partition&)>& f) {
  Partition cur;
  partition_rec(cur, box.max_first_part, box.max_length, f);
}

std::vector<Partition> gen_partitions(const EnumerationBox& box) {
  std::vector<Partition> out;
  for_each_partition(box, [&](const Partition& p) { out.push_back(p); });
  return out;
}

void for_each_subpartition(const Partition& lam,
                           const std::function<void(const Partition&)>& f) {
  for_each_bounded_skew(lam, lam.size(), f);
}

void for_each_interlacing(const Partition& mu,
                          const std::function<void(const Partition&)>& f) {
  for_each_bounded_skew(mu, 1, f);
}

double skew_schur(const Partition& lam, const Partition& rho,
                  const std::vector<double>& x) {
  if (!contained_in(rho, lam)) return 0.0;
  size_t N = lam.size();
  if (N == 0) return 1.0;
  long long hmax = part(lam, 1) + (long long)N;
  std::vector<double> h(hmax + 1, 0.0);
  h[0] = 1.0;
  for (double xv : x)
    for (long long k = 1; k <= hmax; ++k) h[k] += xv * h[k - 1];
  Eigen::MatrixXd m(N, N);
  for (size_t i = 1; i <= N; ++i)
    for (size_t j = 1; j <= N; ++j) {
      long long deg =
          part(lam, i) - part(rho, j) - (long long)i + (long long)j;
      m(i - 1, j - 1) = (deg < 0) ? 0.0 : h[deg];
    }
  return m.determinant();
}

double b_mu(const Partition& mu, double q) {
  double r = 1.0;
  for (size_t i = 1; i <= mu.size(); ++i)
    r /= q_pochhammer(q, q, part(mu, i) - part(mu, i + 1));
  return r;
}

double b_el(const Partition& mu, double q) {
  double r = 1.0;
  for (size_t i = 2; i <= mu.size() + 1; i += 2) {
    if (part(mu, i - 1) != part(mu, i)) return 0.0;
    r /= q_pochhammer(q, q, part(mu, i) - part(mu, i + 1));
  }
  return r;
}

double qwhittaker_branch_single(const Partition& mu, const Partition& eta,
                                double z, double q) {
  if (!interlaces(eta, mu)) return 0.0;
  double r = 1.0;
  for (size_t i = 1; i <= mu.size(); ++i) {
    long long a = part(mu, i) - part(eta, i);
    r *= ipow(z, a) * q_binomial(part(mu, i) - part(mu, i + 1), a, q);
  }
  return r;
}

double qwhittaker(const Partition& mu_in, const std::vector<double>& x,
                  double q, bool dual) {
  Partition mu = mu_in;
  while (!mu.empty() && mu.back() == 0) mu.pop_back();
  if (mu.size() > x.size()) return 0.0;
  if (mu.empty()) return 1.0;
  std::map<Partition, double> val;
  val[Partition{}] = 1.0;
  std::vector<Partition> shapes;
  for_each_subpartition(mu, [&](const Partition& p) { shapes.push_back(p); });
  for (double xv : x) {
    std::map<Partition, double> next;
    for (const Partition& sh : shapes) {
      double acc = 0.0;
      for_each_interlacing(sh, [&](const Partition& eta) {
        auto it = val.find(eta);
        if (it != val.end() && it->second != 0.0)
          acc += it->second * qwhittaker_branch_single(sh, eta, xv, q);
      });
      if (acc != 0.0) next[sh] = acc;
    }
    val = std::move(next);
  }
  auto it = val.find(mu);
  double r = (it == val.end()) ? 0.0 : it->second;
  return dual ? r * b_mu(mu, q) : r;
}

double skew_qwhittaker_Q_single(const Partition& mu, const Partition& eta,
                                double z, double q) {
  if (!interlaces(eta, mu)) return 0.0;
  return b_mu(mu, q) / b_mu(eta, q) * qwhittaker_branch_single(mu, eta, z, q);
}

double e_mu(const Partition& mu, double gamma, double q,
            const EnumerationBox& box) {
  if (!box.holds(mu)) throw Error("e_mu: partition exceeds enumeration box");
  double acc = 0.0;
  for_each_interlacing(mu, [&](const Partition& eta) {
    double bel = b_el(eta, q);
    if (bel != 0.0) acc += bel * skew_qwhittaker_Q_single(mu, eta, gamma, q);
  });
  return acc;
}

double normalization_Pi(const std::vector<double>& a,
                        const std::vector<double>& b, double q) {
  double r = 1.0;
  for (double ai : a)
    for (double bj : b) {
      if (ai * bj >= 1.0) throw Error("normalization_Pi: a_i b_j >= 1");
      r /= q_pochhammer_inf(ai * bj, q);
    }
  return r;
}

double normalization_PiTilde(const std::vector<double>& a, double q) {
  double r = 1.0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = i + 1; j < a.size(); ++j) {
      if (a[i] * a[j] >= 1.0)
        throw Error("normalization_PiTilde: a_i a_j >= 1");
      r /= q_pochhammer_inf(a[i] * a[j], q);
    }
  return r;
}

namespace {

double ps_unnormalized(const Partition& lam, const MeasureParams& mp) {
  if (mp.a.size() == 1 && mp.b.size() == 1) {
    // strips decouple: rho_i ranges over [lam_{i+1}, lam_i] independently,
    // each row contributing sum_r q^r (ab)^{lam_i - r}
    double ab = mp.a[0] * mp.b[0];
    double acc = 1.0;
    for (size_t i = 1; i <= lam.size(); ++i) {
      double row = 0.0;
      for (long long r = part(lam, i + 1); r <= part(lam, i); ++r)
        row += ipow(mp.q, r) * ipow(ab, part(lam, i) - r);
      acc *= row;
    }
    return acc;
  }
  size_t depth = std::min(mp.a.size(), mp.b.size());
  double acc = 0.0;
  for_each_bounded_skew(lam, depth, [&](const Partition& rho) {
    double term = skew_schur(lam, rho, mp.a) * skew_schur(lam, rho, mp.b);
    if (term != 0.0) acc += ipow(mp.q, part_weight(rho)) * term;
  });
  return acc;
}

double fbs_unnormalized(const Partition& lam, const MeasureParams& mp) {
  if (!conjugate_even(lam)) return 0.0;
  if (mp.a.size() == 1) {
    // an even/even column-parity skew shape that is also a horizontal strip
    // is empty, so rho = lam is the only term
    return ipow(mp.q, part_weight(lam) / 2);
  }
  size_t depth = mp.a.size();
  double acc = 0.0;
  for_each_bounded_skew(lam, depth, [&](const Partition& rho) {
    if (!conjugate_even(rho)) return;
    double term = skew_schur(lam, rho, mp.a);
    if (term != 0.0) acc += ipow(mp.q, part_weight(rho) / 2) * term;
  });
  return acc;
}

double unnormalized_weight(MeasureKind kind, const Partition& p,
                           const MeasureParams& mp,
                           const EnumerationBox& box) {
  switch (kind) {
    case MeasureKind::qW:
      return b_mu(p, mp.q) * qwhittaker(p, mp.a, mp.q) *
             qwhittaker(p, mp.b, mp.q);
    case MeasureKind::hsqW: {
      double pa = qwhittaker(p, mp.a, mp.q);
      return pa == 0.0 ? 0.0 : e_mu(p, mp.gamma, mp.q, box) * pa;
    }
    case MeasureKind::periodicSchur:
      return ps_unnormalized(p, mp);
    case MeasureKind::freeBoundarySchur:
      return fbs_unnormalized(p, mp);
  }
  throw Error("unnormalized_weight: bad kind");
}

double normalization_constant(MeasureKind kind, const MeasureParams& mp) {
  switch (kind) {
    case MeasureKind::qW:
      return normalization_Pi(mp.a, mp.b, mp.q);
    case MeasureKind::hsqW:
      return normalization_PiTilde(mp.a, mp.q) *
             (mp.gamma == 0.0
                  ? 1.0
                  : normalization_Pi(mp.a, {mp.gamma}, mp.q));
    case MeasureKind::periodicSchur:
      return normalization_Pi(mp.a, mp.b, mp.q) /
             q_pochhammer_inf(mp.q, mp.q);
    case MeasureKind::freeBoundarySchur:
      return normalization_PiTilde(mp.a, mp.q) /
             q_pochhammer_inf(mp.q, mp.q);
  }
  throw Error("normalization_constant: bad kind");
}

// partitions with weight identically zero are skipped by shrinking the box
EnumerationBox effective_box(MeasureKind kind, const MeasureParams& mp,
                             const EnumerationBox& box) {
  EnumerationBox eff = box;
  if (kind == MeasureKind::qW)
    eff.max_length = std::min<long long>(
        eff.max_length, std::min(mp.a.size(), mp.b.size()));
  else if (kind == MeasureKind::hsqW)
    eff.max_length = std::min<long long>(eff.max_length, mp.a.size());
  return eff;
}

}  // namespace

double measure_weight(MeasureKind kind, const Partition& p,
                      const MeasureParams& mp, const EnumerationBox& box) {
  return unnormalized_weight(kind, p, mp, box) /
         normalization_constant(kind, mp);
}

double measure_total(MeasureKind kind, const MeasureParams& mp,
                     const EnumerationBox& box) {
  double acc = 0.0;
  for_each_partition(effective_box(kind, mp, box), [&](const Partition& p) {
    acc += unnormalized_weight(kind, p, mp, box);
  });
  return acc / normalization_constant(kind, mp);
}

std::vector<double> first_row_masses(MeasureKind kind, const MeasureParams& mp,
                                     const EnumerationBox& box) {
  std::vector<double> mass(box.max_first_part + 1, 0.0);
  for_each_partition(effective_box(kind, mp, box), [&](const Partition& p) {
    double w = unnormalized_weight(kind, p, mp, box);
    if (w != 0.0) mass[part(p, 1)] += w;
  });
  double norm = normalization_constant(kind, mp);
  for (double& m : mass) m /= norm;
  return mass;
}

IdentityCheck verify_refined_identity(bool littlewood, long long k,
                                      const std::vector<double>& a,
                                      const std::vector<double>& b, double q,
                                      const EnumerationBox& box) {
  return verify_refined_identities(littlewood, k, a, b, q, box).back();
}

std::vector<IdentityCheck> verify_refined_identities(
    bool littlewood, long long kmax, const std::vector<double>& a,
    const std::vector<double>& b, double q, const EnumerationBox& box) {
  double qq_inf = q_pochhammer_inf(q, q);

  EnumerationBox mu_box = box;
  mu_box.max_length = std::min<long long>(
      mu_box.max_length,
      littlewood ? a.size() : std::min(a.size(), b.size()));
  double mu_enum_total = 0.0;
  std::vector<double> mu_by_first(box.max_first_part + 1, 0.0);
  for_each_partition(mu_box, [&](const Partition& mu) {
    double w = littlewood ? b_el(mu, q) * qwhittaker(mu, a, q)
                          : qwhittaker(mu, a, q) * qwhittaker(mu, b, q, true);
    if (w == 0.0) return;
    mu_enum_total += w;
    mu_by_first[part(mu, 1)] += w;
  });

  MeasureParams mp;
  mp.a = a;
  mp.b = b;
  mp.q = q;
  double lam_enum_total = 0.0;
  std::vector<double> lam_by_first(box.max_first_part + 1, 0.0);
  for_each_partition(box, [&](const Partition& lam) {
    double w =
        littlewood ? fbs_unnormalized(lam, mp) : ps_unnormalized(lam, mp);
    if (w == 0.0) return;
    lam_enum_total += w;
    lam_by_first[part(lam, 1)] += w;
  });

  double analytic_total =
      littlewood ? normalization_PiTilde(a, q) : normalization_Pi(a, b, q);
  double lhs_gap = std::max(0.0, analytic_total - mu_enum_total);
  double rhs_gap =
      std::max(0.0, analytic_total / qq_inf - lam_enum_total);

  std::vector<IdentityCheck> out(kmax + 1);
  for (long long k = 0; k <= kmax; ++k) {
    IdentityCheck& c = out[k];
    for (long long l = 0; l <= k; ++l)
      if (k - l <= box.max_first_part)
        c.lhs += ipow(q, l) / q_pochhammer(q, q, l) * mu_by_first[k - l];
    c.rhs = (k <= box.max_first_part) ? lam_by_first[k] : 0.0;
    c.tail_bound = lhs_gap / qq_inf + rhs_gap;
  }
  return out;
}

double enumerated_cdf(Observable obs, long long s, const MeasureParams& mp,
                      const EnumerationBox& box) {
  if (s < 0) return 0.0;
  MeasureKind kind;
  switch (obs) {
    case Observable::mu1_qW: kind = MeasureKind::qW; break;
    case Observable::mu1_hsqW: kind = MeasureKind::hsqW; break;
    case Observable::lambda1_pS: kind = MeasureKind::periodicSchur; break;
    case Observable::lambda1_fbS: kind = MeasureKind::freeBoundarySchur; break;
    default: throw Error("enumerated_cdf: bad observable");
  }
  std::vector<double> mass = first_row_masses(kind, mp, box);
  double acc = 0.0;
  for (long long m = 0; m <= s && m < (long long)mass.size(); ++m)
    acc += mass[m];
  return acc;
}

}  // namespace lab
