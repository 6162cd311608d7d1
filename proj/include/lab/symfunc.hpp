#pragma once

#include <functional>
#include <vector>

#include "lab/specfun.hpp"

namespace lab {

// weakly decreasing, positive parts only; () is the empty partition
using Partition = std::vector<long long>;

long long part(const Partition& p, size_t i);  // 1-based, 0 past the end
long long part_weight(const Partition& p);
Partition conjugate(const Partition& p);
bool conjugate_even(const Partition& p);  // every column height even
bool interlaces(const Partition& eta, const Partition& mu);   // eta < mu
bool contained_in(const Partition& rho, const Partition& lam);

struct EnumerationBox {
  long long max_first_part = 0;
  long long max_length = 0;
  bool holds(const Partition& p) const;
};

void for_each_partition(const EnumerationBox& box,
                        const std::function<void(const Partition&)>& f);
std::vector<Partition> gen_partitions(const EnumerationBox& box);
void for_each_subpartition(const Partition& lam,
                           const std::function<void(const Partition&)>& f);
void for_each_interlacing(const Partition& mu,
                          const std::function<void(const Partition&)>& f);

double skew_schur(const Partition& lam, const Partition& rho,
                  const std::vector<double>& x);

double b_mu(const Partition& mu, double q);
double b_el(const Partition& mu, double q);
// P_{mu/eta}(z;q), single variable branching weight
double qwhittaker_branch_single(const Partition& mu, const Partition& eta,
                                double z, double q);
double qwhittaker(const Partition& mu, const std::vector<double>& x, double q,
                  bool dual = false);
double skew_qwhittaker_Q_single(const Partition& mu, const Partition& eta,
                                double z, double q);
double e_mu(const Partition& mu, double gamma, double q,
            const EnumerationBox& box);

double normalization_Pi(const std::vector<double>& a,
                        const std::vector<double>& b, double q);
double normalization_PiTilde(const std::vector<double>& a, double q);

enum class MeasureKind { qW, hsqW, periodicSchur, freeBoundarySchur };

struct MeasureParams {
  std::vector<double> a;
  std::vector<double> b;  // qW / periodicSchur only
  double gamma = 0.0;     // hsqW only
  double q = 0.0;
};

double measure_weight(MeasureKind kind, const Partition& p,
                      const MeasureParams& mp, const EnumerationBox& box);
double measure_total(MeasureKind kind, const MeasureParams& mp,
                     const EnumerationBox& box);
// normalized mass of {first row = m} for m = 0..box.max_first_part
std::vector<double> first_row_masses(MeasureKind kind, const MeasureParams& mp,
                                     const EnumerationBox& box);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double tail_bound = 0.0;
};
// kind false: refined Cauchy, true: refined Littlewood (b ignored)
IdentityCheck verify_refined_identity(bool littlewood, long long k,
                                      const std::vector<double>& a,
                                      const std::vector<double>& b, double q,
                                      const EnumerationBox& box);
// all k = 0..kmax in one enumeration sweep
std::vector<IdentityCheck> verify_refined_identities(
    bool littlewood, long long kmax, const std::vector<double>& a,
    const std::vector<double>& b, double q, const EnumerationBox& box);

enum class Observable { mu1_qW, mu1_hsqW, lambda1_pS, lambda1_fbS };
double enumerated_cdf(Observable obs, long long s, const MeasureParams& mp,
                      const EnumerationBox& box);

}  // namespace lab
