#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "lab/specfun.hpp"

namespace lab {

// ---------------------------------------------------------------------------
// contour quadrature

struct ContourSpec {
  enum class Kind { vertical, circle, wedge };
  Kind kind = Kind::circle;
  double anchor = 0.0;  // vertical: Re z; wedge: apex on the real axis
  double cut = 0.0;     // vertical: |Im z| <= cut; wedge: arm length
  double radius = 1.0;  // circle
  double angle = 0.0;   // wedge: arms at apex + t e^{+-i angle}
  int points = 256;

  static ContourSpec Vertical(double re, double cut, int points);
  static ContourSpec Circle(double r, int points);
  static ContourSpec Wedge(double apex, double angle, double cut, int points);
  ContourSpec doubled() const;
};

// nodes z and weights w with dz/(2 pi i) folded in, so that
// integral f = sum_j w_j f(z_j)
struct ContourQuad {
  std::vector<cd> z, w;
  int size() const { return int(z.size()); }
};

ContourQuad contour_nodes(const ContourSpec& spec);

// product quadrature over one or more contours; each contour is doubled (up
// to three times) until two successive evaluations agree to 1e-12 relative
cd contour_integrate(const std::function<cd(const std::vector<cd>&)>& f,
                     const std::vector<ContourSpec>& contours);

// ---------------------------------------------------------------------------
// observable-side weight function F(z) entering the lattice kernels

struct FSpec {
  enum class Family { one, qpush, asep };
  Family family = Family::one;
  std::vector<double> a, b;  // qpush: N row rates a, T column rates b
  long long x = 0;           // asep: observation site
  double tau = 0.0;          // asep: time

  static FSpec One();
  static FSpec QPush(std::vector<double> a, std::vector<double> b);
  static FSpec Asep(long long x, double tau);
};

// ---------------------------------------------------------------------------
// kernel handles; `at` returns raw kernel values (no quadrature weights)

struct KernelEval {
  std::function<double(double, double)> at;
  std::function<Eigen::MatrixXd(const std::vector<double>&,
                                const std::vector<double>&)>
      fill_fn;
  double diag_decay = 0.0;  // K(x,x) ~ C exp(-diag_decay * x)
  double subexp_amp = 0.0;  // nonzero: K(x,x) ~ C exp(-2 sqrt(amp * x))
  Eigen::MatrixXd fill(const std::vector<double>& xs,
                       const std::vector<double>& ys) const;
};

// 2x2 matrix kernel; at(i,j,x,y) is block (i,j); fill interleaves so rows
// 2i, 2i+1 belong to point i, matching fredholm_pf
struct KernelEval2 {
  std::function<double(int, int, double, double)> at;
  std::function<Eigen::MatrixXd(const std::vector<double>&)> fill_fn;
  double diag_decay = 0.0;  // rate of the (1,1)-block diagonal
  Eigen::MatrixXd fill(const std::vector<double>& xs) const;
};

// analytic-continuation data: the continued kernel is
// L + sign * [[T, -dT/dy], [-dT/dx, d2T/dxdy]],  T(x,y) = A(x)B(y) - A(y)B(x),
// which corrected_pf resolves against the base L
struct CorrectionFns {
  bool active = false;
  double sign = 1.0;
  std::function<double(double)> A, Ap, B, Bp;
};

// ---------------------------------------------------------------------------
// lattice kernels (discrete determinantal / pfaffian formulas)

// two-sided contour kernel for the shifted first-row law; sites are
// half-integers. r/rp default to family-tuned circles when zero.
KernelEval make_periodic_schur_K(const FSpec& F, double zeta, double q,
                                 double r = 0.0, double rp = 0.0);

// bilateral rewrite: det over all half-integers of f * M
struct FermiM {
  KernelEval M;
  std::function<double(double)> f;  // Fermi weight 1/(1 + zeta^-1 q^-s-m)
};
FermiM make_M_fermi(const FSpec& F, double zeta, double s, double q,
                    double r = 0.0, double rp = 0.0);

// free-boundary matrix kernel; the boundary rate enters as one more entry
// of `a`; sites are half-integers
KernelEval2 make_fbs_L(const std::vector<double>& a, double zeta, double q,
                       double r = 0.0);

// bilateral half-space rewrite: Pf over all half-integers of J - f * M
struct GosperM {
  KernelEval2 M;
  std::function<double(double)> f;  // 1/(1 + zeta^-2 q^-s-m)
};
GosperM make_Mhs_gosper(const std::vector<double>& a, double zeta, double s,
                        double q, double r = 0.0);

// ---------------------------------------------------------------------------
// continuum kernels (log-gamma polymer)

// full-space kernel on L^2(sigma, inf); contours at Re Z = -d, Re W = dp + k
// with the integer shift k chosen from N = |A| so the tails close; crossing
// residues are restored internally
KernelEval make_LG_full_K(const std::vector<double>& A,
                          const std::vector<double>& B, double d = 0.0,
                          double dp = 0.0);

struct LGHalf {
  KernelEval2 L;       // literal kernel at the working contour
  CorrectionFns corr;  // active when the contour sits past crossed poles
  double d = 0.0;
};
LGHalf make_LG_half_L(const std::vector<double>& A, double Upsilon,
                      double d = 0.0);

// ---------------------------------------------------------------------------
// intermediate-disorder kernels

struct MSHEKernels {
  KernelEval K_full;
  KernelEval2 L_hs;  // only when omega was supplied
  CorrectionFns corr;
  bool has_hs = false;
  double s_hint = 0.0;
};
MSHEKernels make_mSHE_kernels(double t, double s,
                              std::optional<double> omega = std::nullopt);

// Fermi-weighted Airy product rewrite of the full-space kernel at t = 2
double mshe_fermi_airy(double x, double y);

// sharp-weight rewrite of the half-space law: Pf[J - Fs * M] over the whole
// line, and the scalar kernel Ds with sqrt-det route
struct KLDParts {
  KernelEval2 M;
  std::function<double(double)> Fs;
  KernelEval Ds;
};
KLDParts make_KLD(double t, double omega, double s);

// ---------------------------------------------------------------------------
// limit kernels

enum class LimitFamily { airy, cross, gse, goe };

struct LimitKernel {
  bool is_matrix = false;
  KernelEval scalar;  // airy
  KernelEval2 mat;    // cross / gse / goe
};
LimitKernel make_limit_kernels(LimitFamily fam, double xi = 0.0,
                               double delta = 0.0);

// half-space boundary function, both routes
double pB_contour(double u);
double pB_airy(double u);

// ---------------------------------------------------------------------------
// zero-q free-boundary kernel at finite N with geometric weight `a` and
// boundary rate `gamma`; corrections activate when the contour passes 1/gamma
struct PfsQ0 {
  KernelEval2 L;
  CorrectionFns corr;
  double r = 0.0;
};
PfsQ0 make_pfaffian_schur_q0(int N, double a, double gamma, double r = 0.0);

}  // namespace lab
