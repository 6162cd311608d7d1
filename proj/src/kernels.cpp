#include "lab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "lab/fredholm.hpp"

namespace lab {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cd kI(0.0, 1.0);

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

// z^e through exp(e log z); exact on any branch when e is an integer, which
// the half-integer site lattices guarantee
cd ipow(cd z, double e) {
  if (std::abs(e - std::round(e)) > 1e-6)
    throw Error("kernels: site off the half-integer lattice");
  return std::exp(e * std::log(z));
}

double nearest_int_dist(double x) { return std::abs(x - std::round(x)); }

// ---------------------------------------------------------------------------
// node sets with dz/(2 pi i) folded into the weights

struct CQuad {
  std::vector<cd> z, w;
  int size() const { return int(z.size()); }
};

CQuad circle_quad(double r, int n) {
  CQuad q;
  q.z.resize(n);
  q.w.resize(n);
  for (int j = 0; j < n; ++j) {
    double th = 2.0 * kPi * j / n;
    q.z[j] = r * std::exp(kI * th);
    q.w[j] = q.z[j] / double(n);
  }
  return q;
}

CQuad circle_at(cd center, double rho, int n) {
  CQuad q;
  q.z.resize(n);
  q.w.resize(n);
  for (int j = 0; j < n; ++j) {
    double th = 2.0 * kPi * j / n;
    cd dz = rho * std::exp(kI * th);
    q.z[j] = center + dz;
    q.w[j] = dz / double(n);
  }
  return q;
}

// vertical line re + i u, |u| <= T, roughly per_unit nodes per unit length
CQuad gl_line(double re, double T, int per_unit) {
  int npan = std::max(2, int(std::ceil(2.0 * T)));
  std::vector<double> bounds(npan + 1);
  for (int i = 0; i <= npan; ++i) bounds[i] = -T + 2.0 * T * i / npan;
  Quad g = gl_composite(bounds, per_unit);
  CQuad q;
  q.z.resize(g.size());
  q.w.resize(g.size());
  for (int i = 0; i < g.size(); ++i) {
    q.z[i] = cd(re, g.x[i]);
    q.w[i] = cd(g.w[i] / (2.0 * kPi), 0.0);
  }
  return q;
}

// two rays apex + t e^{+-i angle}, oriented upward through the apex
CQuad wedge_quad(double apex, double angle, double R, int per_panel) {
  std::vector<double> bounds{0.0, 0.5, 1.0};
  while (bounds.back() < R) bounds.push_back(std::min(R, 2.0 * bounds.back()));
  Quad g = gl_composite(bounds, per_panel);
  cd up = std::exp(kI * angle), dn = std::exp(-kI * angle);
  CQuad q;
  for (int i = 0; i < g.size(); ++i) {
    q.z.push_back(apex + g.x[i] * up);
    q.w.push_back(g.w[i] * up / (2.0 * kPi * kI));
    q.z.push_back(apex + g.x[i] * dn);
    q.w.push_back(-g.w[i] * dn / (2.0 * kPi * kI));
  }
  return q;
}

// ---------------------------------------------------------------------------
// rank-structured kernel: entry = Re[ u(x)^T C v(y) ], weights live in C

struct Sandwich {
  MatC C;
  std::function<VecC(double)> u, v;

  double at(double x, double y) const {
    VecC a = u(x), t = C * v(y);
    cd s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * t[i];
    return s.real();
  }
  Eigen::MatrixXd fill(const std::vector<double>& xs,
                       const std::vector<double>& ys) const {
    MatC U(C.rows(), xs.size()), V(C.cols(), ys.size());
    for (size_t i = 0; i < xs.size(); ++i) U.col(i) = u(xs[i]);
    for (size_t j = 0; j < ys.size(); ++j) V.col(j) = v(ys[j]);
    return (U.transpose() * (C * V)).real();
  }
};

// 2x2 block version; up/vp carry the derivative insertions
struct Sandwich2 {
  MatC C;
  std::function<VecC(double)> u, up, v, vp;

  double at(int i, int j, double x, double y) const {
    VecC a = i ? up(x) : u(x);
    VecC t = C * (j ? vp(y) : v(y));
    cd s = 0.0;
    for (int k = 0; k < a.size(); ++k) s += a[k] * t[k];
    return s.real();
  }
  Eigen::MatrixXd fill(const std::vector<double>& xs) const {
    int n = int(xs.size());
    MatC U(C.rows(), n), Up(C.rows(), n), V(C.cols(), n), Vp(C.cols(), n);
    for (int i = 0; i < n; ++i) {
      U.col(i) = u(xs[i]);
      Up.col(i) = up(xs[i]);
      V.col(i) = v(xs[i]);
      Vp.col(i) = vp(xs[i]);
    }
    MatC T0 = C * V, T1 = C * Vp;
    Eigen::MatrixXd P00 = (U.transpose() * T0).real();
    Eigen::MatrixXd P01 = (U.transpose() * T1).real();
    Eigen::MatrixXd P10 = (Up.transpose() * T0).real();
    Eigen::MatrixXd P11 = (Up.transpose() * T1).real();
    Eigen::MatrixXd B(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        B(2 * i, 2 * j) = P00(i, j);
        B(2 * i, 2 * j + 1) = P01(i, j);
        B(2 * i + 1, 2 * j) = P10(i, j);
        B(2 * i + 1, 2 * j + 1) = P11(i, j);
      }
    return B;
  }
};

KernelEval wrap_scalar(std::shared_ptr<Sandwich> S, double decay,
                       double subexp = 0.0) {
  KernelEval K;
  K.at = [S](double x, double y) { return S->at(x, y); };
  K.fill_fn = [S](const std::vector<double>& xs, const std::vector<double>& ys) {
    return S->fill(xs, ys);
  };
  K.diag_decay = decay;
  K.subexp_amp = subexp;
  return K;
}

KernelEval2 wrap_mat(std::shared_ptr<Sandwich2> S, double decay) {
  KernelEval2 K;
  K.at = [S](int i, int j, double x, double y) { return S->at(i, j, x, y); };
  K.fill_fn = [S](const std::vector<double>& xs) { return S->fill(xs); };
  K.diag_decay = decay;
  return K;
}

// sum of exponentials, Re sum w_i e^{z_i d}; holds closed residue clusters
struct ExpSum {
  std::vector<cd> z, w;
  double at(double d) const {
    cd s = 0.0;
    for (size_t i = 0; i < z.size(); ++i) s += w[i] * std::exp(z[i] * d);
    return s.real();
  }
};

// merge coincident pole positions, one circle per cluster, radius kept clear
// of the neighbours; weights = outer * circle weight * f(z)
ExpSum closure_sum(std::vector<double> poles, double outer,
                   const std::function<cd(cd)>& f) {
  ExpSum out;
  if (poles.empty()) return out;
  std::sort(poles.begin(), poles.end());
  std::vector<double> centers;
  for (double p : poles)
    if (centers.empty() || p - centers.back() > 1e-8) centers.push_back(p);
  for (size_t c = 0; c < centers.size(); ++c) {
    double gap = 1e9;
    if (c > 0) gap = std::min(gap, centers[c] - centers[c - 1]);
    if (c + 1 < centers.size()) gap = std::min(gap, centers[c + 1] - centers[c]);
    double rho = std::min(0.1, 0.4 * gap);
    if (rho < 1e-3) throw Error("kernels: residue circle pinched");
    CQuad q = circle_at(cd(centers[c], 0.0), rho, 64);
    for (int j = 0; j < q.size(); ++j) {
      out.z.push_back(q.z[j]);
      out.w.push_back(outer * q.w[j] * f(q.z[j]));
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// public contour helpers

ContourSpec ContourSpec::Vertical(double re, double cut, int points) {
  ContourSpec s;
  s.kind = Kind::vertical;
  s.anchor = re;
  s.cut = cut;
  s.points = points;
  return s;
}
ContourSpec ContourSpec::Circle(double r, int points) {
  ContourSpec s;
  s.kind = Kind::circle;
  s.radius = r;
  s.points = points;
  return s;
}
ContourSpec ContourSpec::Wedge(double apex, double angle, double cut,
                               int points) {
  ContourSpec s;
  s.kind = Kind::wedge;
  s.anchor = apex;
  s.angle = angle;
  s.cut = cut;
  s.points = points;
  return s;
}
ContourSpec ContourSpec::doubled() const {
  ContourSpec s = *this;
  s.points *= 2;
  return s;
}

ContourQuad contour_nodes(const ContourSpec& spec) {
  CQuad q;
  switch (spec.kind) {
    case ContourSpec::Kind::circle:
      q = circle_quad(spec.radius, spec.points);
      break;
    case ContourSpec::Kind::vertical: {
      int per_unit = std::max(4, int(std::ceil(spec.points / (2.0 * spec.cut))));
      q = gl_line(spec.anchor, spec.cut, per_unit);
      break;
    }
    case ContourSpec::Kind::wedge: {
      int pp = std::max(6, spec.points / 12);
      q = wedge_quad(spec.anchor, spec.angle, spec.cut, pp);
      break;
    }
  }
  ContourQuad out;
  out.z = q.z;
  out.w = q.w;
  return out;
}

cd contour_integrate(const std::function<cd(const std::vector<cd>&)>& f,
                     const std::vector<ContourSpec>& contours) {
  if (contours.empty()) throw Error("contour_integrate: no contours");
  auto eval = [&](const std::vector<ContourSpec>& specs) {
    std::vector<ContourQuad> qs;
    for (const auto& s : specs) qs.push_back(contour_nodes(s));
    size_t dim = qs.size();
    std::vector<cd> args(dim);
    cd total = 0.0;
    std::function<void(size_t, cd)> rec = [&](size_t level, cd wprod) {
      if (level == dim) {
        total += wprod * f(args);
        return;
      }
      for (int i = 0; i < qs[level].size(); ++i) {
        args[level] = qs[level].z[i];
        rec(level + 1, wprod * qs[level].w[i]);
      }
    };
    rec(0, cd(1.0, 0.0));
    return total;
  };
  std::vector<ContourSpec> cur = contours;
  cd prev = eval(cur);
  for (int round = 0; round < 3; ++round) {
    for (auto& s : cur) s = s.doubled();
    cd next = eval(cur);
    if (std::abs(next - prev) <= 1e-12 * std::max(1.0, std::abs(next)))
      return next;
    prev = next;
  }
  throw Error("contour_integrate: quadrature did not settle");
}

// ---------------------------------------------------------------------------
// F-family weights

FSpec FSpec::One() { return FSpec{}; }
FSpec FSpec::QPush(std::vector<double> a, std::vector<double> b) {
  FSpec f;
  f.family = Family::qpush;
  f.a = std::move(a);
  f.b = std::move(b);
  return f;
}
FSpec FSpec::Asep(long long x, double tau) {
  FSpec f;
  f.family = Family::asep;
  f.x = x;
  f.tau = tau;
  return f;
}

namespace {

cd family_F(const FSpec& F, cd z, double q) {
  switch (F.family) {
    case FSpec::Family::one:
      return cd(1.0, 0.0);
    case FSpec::Family::qpush: {
      cd lg = 0.0;
      for (double b : F.b) lg += log_q_pochhammer_inf(b / z, q);
      for (double a : F.a) lg -= log_q_pochhammer_inf(a * z, q);
      return std::exp(lg);
    }
    case FSpec::Family::asep:
      return std::exp(-(1.0 - q) * z * F.tau / (1.0 + z)) *
             ipow(1.0 + 1.0 / z, double(F.x));
  }
  throw Error("kernels: unknown family");
}

struct TwoCircles {
  double r, rp;
  int n;
};

// outer z radius r, inner w radius rp, annulus ratio inside (1, 1/q)
TwoCircles ps_geometry(const FSpec& F, double q, double r_in, double rp_in) {
  double amax = 0.0, bmax = 0.0;
  for (double a : F.a) amax = std::max(amax, a);
  for (double b : F.b) bmax = std::max(bmax, b);
  TwoCircles g;
  double rho = std::min(1.2544, 0.5 * (1.0 + 1.0 / q));
  if (F.family == FSpec::Family::asep) {
    g.rp = 1.10;
    g.r = 1.10 * rho;
    g.n = 512;
  } else {
    g.rp = 0.5 * (std::max(bmax, 0.8) + 1.0);
    g.r = g.rp * rho;
    if (amax > 0.0) g.r = std::min(g.r, 0.5 * (1.0 + 1.0 / amax));
    g.n = 256;
  }
  if (r_in > 0.0) g.r = r_in;
  if (rp_in > 0.0) g.rp = rp_in;
  double ratio = g.r / g.rp;
  if (!(ratio > 1.0 + 1e-9) || !(ratio < 1.0 / q - 1e-9))
    throw Error("kernels: annulus ratio outside (1, 1/q)");
  if (F.family == FSpec::Family::asep) {
    if (!(g.rp > 1.0)) throw Error("kernels: current kernel needs radii above 1");
  } else {
    if (!(g.rp > bmax) || (amax > 0.0 && !(g.r < 1.0 / amax)))
      throw Error("kernels: contour hits a rate singularity");
  }
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// two-sided lattice kernel

KernelEval make_periodic_schur_K(const FSpec& F, double zeta, double q,
                                 double r, double rp) {
  if (!(q > 0.0 && q < 1.0)) throw Error("kernels: q outside (0,1)");
  if (!(zeta > 0.0)) throw Error("kernels: zeta must be positive");
  TwoCircles g = ps_geometry(F, q, r, rp);
  int n = g.n;
  CQuad zq = circle_quad(g.r, n), wq = circle_quad(g.rp, n);

  double qq = q_pochhammer_inf(cd(q, 0.0), q).real();
  cd norm = qq * qq / theta3(cd(zeta, 0.0), q);
  std::vector<cd> coup(n);
  for (int t = 0; t < n; ++t) {
    cd ratio = (g.rp / g.r) * std::exp(kI * (2.0 * kPi * t / n));  // w/z
    cd den = q_pochhammer_inf(ratio, q) * q_pochhammer_inf(q / ratio, q);
    coup[t] = norm * theta3(zeta / ratio, q) / den;
  }
  auto S = std::make_shared<Sandwich>();
  S->C.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      S->C(j, k) = zq.w[j] * wq.w[k] * coup[(k - j + n) % n];

  std::vector<cd> Fz(n), Fw(n);
  for (int j = 0; j < n; ++j) Fz[j] = family_F(F, zq.z[j], q);
  for (int k = 0; k < n; ++k) Fw[k] = family_F(F, wq.z[k], q);
  auto znodes = zq.z, wnodes = wq.z;
  S->u = [znodes, Fz, n](double x) {
    VecC v(n);
    for (int j = 0; j < n; ++j) v[j] = Fz[j] * ipow(znodes[j], -x - 1.5);
    return v;
  };
  S->v = [wnodes, Fw, n](double y) {
    VecC v(n);
    for (int k = 0; k < n; ++k) v[k] = ipow(wnodes[k], y - 0.5) / Fw[k];
    return v;
  };

  double amax = 0.0, bmax = 0.0;
  for (double a : F.a) amax = std::max(amax, a);
  for (double b : F.b) bmax = std::max(bmax, b);
  double decay = 0.0, subexp = 0.0;
  if (F.family == FSpec::Family::asep) {
    subexp = (1.0 - q) * F.tau;
  } else {
    double ab = amax * bmax;
    decay = std::log(ab > 0.0 ? std::min(1.0 / q, 1.0 / ab) : 1.0 / q);
  }
  return wrap_scalar(S, decay, subexp);
}

FermiM make_M_fermi(const FSpec& F, double zeta, double s, double q, double r,
                    double rp) {
  if (!(q > 0.0 && q < 1.0)) throw Error("kernels: q outside (0,1)");
  if (!(zeta > 0.0)) throw Error("kernels: zeta must be positive");
  double amax = 0.0, bmax = 0.0;
  for (double a : F.a) amax = std::max(amax, a);
  for (double b : F.b) bmax = std::max(bmax, b);
  double rr, rrp;
  if (F.family == FSpec::Family::asep) {
    rrp = 1.05;
    rr = 1.18;
  } else {
    rr = 0.98;
    rrp = std::max(0.90, 0.5 * (bmax + 0.98));
  }
  if (r > 0.0) rr = r;
  if (rp > 0.0) rrp = rp;
  if (!(rr > rrp)) throw Error("kernels: need r > rp");
  if (F.family != FSpec::Family::asep) {
    if (!(rrp > bmax) || (amax > 0.0 && !(rr < 1.0 / amax)))
      throw Error("kernels: contour hits a rate singularity");
  }
  int n = 256;
  CQuad zq = circle_quad(rr, n), wq = circle_quad(rrp, n);
  auto S = std::make_shared<Sandwich>();
  S->C.resize(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      S->C(k, j) = wq.w[k] * zq.w[j] / (zq.z[j] - wq.z[k]);
  std::vector<cd> Fz(n), Fw(n);
  for (int j = 0; j < n; ++j) Fz[j] = family_F(F, zq.z[j], q);
  for (int k = 0; k < n; ++k) Fw[k] = family_F(F, wq.z[k], q);
  auto znodes = zq.z, wnodes = wq.z;
  S->u = [wnodes, Fw, n](double m) {
    VecC v(n);
    for (int k = 0; k < n; ++k) v[k] = ipow(wnodes[k], -m - 0.5) / Fw[k];
    return v;
  };
  S->v = [znodes, Fz, n](double m) {
    VecC v(n);
    for (int j = 0; j < n; ++j) v[j] = Fz[j] * ipow(znodes[j], m - 0.5);
    return v;
  };
  FermiM out;
  out.M = wrap_scalar(S, std::log(1.0 / q));
  out.f = [zeta, s, q](double m) {
    return 1.0 / (1.0 + std::pow(q, -s - m) / zeta);
  };
  return out;
}

// ---------------------------------------------------------------------------
// free-boundary lattice kernel

KernelEval2 make_fbs_L(const std::vector<double>& a, double zeta, double q,
                       double r) {
  if (!(q > 0.0 && q < 1.0)) throw Error("kernels: q outside (0,1)");
  if (!(zeta > 0.0)) throw Error("kernels: zeta must be positive");
  double amax = 0.0;
  for (double ai : a) amax = std::max(amax, ai);
  if (amax >= 1.0) throw Error("kernels: rates must lie in (0,1)");
  double mid = std::min(1.0 / std::sqrt(q), amax > 0.0 ? 1.0 / amax : 1e9);
  double rr = std::min(1.25, 1.0 + 0.5 * (mid - 1.0));
  if (r > 0.0) rr = r;
  if (!(rr > 1.0 && rr < mid))
    throw Error("kernels: radius outside (1, min(q^-1/2, 1/a))");
  int n = 256;
  CQuad zq = circle_quad(rr, n);

  double qq = q_pochhammer_inf(cd(q, 0.0), q).real();
  cd norm = qq * qq / theta3(cd(zeta * zeta, 0.0), q * q);
  std::vector<cd> t_wz(n), t_qzw(n), t_izw(n), t_qzw2(n), t_th(n), dz2(n);
  double r2 = rr * rr, r4 = r2 * r2;
  for (int t = 0; t < n; ++t) {
    cd e = std::exp(kI * (2.0 * kPi * t / n));
    t_wz[t] = q_pochhammer_inf(e, q);              // (w/z;q), index k-j
    t_qzw[t] = q_pochhammer_inf(q * e, q);         // (q z/w;q), index j-k
    t_izw[t] = q_pochhammer_inf(e / r2, q);        // (1/(zw);q), index -(j+k)
    t_qzw2[t] = q_pochhammer_inf(q * r2 * e, q);   // (q z w;q), index j+k
    t_th[t] = theta3(zeta * zeta * r4 * e, q * q); // index 2(j+k)
  }
  for (int j = 0; j < n; ++j)
    dz2[j] = q_pochhammer_inf(1.0 / (zq.z[j] * zq.z[j]), q);

  auto S = std::make_shared<Sandwich2>();
  S->C.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      int tkj = (k - j + n) % n, tjk = (j - k + n) % n;
      int tsum = (j + k) % n, tneg = (n - tsum) % n, tth = (2 * (j + k)) % n;
      S->C(j, k) = zq.w[j] * zq.w[k] * norm * t_wz[tkj] * t_qzw[tjk] *
                   t_th[tth] / (dz2[j] * dz2[k] * t_izw[tneg] * t_qzw2[tsum]);
    }

  std::vector<cd> Fz(n);
  for (int j = 0; j < n; ++j) {
    cd lg = 0.0;
    for (double ai : a)
      lg += log_q_pochhammer_inf(ai / zq.z[j], q) -
            log_q_pochhammer_inf(ai * zq.z[j], q);
    Fz[j] = std::exp(lg);
  }
  auto nodes = zq.z;
  auto base = [nodes, Fz, n](double x, double shift) {
    VecC v(n);
    for (int j = 0; j < n; ++j) v[j] = Fz[j] * ipow(nodes[j], -x - shift);
    return v;
  };
  auto grad = [nodes, n](VecC v) {
    for (int j = 0; j < n; ++j) v[j] *= 0.5 * (nodes[j] - 1.0 / nodes[j]);
    return v;
  };
  S->u = [base](double x) { return base(x, 1.5); };
  S->up = [base, grad](double x) { return grad(base(x, 1.5)); };
  S->v = [base](double y) { return base(y, 2.5); };
  S->vp = [base, grad](double y) { return grad(base(y, 2.5)); };
  return wrap_mat(S, 2.0 * std::log(mid));
}

GosperM make_Mhs_gosper(const std::vector<double>& a, double zeta, double s,
                        double q, double r) {
  if (!(q > 0.0 && q < 1.0)) throw Error("kernels: q outside (0,1)");
  if (!(zeta > 0.0)) throw Error("kernels: zeta must be positive");
  double amax = 0.0;
  for (double ai : a) amax = std::max(amax, ai);
  if (amax >= 1.0) throw Error("kernels: rates must lie in (0,1)");
  double mid = std::min(1.0 / std::sqrt(q), amax > 0.0 ? 1.0 / amax : 1e9);
  double rr = std::min(1.15, 1.0 + 0.6 * (mid - 1.0));
  if (r > 0.0) rr = r;
  if (!(rr > 1.0 && rr < mid))
    throw Error("kernels: radius outside (1, min(q^-1/2, 1/a))");
  int n = 384;
  CQuad zq = circle_quad(rr, n);

  double q2 = q * q;
  double qodd = q_pochhammer_inf(cd(q, 0.0), q2).real();
  std::vector<cd> G1(n), G2(n), Fz(n);
  for (int j = 0; j < n; ++j) {
    cd z = zq.z[j], z2 = z * z;
    G1[j] = z * q_pochhammer_inf(q2 * z2, q2) / q_pochhammer_inf(q / z2, q2);
    G2[j] = q_pochhammer_inf(q * z2, q2) /
            (qodd * qodd * q_pochhammer_inf(1.0 / z2, q2));
    cd lg = 0.0;
    for (double ai : a)
      lg += log_q_pochhammer_inf(ai / z, q) - log_q_pochhammer_inf(ai * z, q);
    Fz[j] = std::exp(lg);
  }
  auto S = std::make_shared<Sandwich2>();
  S->C.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      cd zj = zq.z[j], zk = zq.z[k];
      S->C(j, k) =
          zq.w[j] * zq.w[k] * (zj - zk) * (1.0 + zj * zk) / (2.0 * (1.0 - zj * zk));
    }
  auto nodes = zq.z;
  auto mk = [nodes, Fz, n](const std::vector<cd>& G) {
    return [nodes, Fz, G, n](double m) {
      VecC v(n);
      for (int j = 0; j < n; ++j) v[j] = Fz[j] * G[j] * ipow(nodes[j], -m - 2.5);
      return v;
    };
  };
  S->u = mk(G1);
  S->up = mk(G2);
  S->v = mk(G1);
  S->vp = mk(G2);
  GosperM out;
  out.M = wrap_mat(S, std::log(1.0 / q));
  out.f = [zeta, s, q](double m) {
    return 1.0 / (1.0 + std::pow(q, -s - m) / (zeta * zeta));
  };
  return out;
}

// ---------------------------------------------------------------------------
// zero-q free-boundary kernel

PfsQ0 make_pfaffian_schur_q0(int N, double a, double gamma, double r) {
  if (N < 1) throw Error("kernels: N must be positive");
  if (!(a > 0.0 && a < 1.0)) throw Error("kernels: rate outside (0,1)");
  if (gamma < 0.0 || gamma * a >= 1.0)
    throw Error("kernels: boundary rate outside [0, 1/a)");
  double rr;
  if (gamma <= 1.0) {
    double m = 1.0 / a;
    if (gamma > 0.0) m = std::min(m, 1.0 / gamma);
    rr = std::min(0.5 * (1.0 + m), 1.0 + 1.6 / std::cbrt(double(N)));
  } else {
    rr = std::min(0.5 * (1.0 + 1.0 / a), 1.0 + 1.6 / std::cbrt(double(N)));
    if (rr <= gamma + 1e-9) rr = 0.5 * (gamma + 1.0 / a);
  }
  if (r > 0.0) rr = r;
  if (!(rr > 1.0 && rr < 1.0 / a))
    throw Error("kernels: radius outside (1, 1/a)");
  bool active = gamma > 0.0 && rr > 1.0 / gamma;
  if (gamma > 0.0 && std::abs(rr - 1.0 / gamma) < 1e-6)
    throw Error("kernels: radius pinned on the boundary pole");
  if (active && !(rr > gamma))
    throw Error("kernels: continued branch needs r > gamma");

  int n = 256;
  CQuad zq = circle_quad(rr, n);
  std::vector<cd> gz(n);
  for (int j = 0; j < n; ++j) {
    cd z = zq.z[j];
    gz[j] = std::exp(double(N) * (std::log(1.0 - a / z) - std::log(1.0 - a * z)));
  }
  auto S = std::make_shared<Sandwich2>();
  S->C.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      cd zj = zq.z[j], zk = zq.z[k];
      S->C(j, k) = zq.w[j] * zq.w[k] * (zj - zk) /
                   ((zj * zj - 1.0) * (zk * zk - 1.0) * (zj * zk - 1.0));
    }
  auto nodes = zq.z;
  auto base = [nodes, gz, gamma, n](double x) {
    VecC v(n);
    for (int j = 0; j < n; ++j)
      v[j] = gz[j] * (nodes[j] - gamma) / (1.0 - gamma * nodes[j]) *
             ipow(nodes[j], -x - 0.5);
    return v;
  };
  auto grad = [nodes, n](VecC v) {
    for (int j = 0; j < n; ++j) v[j] *= 0.5 * (nodes[j] - 1.0 / nodes[j]);
    return v;
  };
  S->u = base;
  S->up = [base, grad](double x) { return grad(base(x)); };
  S->v = base;
  S->vp = [base, grad](double x) { return grad(base(x)); };

  PfsQ0 out;
  double decay;
  if (gamma <= 0.0)
    decay = 2.0 * std::log(1.0 / a);
  else if (gamma <= 1.0)
    decay = 2.0 * std::log(std::min(1.0 / a, 1.0 / gamma));
  else
    decay = std::log(1.0 / (a * gamma));
  out.L = wrap_mat(S, decay);
  out.r = rr;
  if (active) {
    double ginv = std::log(1.0 - a * gamma) - std::log(1.0 - a / gamma);
    double Aconst = double(N) * ginv;
    out.corr.active = true;
    out.corr.sign = -1.0;
    out.corr.A = [gamma, Aconst](double x) {
      return std::exp(x * std::log(gamma) + Aconst);
    };
    out.corr.Ap = [gamma, Aconst](double x) {
      return 0.5 * (gamma - 1.0 / gamma) *
             std::exp(x * std::log(gamma) + Aconst);
    };
    auto zn = zq.z;
    auto zw = zq.w;
    std::vector<cd> bw(n);
    for (int j = 0; j < n; ++j)
      bw[j] = std::sqrt(gamma) * zw[j] * gz[j] / (zn[j] * zn[j] - 1.0);
    out.corr.B = [zn, bw, n](double y) {
      cd s = 0.0;
      for (int j = 0; j < n; ++j) s += bw[j] * ipow(zn[j], -y - 0.5);
      return s.real();
    };
    out.corr.Bp = [zn, bw, n](double y) {
      cd s = 0.0;
      for (int j = 0; j < n; ++j)
        s += bw[j] * (-0.5) * (zn[j] - 1.0 / zn[j]) * ipow(zn[j], -y - 0.5);
      return s.real();
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// log-gamma polymer, full space

namespace {

struct LGFullState {
  Sandwich ge, lt;
  int k = 0;
  std::vector<ExpSum> h_ge, h_lt;   // closed residue sums, signs folded
  std::vector<Sandwich> d_ge, d_lt; // crossed gamma poles, signs folded

  double at(double X, double Y) const {
    if (X >= Y) {
      double val = ge.at(X, Y);
      for (int l = 1; l <= k; ++l)
        val += std::exp(-l * Y) * h_ge[l - 1].at(X - Y);
      for (const auto& D : d_ge) val += D.at(X, Y);
      return val;
    }
    double val = lt.at(X, Y);
    for (int l = 1; l <= k; ++l)
      val += std::exp(-l * X) * h_lt[l - 1].at(X - Y);
    for (const auto& D : d_lt) val += D.at(X, Y);
    return val;
  }
  Eigen::MatrixXd fill(const std::vector<double>& xs,
                       const std::vector<double>& ys) const {
    Eigen::MatrixXd Mge = ge.fill(xs, ys), Mlt = lt.fill(xs, ys);
    for (const auto& D : d_ge) Mge += D.fill(xs, ys);
    for (const auto& D : d_lt) Mlt += D.fill(xs, ys);
    Eigen::MatrixXd out(xs.size(), ys.size());
    for (size_t i = 0; i < xs.size(); ++i)
      for (size_t j = 0; j < ys.size(); ++j) {
        double X = xs[i], Y = ys[j], val;
        if (X >= Y) {
          val = Mge(i, j);
          for (int l = 1; l <= k; ++l)
            val += std::exp(-l * Y) * h_ge[l - 1].at(X - Y);
        } else {
          val = Mlt(i, j);
          for (int l = 1; l <= k; ++l)
            val += std::exp(-l * X) * h_lt[l - 1].at(X - Y);
        }
        out(i, j) = val;
      }
    return out;
  }
};

int lg_shift(int N, double d, double dp) {
  return std::max(0, int(std::ceil(8.0 / (2.0 * N) - (d + dp) - 1e-12)));
}

bool lg_feasible(const std::vector<double>& A, const std::vector<double>& B,
                 double d, double dp) {
  int N = int(A.size());
  double amin = *std::min_element(A.begin(), A.end());
  double bmin = *std::min_element(B.begin(), B.end());
  if (!(d > 0.0 && dp > 0.0)) return false;
  if (!(d + dp > 1.0 / (2.0 * N) + 1e-9 && d + dp < 1.0 - 1e-9)) return false;
  if (!(d <= amin - 0.02 && dp <= bmin - 0.02)) return false;
  int k = lg_shift(N, d, dp);
  if (nearest_int_dist(d + dp + k) < 0.08) return false;
  if (nearest_int_dist(d + dp) < 0.08) return false;
  for (double ai : A)
    for (int j = 0; j <= k + 1; ++j) {
      if (std::abs(ai + j - d) < 0.04) return false;
      if (std::abs(ai + j - (d + k)) < 0.04) return false;
    }
  for (double bi : B)
    for (int j = 0; j <= k + 1; ++j) {
      if (std::abs(bi + j - dp) < 0.04) return false;
      if (std::abs(bi + j - (dp + k)) < 0.04) return false;
    }
  // gamma arguments on the shifted lines keep clear of the nonpositive axis
  for (double ai : A) {
    double v = ai - d - k;
    if (v < 0.1 && std::round(v) <= 0.0 && nearest_int_dist(v) < 0.1)
      return false;
  }
  for (double bi : B) {
    double v = bi - dp - k;
    if (v < 0.1 && std::round(v) <= 0.0 && nearest_int_dist(v) < 0.1)
      return false;
  }
  // closure-pole positions off the integration lines
  for (int m = 1; m <= k; ++m) {
    for (double ai : A)
      if (std::abs(m - ai - dp) < 0.04) return false;
    for (double bi : B)
      if (std::abs(bi - m + d) < 0.04) return false;
  }
  // crossed-pole circles keep clear of the sine lines
  for (double bi : B)
    for (int j = 0; j <= k; ++j) {
      double p = bi + j;
      if (p > dp + 0.04 && p < dp + k - 0.04 && nearest_int_dist(p + d) < 0.15)
        return false;
    }
  for (double ai : A)
    for (int j = 0; j <= k; ++j) {
      double p = ai + j;
      if (p > d + 0.04 && p < d + k - 0.04 && nearest_int_dist(p + dp) < 0.15)
        return false;
    }
  return true;
}

}  // namespace

KernelEval make_LG_full_K(const std::vector<double>& A,
                          const std::vector<double>& B, double d, double dp) {
  int N = int(A.size());
  if (N < 1 || B.size() != A.size())
    throw Error("kernels: parameter lists must match and be nonempty");
  for (double v : A)
    if (!(v > 0.0)) throw Error("kernels: parameters must be positive");
  for (double v : B)
    if (!(v > 0.0)) throw Error("kernels: parameters must be positive");

  if (d <= 0.0 || dp <= 0.0) {
    double base = N == 1 ? 0.3 : 0.25;
    const double off[6] = {0.0, 0.03, -0.03, 0.06, -0.06, 0.09};
    bool found = false;
    for (int i = 0; i < 6 && !found; ++i)
      for (int j = 0; j < 6 && !found; ++j)
        if (lg_feasible(A, B, base + off[i], base + off[j])) {
          d = base + off[i];
          dp = base + off[j];
          found = true;
        }
    if (!found) throw Error("kernels: no feasible contour placement");
  } else if (!lg_feasible(A, B, d, dp)) {
    throw Error("kernels: contour placement infeasible");
  }

  int k = lg_shift(N, d, dp);
  double T = std::clamp(std::exp(28.0 / (2.0 * N * (d + dp + k))), 6.0, 40.0);
  int per_unit = 34;
  CQuad z_ge = gl_line(-d, T, per_unit), w_ge = gl_line(dp + k, T, per_unit);
  CQuad z_lt = gl_line(-d - k, T, per_unit), w_lt = gl_line(dp, T, per_unit);

  auto gfun = [A, B](cd Z) {
    cd lg = 0.0;
    for (size_t i = 0; i < A.size(); ++i)
      lg += log_gamma(A[i] + Z) - log_gamma(B[i] - Z);
    return lg;  // log of g
  };
  auto state = std::make_shared<LGFullState>();
  state->k = k;

  auto build_main = [&](Sandwich& S, const CQuad& zq, const CQuad& wq) {
    int nz = zq.size(), nw = wq.size();
    S.C.resize(nz, nw);
    for (int i = 0; i < nz; ++i)
      for (int j = 0; j < nw; ++j)
        S.C(i, j) =
            zq.w[i] * wq.w[j] * kPi / std::sin(kPi * (wq.z[j] - zq.z[i]));
    std::vector<cd> gz(nz), gw(nw);
    for (int i = 0; i < nz; ++i) gz[i] = std::exp(gfun(zq.z[i]));
    for (int j = 0; j < nw; ++j) gw[j] = std::exp(-gfun(wq.z[j]));
    auto zn = zq.z, wn = wq.z;
    S.u = [zn, gz](double X) {
      VecC v(zn.size());
      for (size_t i = 0; i < zn.size(); ++i) v[i] = gz[i] * std::exp(zn[i] * X);
      return v;
    };
    S.v = [wn, gw](double Y) {
      VecC v(wn.size());
      for (size_t j = 0; j < wn.size(); ++j)
        v[j] = gw[j] * std::exp(-wn[j] * Y);
      return v;
    };
  };
  build_main(state->ge, z_ge, w_ge);
  build_main(state->lt, z_lt, w_lt);

  // residue sums from the sine poles crossed by the shift
  for (int l = 1; l <= k; ++l) {
    auto rat = [A, B, l](cd Z) {
      cd val = 1.0;
      for (size_t i = 0; i < A.size(); ++i) {
        for (int m = 0; m < l; ++m) val /= A[i] + Z + double(m);
        for (int m = 1; m <= l; ++m) val /= B[i] - Z - double(m);
      }
      return val;
    };
    auto rat_t = [A, B, l](cd W) {
      cd val = 1.0;
      for (size_t i = 0; i < A.size(); ++i) {
        for (int m = 1; m <= l; ++m) val /= A[i] + W - double(m);
        for (int m = 0; m < l; ++m) val /= B[i] - W + double(m);
      }
      return val;
    };
    double sg = (l % 2 == 0) ? 1.0 : -1.0;  // (-1)^l
    std::vector<double> left;
    for (double ai : A)
      for (int m = 0; m < l; ++m) left.push_back(-(ai + m));
    for (double bi : B)
      for (int m = 1; m <= l; ++m)
        if (bi - m < -d) left.push_back(bi - m);
    state->h_ge.push_back(closure_sum(left, -sg, rat));
    std::vector<double> right;
    for (double bi : B)
      for (int m = 0; m < l; ++m) right.push_back(bi + m);
    for (double ai : A)
      for (int m = 1; m <= l; ++m)
        if (m - ai > dp) right.push_back(m - ai);
    state->h_lt.push_back(closure_sum(right, sg, rat_t));
  }

  // gamma poles crossed by the shift, one circle per distinct position
  auto cross_circles = [&](bool wside) {
    std::map<long long, double> centers;
    const auto& P = wside ? B : A;
    double line = wside ? dp : d;
    for (double p0 : P)
      for (int j = 0; j <= k; ++j) {
        double p = p0 + j;
        if (p > line + 0.04 && p < line + k - 0.04)
          centers[llround(p * 1e8)] = p;
      }
    std::vector<double> out;
    for (auto& kv : centers) out.push_back(kv.second);
    return out;
  };
  for (double p : cross_circles(true)) {
    double rho = std::min(0.1, nearest_int_dist(p + d) - 0.05);
    CQuad cq = circle_at(cd(p, 0.0), rho, 64);
    Sandwich D;
    int nz = z_ge.size(), nc = cq.size();
    D.C.resize(nz, nc);
    for (int i = 0; i < nz; ++i)
      for (int c = 0; c < nc; ++c)
        D.C(i, c) = -z_ge.w[i] * cq.w[c] * kPi /
                    std::sin(kPi * (cq.z[c] - z_ge.z[i]));
    std::vector<cd> gz(nz), gw(nc);
    for (int i = 0; i < nz; ++i) gz[i] = std::exp(gfun(z_ge.z[i]));
    for (int c = 0; c < nc; ++c) gw[c] = std::exp(-gfun(cq.z[c]));
    auto zn = z_ge.z, wn = cq.z;
    D.u = [zn, gz](double X) {
      VecC v(zn.size());
      for (size_t i = 0; i < zn.size(); ++i) v[i] = gz[i] * std::exp(zn[i] * X);
      return v;
    };
    D.v = [wn, gw](double Y) {
      VecC v(wn.size());
      for (size_t j = 0; j < wn.size(); ++j)
        v[j] = gw[j] * std::exp(-wn[j] * Y);
      return v;
    };
    state->d_ge.push_back(std::move(D));
  }
  for (double p : cross_circles(false)) {
    double rho = std::min(0.1, nearest_int_dist(p + dp) - 0.05);
    CQuad cq = circle_at(cd(-p, 0.0), rho, 64);
    Sandwich D;
    int nc = cq.size(), nw = w_lt.size();
    D.C.resize(nc, nw);
    for (int c = 0; c < nc; ++c)
      for (int j = 0; j < nw; ++j)
        D.C(c, j) = cq.w[c] * w_lt.w[j] * kPi /
                    std::sin(kPi * (w_lt.z[j] - cq.z[c]));
    std::vector<cd> gz(nc), gw(nw);
    for (int c = 0; c < nc; ++c) gz[c] = std::exp(gfun(cq.z[c]));
    for (int j = 0; j < nw; ++j) gw[j] = std::exp(-gfun(w_lt.z[j]));
    auto zn = cq.z, wn = w_lt.z;
    D.u = [zn, gz](double X) {
      VecC v(zn.size());
      for (size_t i = 0; i < zn.size(); ++i) v[i] = gz[i] * std::exp(zn[i] * X);
      return v;
    };
    D.v = [wn, gw](double Y) {
      VecC v(wn.size());
      for (size_t j = 0; j < wn.size(); ++j)
        v[j] = gw[j] * std::exp(-wn[j] * Y);
      return v;
    };
    state->d_lt.push_back(std::move(D));
  }

  KernelEval K;
  K.at = [state](double X, double Y) { return state->at(X, Y); };
  K.fill_fn = [state](const std::vector<double>& xs,
                      const std::vector<double>& ys) {
    return state->fill(xs, ys);
  };
  double amin = *std::min_element(A.begin(), A.end());
  double bmin = *std::min_element(B.begin(), B.end());
  K.diag_decay = std::min(amin + bmin, 1.0);
  return K;
}

// ---------------------------------------------------------------------------
// log-gamma polymer, half space

LGHalf make_LG_half_L(const std::vector<double>& A, double Upsilon, double d) {
  int N = int(A.size());
  if (N < 2) throw Error("kernels: need at least two parameters for the line quadrature");
  double amin = *std::min_element(A.begin(), A.end());
  if (!(amin > 0.0)) throw Error("kernels: parameters must be positive");
  if (!(Upsilon > -amin)) throw Error("kernels: boundary parameter too low");
  if (d <= 0.0) {
    d = std::min(0.45, 0.75 * amin);
    for (int guard = 0; guard < 12; ++guard) {
      bool clash = false;
      for (int j = 0; j < 8; ++j)
        if (std::abs(d - (Upsilon + j)) < 0.04) clash = true;
      if (!clash) break;
      d -= 0.05;
    }
  }
  if (!(d > 0.015 && d <= 0.475 && d < amin))
    throw Error("kernels: contour offset infeasible");
  for (int j = 0; j < 8; ++j)
    if (std::abs(d - (Upsilon + j)) < 0.02)
      throw Error("kernels: contour pinned on a boundary pole");

  // the integrand decays only algebraically along Im W = -Im Z, at power
  // 1 - 4Nd before derivative insertions; size the cutoff accordingly
  double tail_pow = 4.0 * N * d - 1.0;
  if (!(tail_pow >= 2.0))
    throw Error("kernels: line quadrature tail too heavy for these parameters");
  double T = std::clamp(std::pow(10.0, 9.0 / tail_pow), 8.0, 40.0);
  int per_unit = 26;
  CQuad zq = gl_line(-d, T, per_unit);
  int n = zq.size();

  auto gfun = [A, Upsilon](cd Z) {
    cd lg = log_gamma(Upsilon + Z) - log_gamma(Upsilon - Z);
    for (double ai : A) lg += log_gamma(ai + Z) - log_gamma(ai - Z);
    return lg;
  };
  std::vector<cd> gz(n), gam(n);
  for (int j = 0; j < n; ++j) {
    gz[j] = std::exp(gfun(zq.z[j]));
    gam[j] = std::exp(log_gamma(-2.0 * zq.z[j]));
  }
  auto S = std::make_shared<Sandwich2>();
  S->C.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cd Z = zq.z[i], W = zq.z[j];
      S->C(i, j) = zq.w[i] * zq.w[j] * gam[i] * gam[j] *
                   std::sin(kPi * (Z - W)) / std::sin(kPi * (Z + W));
    }
  auto zn = zq.z;
  auto base = [zn, gz, n](double X) {
    VecC v(n);
    for (int j = 0; j < n; ++j) v[j] = gz[j] * std::exp(zn[j] * X);
    return v;
  };
  auto ins = [zn, n](VecC v) {
    for (int j = 0; j < n; ++j) v[j] *= -zn[j];
    return v;
  };
  S->u = base;
  S->up = [base, ins](double X) { return ins(base(X)); };
  S->v = base;
  S->vp = [base, ins](double Y) { return ins(base(Y)); };

  LGHalf out;
  out.d = d;
  out.L = wrap_mat(S, std::min(2.0 * d, 0.5));

  std::vector<int> cross;
  for (int j = 0; j < 8; ++j)
    if (Upsilon + j < d) cross.push_back(j);
  if (!cross.empty()) {
    std::vector<double> rate, coef;
    for (int j : cross) {
      double c = 1.0;
      for (int m = j; m <= 2 * j - 1; ++m) c *= 2.0 * Upsilon + m;
      c /= std::tgamma(double(j) + 1.0);
      if (j % 2 == 1) c = -c;
      for (double ai : A) {
        if (!(ai - Upsilon - j > 0.0))
          throw Error("kernels: crossed pole hits a gamma singularity");
        c *= std::exp(std::lgamma(ai - Upsilon - j) - std::lgamma(ai + Upsilon + j));
      }
      rate.push_back(Upsilon + j);
      coef.push_back(c);
    }
    out.corr.active = true;
    out.corr.sign = 1.0;
    out.corr.A = [rate, coef](double X) {
      double s = 0.0;
      for (size_t i = 0; i < rate.size(); ++i)
        s += coef[i] * std::exp(-rate[i] * X);
      return s;
    };
    out.corr.Ap = [rate, coef](double X) {
      double s = 0.0;
      for (size_t i = 0; i < rate.size(); ++i)
        s += -rate[i] * coef[i] * std::exp(-rate[i] * X);
      return s;
    };
    double dB = std::min({0.9 * amin, 0.9 * (1.0 - Upsilon), 0.6});
    if (Upsilon < 0.0 && !(dB > -Upsilon + 0.05))
      throw Error("kernels: pairing decay too weak for the continuation");
    CQuad bq = gl_line(-dB, 12.0, 22);
    int nb = bq.size();
    std::vector<cd> bw(nb);
    for (int j = 0; j < nb; ++j) {
      cd W = bq.z[j];
      cd lg = log_gamma(-2.0 * W) + log_gamma(1.0 - Upsilon + W) -
              log_gamma(1.0 - Upsilon - W);
      for (double ai : A) lg += log_gamma(ai + W) - log_gamma(ai - W);
      bw[j] = bq.w[j] * std::exp(lg);
    }
    auto bn = bq.z;
    out.corr.B = [bn, bw, nb](double Y) {
      cd s = 0.0;
      for (int j = 0; j < nb; ++j) s += bw[j] * std::exp(bn[j] * Y);
      return s.real();
    };
    out.corr.Bp = [bn, bw, nb](double Y) {
      cd s = 0.0;
      for (int j = 0; j < nb; ++j) s += bn[j] * bw[j] * std::exp(bn[j] * Y);
      return s.real();
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// intermediate disorder

MSHEKernels make_mSHE_kernels(double t, double s, std::optional<double> omega) {
  if (!(t > 0.0)) throw Error("kernels: time must be positive");
  MSHEKernels out;
  out.s_hint = s;

  {
    double d = 0.25;
    double T = std::sqrt(76.0 / (t * d));
    int per_unit = int((std::abs(s) + 55.0) / 3.0) + 8;
    CQuad zq = gl_line(-d, T, per_unit), wq = gl_line(d, T, per_unit);
    int nz = zq.size(), nw = wq.size();
    auto S = std::make_shared<Sandwich>();
    S->C.resize(nz, nw);
    for (int i = 0; i < nz; ++i)
      for (int j = 0; j < nw; ++j)
        S->C(i, j) =
            zq.w[i] * wq.w[j] * kPi / std::sin(kPi * (wq.z[j] - zq.z[i]));
    auto zn = zq.z, wn = wq.z;
    S->u = [zn, t](double X) {
      VecC v(zn.size());
      for (size_t i = 0; i < zn.size(); ++i)
        v[i] = std::exp(-(t / 6.0) * zn[i] * zn[i] * zn[i] + zn[i] * X);
      return v;
    };
    S->v = [wn, t](double Y) {
      VecC v(wn.size());
      for (size_t j = 0; j < wn.size(); ++j)
        v[j] = std::exp((t / 6.0) * wn[j] * wn[j] * wn[j] - wn[j] * Y);
      return v;
    };
    out.K_full = wrap_scalar(S, 1.0);
  }

  if (!omega) return out;
  double w = *omega;
  out.has_hs = true;
  double half = 0.5 + w;
  double d = half > 0.2 ? std::min(0.25, 0.5 * half) : 0.25;
  double T = std::sqrt(76.0 / (t * d));
  if (T > 70.0) throw Error("kernels: boundary weight too close to critical");
  int per_unit = int((std::abs(s) + 55.0) / 3.0) + 8;
  CQuad zq = gl_line(d, T, per_unit);
  int n = zq.size();
  std::vector<cd> gz(n);
  for (int j = 0; j < n; ++j) {
    cd Z = zq.z[j];
    gz[j] = std::exp((t / 6.0) * Z * Z * Z + log_gamma(half - Z) -
                     log_gamma(half + Z) + log_gamma(2.0 * Z));
  }
  auto S = std::make_shared<Sandwich2>();
  S->C.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cd Z = zq.z[i], W = zq.z[j];
      S->C(i, j) = zq.w[i] * zq.w[j] * std::sin(kPi * (Z - W)) /
                   std::sin(kPi * (Z + W));
    }
  auto zn = zq.z;
  auto base = [zn, gz, n](double X) {
    VecC v(n);
    for (int j = 0; j < n; ++j) v[j] = gz[j] * std::exp(-zn[j] * X);
    return v;
  };
  auto ins = [zn, n](VecC v) {
    for (int j = 0; j < n; ++j) v[j] *= zn[j];
    return v;
  };
  S->u = base;
  S->up = [base, ins](double X) { return ins(base(X)); };
  S->v = base;
  S->vp = [base, ins](double Y) { return ins(base(Y)); };
  std::vector<int> cross;
  for (int j = 0; j < 8; ++j)
    if (half + j < d) cross.push_back(j);
  out.L_hs = wrap_mat(S, cross.empty() ? std::min(1.0, 2.0 * half) : 2.0 * d);
  if (!cross.empty()) {
    std::vector<double> rate, coef;
    for (int j : cross) {
      double c = 1.0;
      for (int m = j; m <= 2 * j - 1; ++m) c *= 1.0 + 2.0 * w + m;
      c /= std::tgamma(double(j) + 1.0);
      if (j % 2 == 1) c = -c;
      double hj = half + j;
      c *= std::exp((t / 6.0) * hj * hj * hj);
      rate.push_back(hj);
      coef.push_back(c);
    }
    out.corr.active = true;
    out.corr.sign = 1.0;
    out.corr.A = [rate, coef](double X) {
      double sum = 0.0;
      for (size_t i = 0; i < rate.size(); ++i)
        sum += coef[i] * std::exp(-rate[i] * X);
      return sum;
    };
    out.corr.Ap = [rate, coef](double X) {
      double sum = 0.0;
      for (size_t i = 0; i < rate.size(); ++i)
        sum += -rate[i] * coef[i] * std::exp(-rate[i] * X);
      return sum;
    };
    double dB = std::min(std::max(0.45, std::abs(half) + 0.2),
                         0.9 * (0.5 - w));
    double TB = std::sqrt(76.0 / (t * dB));
    CQuad bq = gl_line(dB, TB, int((std::abs(s) + 45.0) / 3.0) + 8);
    int nb = bq.size();
    std::vector<cd> bw(nb);
    for (int j = 0; j < nb; ++j) {
      cd W = bq.z[j];
      bw[j] = bq.w[j] * std::exp((t / 6.0) * W * W * W + log_gamma(2.0 * W) +
                                 log_gamma(0.5 - w - W) -
                                 log_gamma(0.5 - w + W));
    }
    auto bn = bq.z;
    out.corr.B = [bn, bw, nb](double Y) {
      cd sum = 0.0;
      for (int j = 0; j < nb; ++j) sum += bw[j] * std::exp(-bn[j] * Y);
      return sum.real();
    };
    out.corr.Bp = [bn, bw, nb](double Y) {
      cd sum = 0.0;
      for (int j = 0; j < nb; ++j)
        sum += -bn[j] * bw[j] * std::exp(-bn[j] * Y);
      return sum.real();
    };
  }
  return out;
}

double mshe_fermi_airy(double x, double y) {
  double hi = std::max(8.0, 14.0 - std::min(x, y));
  std::vector<double> bounds;
  for (double b = -40.0; b < hi; b += 2.0) bounds.push_back(b);
  bounds.push_back(hi);
  Quad g = gl_composite(bounds, 12);
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    double xi = g.x[i];
    s += g.w[i] * airy_ai(x + xi) * airy_ai(y + xi) / (1.0 + std::exp(-xi));
  }
  return s;
}

KLDParts make_KLD(double t, double omega, double s) {
  if (!(t > 0.0)) throw Error("kernels: time must be positive");
  double half = 0.5 + omega;
  if (!(half > 0.02)) throw Error("kernels: sharp-weight route needs omega > -1/2");
  double d = std::min(0.25, 0.45 * half);
  double T = std::sqrt(76.0 / (t * d));
  if (T > 70.0) throw Error("kernels: boundary weight too close to critical");

  KLDParts out;
  out.Fs = [s](double th) { return 1.0 / (1.0 + std::exp(-th + s)); };

  {
    double thmax = std::abs(s) + std::max(40.0, 6.0 / half);
    int per_unit = int(thmax / 2.0) + 8;
    CQuad zq = gl_line(d, T, per_unit);
    int n = zq.size();
    std::vector<cd> base(n);
    for (int j = 0; j < n; ++j) {
      cd Z = zq.z[j];
      base[j] = std::exp((t / 6.0) * Z * Z * Z + log_gamma(2.0 * Z) +
                         log_gamma(half - Z) - log_gamma(half + Z));
    }
    auto S = std::make_shared<Sandwich2>();
    S->C.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cd Z = zq.z[i], W = zq.z[j];
        S->C(i, j) = zq.w[i] * zq.w[j] * base[i] * base[j] * (Z - W) / (Z + W);
      }
    auto zn = zq.z;
    auto mk = [zn, n](bool odd) {
      return [zn, n, odd](double th) {
        VecC v(n);
        for (int j = 0; j < n; ++j) {
          cd trig = odd ? std::sin(kPi * zn[j]) / kPi : std::cos(kPi * zn[j]);
          v[j] = trig * std::exp(-th * zn[j]);
        }
        return v;
      };
    };
    S->u = mk(true);
    S->up = mk(false);
    S->v = mk(true);
    S->vp = mk(false);
    out.M = wrap_mat(S, 2.0 * half);
  }

  // convolution route: odd/even boundary functions against the sharp weight
  int pu_f = int((std::abs(s) + 115.0) / 2.2) + 10;
  auto fq = std::make_shared<CQuad>(gl_line(d, T, pu_f));
  int nf = fq->size();
  auto wts = std::make_shared<std::vector<cd>>(nf);
  for (int j = 0; j < nf; ++j) {
    cd Z = fq->z[j];
    (*wts)[j] = fq->w[j] * std::exp((t / 6.0) * Z * Z * Z + log_gamma(2.0 * Z) +
                                    log_gamma(half - Z) - log_gamma(half + Z));
  }
  Quad tg = gl_composite({s - 40.0, s - 20.0, s - 8.0, s + 4.0, s + 16.0,
                          s + 30.0, s + 46.0, s + 62.0},
                         40);
  auto tgrid = std::make_shared<Quad>(tg);
  auto Fs = out.Fs;

  auto fvals = [fq, wts, nf](double arg, bool odd, bool deriv) {
    cd sum = 0.0;
    for (int j = 0; j < nf; ++j) {
      cd Z = fq->z[j];
      cd trig = odd ? std::sin(kPi * Z) / kPi : std::cos(kPi * Z);
      cd term = (*wts)[j] * trig * std::exp(-arg * Z);
      if (deriv) term *= -Z;
      sum += term;
    }
    return sum.real();
  };

  KernelEval Ds;
  Ds.at = [fvals, tgrid, Fs](double x, double y) {
    double acc = 0.0;
    for (int q = 0; q < tgrid->size(); ++q) {
      double th = tgrid->x[q], wq = tgrid->w[q] * Fs(th);
      acc += wq * (fvals(x + th, false, true) * fvals(y + th, true, false) -
                   fvals(x + th, true, true) * fvals(y + th, false, false));
    }
    return 2.0 * acc;
  };
  Ds.fill_fn = [fq, wts, tgrid, Fs, nf](const std::vector<double>& xs,
                                        const std::vector<double>& ys) {
    int nt = tgrid->size();
    auto tabulate = [&](const std::vector<double>& pts) {
      int np = int(pts.size());
      MatC E(np, nf);
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < nf; ++j) E(i, j) = std::exp(-pts[i] * fq->z[j]);
      MatC Eth(nf, nt);
      for (int j = 0; j < nf; ++j)
        for (int q = 0; q < nt; ++q)
          Eth(j, q) = std::exp(-tgrid->x[q] * fq->z[j]);
      VecC a_e(nf), a_o(nf), a_ep(nf), a_op(nf);
      for (int j = 0; j < nf; ++j) {
        cd Z = fq->z[j];
        cd co = std::cos(kPi * Z), si = std::sin(kPi * Z) / kPi;
        a_e[j] = (*wts)[j] * co;
        a_o[j] = (*wts)[j] * si;
        a_ep[j] = -Z * a_e[j];
        a_op[j] = -Z * a_o[j];
      }
      struct Tabs {
        Eigen::MatrixXd fe, fo, fep, fop;
      } tb;
      tb.fe = (E * a_e.asDiagonal() * Eth).real();
      tb.fo = (E * a_o.asDiagonal() * Eth).real();
      tb.fep = (E * a_ep.asDiagonal() * Eth).real();
      tb.fop = (E * a_op.asDiagonal() * Eth).real();
      return tb;
    };
    auto tx = tabulate(xs);
    bool same = xs == ys;
    auto ty = same ? tx : tabulate(ys);
    Eigen::VectorXd wF(nt);
    for (int q = 0; q < nt; ++q) wF[q] = tgrid->w[q] * Fs(tgrid->x[q]);
    Eigen::MatrixXd out2 =
        2.0 * (tx.fep * wF.asDiagonal() * ty.fo.transpose() -
               tx.fop * wF.asDiagonal() * ty.fe.transpose());
    return out2;
  };
  Ds.diag_decay = 2.0 * half;
  out.Ds = Ds;
  return out;
}

// ---------------------------------------------------------------------------
// limit kernels

namespace {

std::shared_ptr<Sandwich2> wedge_pair_kernel(double apex, double xi,
                                             bool use_phi) {
  CQuad q = wedge_quad(apex, kPi / 3.0, 8.0, 12);
  int n = q.size();
  auto S = std::make_shared<Sandwich2>();
  S->C.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cd a = q.z[i], b = q.z[j];
      S->C(i, j) = q.w[i] * q.w[j] * (a - b) / (a * b * (a + b));
    }
  std::vector<cd> phi(n);
  for (int i = 0; i < n; ++i)
    phi[i] = use_phi ? (xi + q.z[i]) / (xi - q.z[i]) : cd(1.0, 0.0);
  auto zn = q.z;
  auto base = [zn, phi, n](double x) {
    VecC v(n);
    for (int j = 0; j < n; ++j)
      v[j] = 0.5 * phi[j] *
             std::exp(zn[j] * zn[j] * zn[j] / 3.0 - zn[j] * x);
    return v;
  };
  auto ins = [zn, n](VecC v) {
    for (int j = 0; j < n; ++j) v[j] *= zn[j];
    return v;
  };
  S->u = base;
  S->up = [base, ins](double x) { return ins(base(x)); };
  S->v = base;
  S->vp = [base, ins](double y) { return ins(base(y)); };
  return S;
}

}  // namespace

double pB_contour(double u) {
  CQuad q = wedge_quad(1.0, kPi / 3.0, 8.0, 12);
  cd s = 0.0;
  for (int j = 0; j < q.size(); ++j) {
    cd a = q.z[j];
    s += q.w[j] * std::exp(a * a * a / 3.0 - a * u) / (2.0 * a);
  }
  return s.real();
}

double pB_airy(double u) {
  double hi = std::max(8.0, 14.0 - u);
  std::vector<double> bounds;
  for (double b = 0.0; b < hi; b += 2.0) bounds.push_back(b);
  bounds.push_back(hi);
  Quad g = gl_composite(bounds, 12);
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) s += g.w[i] * airy_ai(u + g.x[i]);
  return 0.5 * s;
}

LimitKernel make_limit_kernels(LimitFamily fam, double xi, double delta) {
  LimitKernel out;
  if (fam == LimitFamily::airy) {
    CQuad aq = wedge_quad(-1.0, 2.0 * kPi / 3.0, 8.0, 12);
    CQuad bq = wedge_quad(1.0, kPi / 3.0, 8.0, 12);
    int na = aq.size(), nb = bq.size();
    auto S = std::make_shared<Sandwich>();
    S->C.resize(na, nb);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j)
        S->C(i, j) = aq.w[i] * bq.w[j] / (bq.z[j] - aq.z[i]);
    auto an = aq.z, bn = bq.z;
    S->u = [an](double x) {
      VecC v(an.size());
      for (size_t j = 0; j < an.size(); ++j)
        v[j] = std::exp(-an[j] * an[j] * an[j] / 3.0 + an[j] * x);
      return v;
    };
    S->v = [bn](double y) {
      VecC v(bn.size());
      for (size_t j = 0; j < bn.size(); ++j)
        v[j] = std::exp(bn[j] * bn[j] * bn[j] / 3.0 - bn[j] * y);
      return v;
    };
    out.scalar = wrap_scalar(S, 3.96);
    return out;
  }
  out.is_matrix = true;
  if (fam == LimitFamily::cross) {
    if (!(xi > 0.0)) throw Error("kernels: crossover kernel needs xi > 0");
    if (delta <= 0.0) delta = std::min(0.5, xi / 2.0);
    if (!(delta < xi)) throw Error("kernels: wedge apex must sit below xi");
    out.mat = wrap_mat(wedge_pair_kernel(delta, xi, true), 3.96);
    return out;
  }
  auto gse = wedge_pair_kernel(1.0, 0.0, false);
  if (fam == LimitFamily::gse) {
    out.mat = wrap_mat(gse, 3.96);
    return out;
  }
  // goe: gse parts plus boundary additions
  KernelEval2 K;
  K.at = [gse](int i, int j, double u, double v) {
    double val = gse->at(i, j, u, v);
    if (i == 0 && j == 0) val += pB_contour(u) - pB_contour(v);
    if (i == 0 && j == 1) val += -0.5 * airy_ai(v);
    if (i == 1 && j == 0) val += 0.5 * airy_ai(u);
    return val;
  };
  K.fill_fn = [gse](const std::vector<double>& xs) {
    Eigen::MatrixXd B = gse->fill(xs);
    int n = int(xs.size());
    std::vector<double> pb(n), ai(n);
    for (int i = 0; i < n; ++i) {
      pb[i] = pB_contour(xs[i]);
      ai[i] = airy_ai(xs[i]);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        B(2 * i, 2 * j) += pb[i] - pb[j];
        B(2 * i, 2 * j + 1) += -0.5 * ai[j];
        B(2 * i + 1, 2 * j) += 0.5 * ai[i];
      }
    return B;
  };
  K.diag_decay = 3.96;
  out.mat = K;
  return out;
}

}  // namespace lab
