#include "lab/specfun.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <vector>

#include "lab/fredholm.hpp"

namespace lab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos, g = 607/128, 15 terms
const double kLanczosG = 607.0 / 128.0;
const double kLanczosC[15] = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4,
    0.15808870322491248884e-3,  -0.21026444172410488319e-3,
    0.21743961811521264320e-3,  -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4,
    0.36899182659531622704e-5};

cd lanczos_log_gamma(cd z) {
  cd ser(kLanczosC[0], 0.0);
  for (int k = 1; k < 15; ++k) ser += kLanczosC[k] / (z - 1.0 + double(k));
  cd t = z + (kLanczosG - 0.5);
  return (z - 0.5) * std::log(t) - t + 0.5 * std::log(2.0 * kPi) +
         std::log(ser);
}

// log sin(pi z), continuous for Im z >= 0; conjugate symmetry below the axis
cd log_sin_pi(cd z) {
  if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
  cd i(0.0, 1.0);
  cd w = std::exp(2.0 * kPi * i * z);
  return -std::log(cd(2.0, 0.0)) + i * kPi / 2.0 - i * kPi * z +
         std::log(1.0 - w);
}

bool is_nonpos_int(double x) {
  return x <= 0.0 && x == std::floor(x);
}

// u_k coefficients of the Airy asymptotic expansions
double airy_u(int k, double prev) {
  return prev * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
         ((2.0 * k - 1.0) * 216.0 * k);
}

double airy_ai_asymptotic_neg(double x) {
  double zeta = 2.0 / 3.0 * std::pow(x, 1.5);
  double P = 1.0, Q = 0.0;
  double u = 1.0, last = 1.0;
  for (int k = 1; k <= 40; ++k) {
    u = airy_u(k, u);
    double term = u / std::pow(zeta, k);
    if (std::abs(term) > std::abs(last)) break;
    last = term;
    double signed_term = ((k / 2) % 2 == 0 ? term : -term);
    if (k % 2 == 0)
      P += signed_term;
    else
      Q += signed_term;
    if (std::abs(term) < 1e-18) break;
  }
  double phase = zeta - kPi / 4.0;
  return (std::cos(phase) * P + std::sin(phase) * Q) /
         (std::sqrt(kPi) * std::pow(x, 0.25));
}

double airy_ai_wedge(double u) {
  double p = (u > 1.0) ? std::sqrt(u) : 0.25;
  const cd dir = std::exp(cd(0.0, kPi / 3.0));
  auto h = [&](double t) {
    cd a = p + t * dir;
    return a * a * a / 3.0 - u * a;
  };
  // scan for the cutoff where the integrand is dead relative to its peak
  double max_re = h(0.0).real(), T = 0.0;
  for (double t = 0.25; t < 80.0; t += 0.25) {
    double re = h(t).real();
    max_re = std::max(max_re, re);
    if (re < max_re - 46.0) {
      T = t;
      break;
    }
  }
  if (T == 0.0) throw Error("airy_ai: no integrand decay located");
  double width = std::min(1.0, 2.0 * kPi / (4.0 * (std::sqrt(std::abs(u)) + 1.0)));
  int panels = std::max(8, int(std::ceil(T / width)));
  cd acc(0.0, 0.0);
  for (int pnl = 0; pnl < panels; ++pnl) {
    double a = T * pnl / panels, b = T * (pnl + 1) / panels;
    Quad g = gl_nodes(20, a, b);
    for (int j = 0; j < 20; ++j) acc += g.w[j] * std::exp(h(g.x[j]));
  }
  return (dir * acc).imag() / kPi;
}

}  // namespace

cd log_gamma(cd z) {
  if (z.imag() == 0.0 && is_nonpos_int(z.real()))
    throw Error("log_gamma: pole at nonpositive integer");
  if (z.real() < 0.5)
    return std::log(cd(kPi, 0.0)) - log_sin_pi(z) - log_gamma(1.0 - z);
  return lanczos_log_gamma(z);
}

double log_gamma_real(double x) {
  if (x <= 0.0) throw Error("log_gamma_real: requires x > 0");
  return std::lgamma(x);
}

double digamma(double x) {
  if (is_nonpos_int(x)) throw Error("digamma: pole at nonpositive integer");
  return boost::math::digamma(x);
}

double trigamma(double x) {
  if (is_nonpos_int(x)) throw Error("trigamma: pole at nonpositive integer");
  return boost::math::trigamma(x);
}

double polygamma(int n, double x) {
  if (n < 0) throw Error("polygamma: order must be >= 0");
  if (is_nonpos_int(x)) throw Error("polygamma: pole at nonpositive integer");
  if (n == 0) return boost::math::digamma(x);
  return boost::math::polygamma(n, x);
}

cd q_pochhammer(cd z, double q, long long n) {
  if (n < 0) throw Error("q_pochhammer: n must be >= 0");
  if (!(q >= 0.0 && q < 1.0)) throw Error("q_pochhammer: q must lie in [0,1)");
  cd out(1.0, 0.0);
  double qk = 1.0;
  for (long long k = 0; k < n; ++k) {
    out *= (1.0 - z * qk);
    qk *= q;
  }
  return out;
}

double q_pochhammer(double z, double q, long long n) {
  return q_pochhammer(cd(z, 0.0), q, n).real();
}

cd log_q_pochhammer_inf(cd z, double q) {
  return detail::log_qpoch_inf_t<double>(z, q);
}

cd q_pochhammer_inf(cd z, double q) {
  cd lg = log_q_pochhammer_inf(z, q);
  if (lg.real() == -std::numeric_limits<double>::infinity()) return cd(0.0, 0.0);
  return std::exp(lg);
}

double q_pochhammer_inf(double z, double q) {
  return q_pochhammer_inf(cd(z, 0.0), q).real();
}

double q_gamma(double X, double q) {
  if (!(q > 0.0 && q <= 1.0 - 1e-8))
    throw Error("q_gamma: q must lie in (0, 1 - 1e-8]");
  double lg = log_q_pochhammer_inf(cd(q, 0.0), q).real() -
              log_q_pochhammer_inf(cd(std::exp(X * std::log(q)), 0.0), q).real();
  return std::exp((1.0 - X) * std::log(1.0 - q) + lg);
}

cd theta3(cd zeta, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error("theta3: q must lie in (0,1)");
  if (zeta == cd(0.0, 0.0)) throw Error("theta3: zeta must be nonzero");
  double sq = std::sqrt(q);
  return q_pochhammer_inf(cd(q, 0.0), q) * q_pochhammer_inf(-sq * zeta, q) *
         q_pochhammer_inf(-sq / zeta, q);
}

cd theta3_sum(cd zeta, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error("theta3_sum: q must lie in (0,1)");
  double lq = std::log(1.0 / q);
  long long center = llround(std::log(std::abs(zeta)) / lq);
  long long halfw = (long long)std::ceil(8.0 / std::sqrt(lq)) + 8;
  cd s(0.0, 0.0);
  cd lz = std::log(zeta);
  for (long long k = center - halfw; k <= center + halfw; ++k) {
    double lw = -0.5 * double(k) * double(k) * lq;
    s += std::exp(cd(lw, 0.0) + double(k) * lz);
  }
  return s;
}

double q_binomial(long long n, long long j, double q) {
  if (n < 0 || j < 0 || j > n) return 0.0;
  if (!(q >= 0.0 && q < 1.0)) throw Error("q_binomial: q must lie in [0,1)");
  if (q == 0.0) return 1.0;
  double out = 1.0;
  for (long long i = 1; i <= j; ++i) {
    out *= (1.0 - std::pow(q, double(n - j + i))) / (1.0 - std::pow(q, double(i)));
  }
  return out;
}

double airy_ai(double u) {
  if (u < -8.0) return airy_ai_asymptotic_neg(-u);
  return airy_ai_wedge(u);
}

}  // namespace lab
