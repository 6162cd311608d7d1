#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace lab {

using cd = std::complex<double>;

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Principal-branch log Gamma, continuous on the plane cut along (-inf, 0].
// Values may differ from other determinations by multiples of 2*pi*i after
// reflection; callers that exponentiate are unaffected.
cd log_gamma(cd z);
double log_gamma_real(double x);

double digamma(double x);
double trigamma(double x);
double polygamma(int n, double x);

// (z;q)_n = prod_{k=0}^{n-1} (1 - z q^k), n >= 0
cd q_pochhammer(cd z, double q, long long n);
double q_pochhammer(double z, double q, long long n);

// (z;q)_inf for 0 <= q <= 1 - 1e-8, as a sum of principal logs
cd q_pochhammer_inf(cd z, double q);
double q_pochhammer_inf(double z, double q);
cd log_q_pochhammer_inf(cd z, double q);

// Gamma_q(X) = (1-q)^{1-X} (q;q)_inf / (q^X;q)_inf
double q_gamma(double X, double q);

// theta3(zeta;q) = sum_{k in Z} q^{k^2/2} zeta^k, via the triple product
// (q;q)_inf (-sqrt(q) zeta;q)_inf (-sqrt(q)/zeta;q)_inf
cd theta3(cd zeta, double q);
// windowed bilateral sum, cross-check route
cd theta3_sum(cd zeta, double q);

// Gaussian binomial [n choose j]_q; 0 outside 0 <= j <= n
double q_binomial(long long n, long long j, double q);

// Airy function on the real line, wedge-contour quadrature for u >= -8 and the
// oscillatory asymptotic series below
double airy_ai(double u);

namespace detail {

// templated (z;q)_inf log-sum so kernel fills can run in long double
template <class R>
std::complex<R> log_qpoch_inf_t(std::complex<R> z, R q) {
  if (!(q >= R(0) && q <= R(1) - R(1e-8)))
    throw Error("log_qpoch_inf: q must lie in [0, 1 - 1e-8]");
  std::complex<R> s(0, 0);
  R qk(1);
  const R cut = std::numeric_limits<R>::epsilon() / R(8) * (R(1) - q);
  for (long long k = 0; k < 1000000; ++k) {
    std::complex<R> f = std::complex<R>(1, 0) - z * qk;
    if (f == std::complex<R>(0, 0))
      return std::complex<R>(-std::numeric_limits<R>::infinity(), 0);
    s += std::log(f);
    qk *= q;
    if (std::abs(z) * qk < cut) return s;
  }
  throw Error("log_qpoch_inf: exceeded factor cap");
}

}  // namespace detail

}  // namespace lab
