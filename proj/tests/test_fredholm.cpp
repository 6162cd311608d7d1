#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "lab/fredholm.hpp"

namespace {

Eigen::MatrixXd nystrom(const lab::Quad& g,
                        const std::function<double(double, double)>& k) {
  int n = g.size();
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      K(i, j) = std::sqrt(g.w[i]) * k(g.x[i], g.x[j]) * std::sqrt(g.w[j]);
  return K;
}

// literal Fredholm series: sum_l (-1)^l / l! * sum over l-tuples of det minors,
// evaluated as a sum over increasing index subsets
double literal_series(const Eigen::MatrixXd& K, int lmax) {
  int n = K.rows();
  double total = 1.0;
  std::vector<int> idx;
  for (int l = 1; l <= lmax; ++l) {
    idx.assign(l, 0);
    for (int i = 0; i < l; ++i) idx[i] = i;
    double sum_l = 0.0;
    while (true) {
      Eigen::MatrixXd m(l, l);
      for (int a = 0; a < l; ++a)
        for (int b = 0; b < l; ++b) m(a, b) = K(idx[a], idx[b]);
      sum_l += m.determinant();
      int p = l - 1;
      while (p >= 0 && idx[p] == n - l + p) --p;
      if (p < 0) break;
      ++idx[p];
      for (int i = p + 1; i < l; ++i) idx[i] = idx[i - 1] + 1;
    }
    total += (l % 2 ? -1.0 : 1.0) * sum_l;
  }
  return total;
}

}  // namespace

TEST_CASE("gauss legendre exactness and stability") {
  lab::Quad g = lab::gl_nodes(8, 0.0, 1.0);
  for (int k = 0; k <= 15; ++k) {
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) s += g.w[i] * std::pow(g.x[i], k);
    CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
  }
  lab::Quad c = lab::gl_composite({-1.0, 0.5, 2.0}, 12);
  double s = 0.0;
  for (int i = 0; i < c.size(); ++i) s += c.w[i] * std::exp(c.x[i]);
  CHECK(s == doctest::Approx(std::exp(2.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("rank one kernel on the half line") {
  auto k = [](double x, double y) { return std::exp(-x - y); };
  lab::Quad g = lab::halfline_grid(0.0, 40.0, 4, 10);
  double d = lab::fredholm_det(nystrom(g, k));
  CHECK(std::abs(d - 0.5) < 1e-10);
  lab::Quad g2 = lab::halfline_grid(0.0, 40.0, 4, 20);
  double d2 = lab::fredholm_det(nystrom(g2, k));
  CHECK(std::abs(d - d2) < 1e-10);
}

TEST_CASE("det routes agree: LU, eigenvalue series, literal series") {
  auto k = [](double x, double y) {
    return 0.4 * std::exp(-(x * x + y * y) / 2.0) * std::cos(x - y);
  };
  lab::Quad g = lab::gl_nodes(16, -3.0, 3.0);
  Eigen::MatrixXd K = nystrom(g, k);
  double d_lu = lab::fredholm_det(K);
  double d_series = lab::fredholm_det_series(K, 16);
  double d_lit = literal_series(K, 5);
  CHECK(d_lu == doctest::Approx(d_series).epsilon(1e-12));
  CHECK(std::abs(d_lu - d_lit) < 1e-8);
}

TEST_CASE("pfaffian closed forms") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 1) = 1.7;
  A(1, 0) = -1.7;
  CHECK(lab::pfaffian(A) == doctest::Approx(1.7).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      B(i, j) = u(rng);
      B(j, i) = -B(i, j);
    }
  double expect = B(0, 1) * B(2, 3) - B(0, 2) * B(1, 3) + B(0, 3) * B(1, 2);
  CHECK(lab::pfaffian(B) == doctest::Approx(expect).epsilon(1e-13));

  // zero leading entry forces a pivot
  Eigen::MatrixXd C = B;
  C(0, 1) = 0.0;
  C(1, 0) = 0.0;
  expect = -C(0, 2) * C(1, 3) + C(0, 3) * C(1, 2);
  CHECK(lab::pfaffian(C) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("pfaffian squared equals determinant") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int dim : {6, 8, 12}) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        A(i, j) = u(rng);
        A(j, i) = -A(i, j);
      }
    double pf = lab::pfaffian(A);
    CHECK(std::abs(pf * pf - A.determinant()) < 1e-10 * (1.0 + std::abs(pf * pf)));
  }
}

TEST_CASE("pfaffian of the symplectic form and conjugation invariance") {
  int n = 6;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  CHECK(lab::fredholm_pf(Z) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.3, 0.3), uf(0.5, 2.0);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = i + 1; j < 2 * n; ++j) {
      L(i, j) = u(rng);
      L(j, i) = -L(i, j);
    }
  double base = lab::fredholm_pf(L);
  Eigen::VectorXd f(2 * n);
  for (int i = 0; i < n; ++i) {
    double v = uf(rng);
    f(2 * i) = v;
    f(2 * i + 1) = 1.0 / v;
  }
  Eigen::MatrixXd Lc = f.asDiagonal() * L * f.asDiagonal();
  CHECK(lab::fredholm_pf(Lc) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("corrected pfaffian matches direct assembly") {
  auto k = [](double x, double y) {
    return 0.3 * std::sin(x - y) * std::exp(-x - y);
  };
  auto kx = [](double x, double y) {
    return 0.3 * std::exp(-x - y) * (std::cos(x - y) - std::sin(x - y));
  };
  auto ky = [](double x, double y) {
    return 0.3 * std::exp(-x - y) * (-std::cos(x - y) - std::sin(x - y));
  };
  auto kxy = [](double x, double y) {
    return 0.3 * std::exp(-x - y) * (2.0 * std::sin(x - y));
  };
  lab::Quad g = lab::halfline_grid(0.0, 30.0, 3, 8);
  int n = g.size();
  Eigen::MatrixXd L(2 * n, 2 * n);
  Eigen::VectorXd a(2 * n), ap(2 * n), b(2 * n), bp(2 * n);
  for (int i = 0; i < n; ++i) {
    double si = std::sqrt(g.w[i]);
    a(2 * i) = si * std::exp(-g.x[i]);
    ap(2 * i) = si * -std::exp(-g.x[i]);
    b(2 * i) = si * std::exp(-2.0 * g.x[i]);
    bp(2 * i) = si * -2.0 * std::exp(-2.0 * g.x[i]);
    a(2 * i + 1) = ap(2 * i + 1) = b(2 * i + 1) = bp(2 * i + 1) = 0.0;
    for (int j = 0; j < n; ++j) {
      double sj = std::sqrt(g.w[j]);
      L(2 * i, 2 * j) = si * k(g.x[i], g.x[j]) * sj;
      L(2 * i, 2 * j + 1) = si * -ky(g.x[i], g.x[j]) * sj;
      L(2 * i + 1, 2 * j) = si * -kx(g.x[i], g.x[j]) * sj;
      L(2 * i + 1, 2 * j + 1) = si * kxy(g.x[i], g.x[j]) * sj;
    }
  }
  Eigen::VectorXd av(n), apv(n), bv(n), bpv(n);
  for (int i = 0; i < n; ++i) {
    av(i) = a(2 * i);
    apv(i) = ap(2 * i);
    bv(i) = b(2 * i);
    bpv(i) = bp(2 * i);
  }
  lab::CorrectedPf res = lab::corrected_pf(L, av, apv, bv, bpv);
  CHECK(res.rho < 1.0);

  // rank two completion: R = (a b^T - b a^T) spread over the block pattern
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      R(2 * i, 2 * j) = av(i) * bv(j) - bv(i) * av(j);
      R(2 * i, 2 * j + 1) = -(av(i) * bpv(j) - bv(i) * apv(j));
      R(2 * i + 1, 2 * j) = -(apv(i) * bv(j) - bpv(i) * av(j));
      R(2 * i + 1, 2 * j + 1) = apv(i) * bpv(j) - bpv(i) * apv(j);
    }
  double direct = lab::fredholm_pf(L + R);
  CHECK(res.value == doctest::Approx(direct).epsilon(1e-10));
}
