#include "lab/fredholm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace lab {

Quad gl_nodes(int n, double a, double b) {
  if (n < 1) throw Error("gl_nodes: n must be >= 1");
  if (!(b > a)) throw Error("gl_nodes: requires b > a");
  Quad q;
  q.x.resize(n);
  q.w.resize(n);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
    double w = 2.0 * xl / ((1.0 - x * x) * pp * pp);
    q.x[i] = xm - xl * x;
    q.w[i] = w;
    q.x[n - 1 - i] = xm + xl * x;
    q.w[n - 1 - i] = w;
  }
  return q;
}

Quad gl_composite(const std::vector<double>& bounds, int per_panel) {
  if (bounds.size() < 2) throw Error("gl_composite: need at least one panel");
  Quad out;
  for (size_t p = 0; p + 1 < bounds.size(); ++p) {
    Quad g = gl_nodes(per_panel, bounds[p], bounds[p + 1]);
    out.x.insert(out.x.end(), g.x.begin(), g.x.end());
    out.w.insert(out.w.end(), g.w.begin(), g.w.end());
  }
  return out;
}

Quad halfline_grid(double s, double span, int panels, int per_panel) {
  if (panels < 1) throw Error("halfline_grid: panels must be >= 1");
  std::vector<double> bounds;
  double total = 0.0, w = 1.0;
  for (int p = 0; p < panels; ++p) {
    total += w;
    w *= 2.0;
  }
  bounds.push_back(s);
  double acc = 0.0;
  w = 1.0;
  for (int p = 0; p < panels; ++p) {
    acc += w;
    w *= 2.0;
    bounds.push_back(s + span * acc / total);
  }
  return gl_composite(bounds, per_panel);
}

double fredholm_det(const Eigen::MatrixXd& K) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(K.rows(), K.cols()) - K;
  return M.partialPivLu().determinant();
}

double fredholm_det_series(const Eigen::MatrixXd& K, int terms) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(K, /*computeEigenvectors=*/false);
  Eigen::VectorXcd lam = es.eigenvalues();
  int n = int(lam.size());
  terms = std::min(terms, n);
  // power sums, then elementary symmetric functions by Newton's identities
  std::vector<std::complex<double>> p(terms + 1), e(terms + 1);
  for (int k = 1; k <= terms; ++k) {
    std::complex<double> s(0, 0);
    for (int i = 0; i < n; ++i) s += std::pow(lam[i], k);
    p[k] = s;
  }
  e[0] = 1.0;
  for (int k = 1; k <= terms; ++k) {
    std::complex<double> s(0, 0);
    for (int j = 1; j <= k; ++j) s += (j % 2 ? 1.0 : -1.0) * e[k - j] * p[j];
    e[k] = s / double(k);
  }
  std::complex<double> det(0, 0);
  for (int k = 0; k <= terms; ++k) det += (k % 2 ? -e[k] : e[k]);
  return det.real();
}

double pfaffian(Eigen::MatrixXd A) {
  int n = int(A.rows());
  if (n != A.cols() || n % 2 != 0) throw Error("pfaffian: need even square");
  if (n == 0) return 1.0;
  double skew = (A + A.transpose()).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (skew > 1e-10 * scale) throw Error("pfaffian: matrix is not skew");
  double pf = 1.0;
  for (int k = 0; k + 1 < n; k += 2) {
    int piv = k + 1;
    double best = std::abs(A(k, k + 1));
    for (int j = k + 2; j < n; ++j)
      if (std::abs(A(k, j)) > best) {
        best = std::abs(A(k, j));
        piv = j;
      }
    if (best == 0.0) return 0.0;
    if (piv != k + 1) {
      A.row(piv).swap(A.row(k + 1));
      A.col(piv).swap(A.col(k + 1));
      pf = -pf;
    }
    double pivot = A(k, k + 1);
    pf *= pivot;
    int m = n - (k + 2);
    if (m > 0) {
      Eigen::VectorXd bk = A.row(k).tail(m);
      Eigen::VectorXd ak = A.row(k + 1).tail(m);
      A.bottomRightCorner(m, m).noalias() += (ak * bk.transpose() - bk * ak.transpose()) / pivot;
    }
  }
  return pf;
}

namespace {

Eigen::MatrixXd interleaved_J(int dim) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i + 1 < dim; i += 2) {
    J(i, i + 1) = 1.0;
    J(i + 1, i) = -1.0;
  }
  return J;
}

}  // namespace

double fredholm_pf(const Eigen::MatrixXd& B) {
  int dim = int(B.rows());
  if (dim % 2 != 0 || dim != B.cols()) throw Error("fredholm_pf: need even square");
  return pfaffian(interleaved_J(dim) - B);
}

CorrectedPf corrected_pf(const Eigen::MatrixXd& L, const Eigen::VectorXd& a,
                         const Eigen::VectorXd& ap, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& bp) {
  int dim = int(L.rows());
  int n = dim / 2;
  if (dim % 2 != 0 || a.size() != n || ap.size() != n || b.size() != n ||
      bp.size() != n)
    throw Error("corrected_pf: dimension mismatch");
  Eigen::MatrixXd J = interleaved_J(dim);
  Eigen::MatrixXd JtL = J.transpose() * L;
  double rho = 0.0;
  {
    Eigen::EigenSolver<Eigen::MatrixXd> es(JtL, /*computeEigenvectors=*/false);
    rho = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  if (rho >= 1.0)
    throw Error("corrected_pf: spectral radius of J^T L is " +
                std::to_string(rho) + " >= 1");
  Eigen::VectorXd u(dim), v(dim);
  for (int i = 0; i < n; ++i) {
    u(2 * i) = ap(i);
    u(2 * i + 1) = a(i);
    v(2 * i) = b(i);
    v(2 * i + 1) = -bp(i);
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(dim, dim) - JtL;
  Eigen::VectorXd sol = M.partialPivLu().solve(u);
  CorrectedPf out;
  out.pf_base = pfaffian(J - L);
  out.correction = 1.0 - v.dot(sol);
  out.value = out.pf_base * out.correction;
  out.rho = rho;
  return out;
}

}  // namespace lab
