#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lab/specfun.hpp"

namespace lab {

struct Quad {
  std::vector<double> x, w;
  int size() const { return int(x.size()); }
};

// Gauss-Legendre nodes and weights on [a,b], Newton iteration on the Legendre
// recurrence
Quad gl_nodes(int n, double a, double b);

// composite GL: panel boundaries b0 < b1 < ... < bk, per_panel nodes each
Quad gl_composite(const std::vector<double>& bounds, int per_panel);

// graded half-line grid on [s, s + span]: panel widths grow geometrically
Quad halfline_grid(double s, double span, int panels, int per_panel);

// det(1 - K), dense LU
double fredholm_det(const Eigen::MatrixXd& K);

// det(1 - K) through the exterior-power series: eigenvalues of K, elementary
// symmetric functions by Newton's identities, partial sum over `terms` orders
double fredholm_det_series(const Eigen::MatrixXd& K, int terms);

// pfaffian of an even-dimensional skew-symmetric matrix, Parlett-Reid
// elimination with row/column pivoting
double pfaffian(Eigen::MatrixXd A);

// Pf(J - B) where B is a 2n x 2n skew matrix in interleaved point order
// (rows 2i, 2i+1 belong to point i) and J is block diagonal [[0,1],[-1,0]]
double fredholm_pf(const Eigen::MatrixXd& B);

// Pf[J - (L + R)] = Pf[J - L] * (1 - <(b,-b') | (1 - J^T L)^{-1} | (a',a)>)
// for a rank-2 skew R generated by scalar functions a, b. Inputs are the
// sqrt-weight-scaled node samples; L is the interleaved kernel matrix.
// Fails if the spectral radius of J^T L reaches 1.
struct CorrectedPf {
  double pf_base;
  double correction;
  double value;
  double rho;
};
CorrectedPf corrected_pf(const Eigen::MatrixXd& L, const Eigen::VectorXd& a,
                         const Eigen::VectorXd& ap, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& bp);

}  // namespace lab
