#pragma once

#include <Eigen/Core>

#include "esm/errors.hpp"

namespace esm {

// Spectral floor below which a matrix is treated as singular.
inline constexpr double kTolPd = 1e-12;

// Dense symmetric matrix. The upper triangle is authoritative: the
// constructor mirrors it onto the lower triangle, so entries(i,j) and
// entries(j,i) are always bit-identical and never drift apart under
// the spectral operations below.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(Eigen::MatrixXd m);

  static SymMat identity(Eigen::Index n);
  static SymMat zero(Eigen::Index n);

  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXd& mat() const { return mat_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }

  // Principal sub-block [start, start+size) on both axes.
  SymMat block(Eigen::Index start, Eigen::Index size) const;

 private:
  Eigen::MatrixXd mat_;
};

// Eigendecomposition with values sorted ascending and a canonical sign
// convention on the vectors (first nonzero component positive).
struct EigDecomp {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) <-> values(i)
};

EigDecomp eig_sym(const SymMat& m);

// Frobenius-nearest matrix whose eigenvalues are all >= floor
// (eigenvalue clipping in the eigenbasis of m).
SymMat project_psd(const SymMat& m, double floor);

// Smallest eigenvalue (convenience on top of eig_sym).
double lambda_min(const SymMat& m);

// tr(F^{-1}) = sum of reciprocal eigenvalues. Requires lambda_min(F) > tol_pd.
double trace_inverse(const SymMat& f, double tol_pd = kTolPd);

// Gradient of trace_inverse: -F^{-2}, computed spectrally.
SymMat grad_trace_inverse(const SymMat& f, double tol_pd = kTolPd);

// Squared Frobenius norm, sum over all entries.
double frob_sq(const SymMat& m);

// x^T M x.
double quad_form(const SymMat& m, const Eigen::VectorXd& x);

// Solve F y = b for positive definite F via the spectral factorization
// (V diag(1/w) V^T b); never Gaussian elimination, so symmetry of the
// surrounding computations stays exact.
Eigen::VectorXd solve_spd(const SymMat& f, const Eigen::VectorXd& b,
                          double tol_pd = kTolPd);

}  // namespace esm
