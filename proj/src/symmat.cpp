#include "esm/symmat.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace esm {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

void require_square_finite(const Eigen::MatrixXd& m, const char* op) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw InvalidMatrix(std::string(op) + ": matrix must be square, nonempty");
  }
  if (!all_finite(m)) {
    throw InvalidMatrix(std::string(op) + ": non-finite entries");
  }
}

}  // namespace

SymMat::SymMat(Eigen::MatrixXd m) : mat_(std::move(m)) {
  require_square_finite(mat_, "SymMat");
  // Mirror the upper triangle; the lower triangle is derived storage.
  const Eigen::Index n = mat_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      mat_(j, i) = mat_(i, j);
    }
  }
}

SymMat SymMat::identity(Eigen::Index n) {
  return SymMat(Eigen::MatrixXd::Identity(n, n));
}

SymMat SymMat::zero(Eigen::Index n) {
  return SymMat(Eigen::MatrixXd::Zero(n, n));
}

SymMat SymMat::block(Eigen::Index start, Eigen::Index size) const {
  return SymMat(mat_.block(start, start, size, size));
}

EigDecomp eig_sym(const SymMat& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw InvalidMatrix("eig_sym: eigensolver failed to converge");
  }
  EigDecomp eig{solver.eigenvalues(), solver.eigenvectors()};
  // Canonical sign: first nonzero component of each eigenvector positive.
  for (Eigen::Index c = 0; c < eig.vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < eig.vectors.rows(); ++r) {
      const double v = eig.vectors(r, c);
      if (v != 0.0) {
        if (v < 0.0) eig.vectors.col(c) = -eig.vectors.col(c);
        break;
      }
    }
  }
  return eig;
}

SymMat project_psd(const SymMat& m, double floor) {
  const EigDecomp eig = eig_sym(m);
  const Eigen::VectorXd clipped = eig.values.cwiseMax(floor);
  Eigen::MatrixXd out =
      (eig.vectors * clipped.asDiagonal()) * eig.vectors.transpose();
  return SymMat(std::move(out));  // constructor restores exact symmetry
}

double lambda_min(const SymMat& m) { return eig_sym(m).values(0); }

double trace_inverse(const SymMat& f, double tol_pd) {
  const EigDecomp eig = eig_sym(f);
  if (eig.values(0) <= tol_pd) {
    throw SingularMatrix("trace_inverse: matrix not positive definite");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    sum += 1.0 / eig.values(i);
  }
  return sum;
}

SymMat grad_trace_inverse(const SymMat& f, double tol_pd) {
  const EigDecomp eig = eig_sym(f);
  if (eig.values(0) <= tol_pd) {
    throw SingularMatrix("grad_trace_inverse: matrix not positive definite");
  }
  const Eigen::VectorXd w =
      -eig.values.array().square().inverse();  // -1/lambda^2
  Eigen::MatrixXd out =
      (eig.vectors * w.asDiagonal()) * eig.vectors.transpose();
  return SymMat(std::move(out));
}

double frob_sq(const SymMat& m) { return m.mat().squaredNorm(); }

double quad_form(const SymMat& m, const Eigen::VectorXd& x) {
  if (x.size() != m.dim()) {
    throw DimensionMismatch("quad_form: vector/matrix dimension mismatch");
  }
  return x.dot(m.mat() * x);
}

Eigen::VectorXd solve_spd(const SymMat& f, const Eigen::VectorXd& b,
                          double tol_pd) {
  if (b.size() != f.dim()) {
    throw DimensionMismatch("solve_spd: vector/matrix dimension mismatch");
  }
  const EigDecomp eig = eig_sym(f);
  if (eig.values(0) <= tol_pd) {
    throw SingularMatrix("solve_spd: matrix not positive definite");
  }
  return eig.vectors *
         (eig.values.array().inverse() *
          (eig.vectors.transpose() * b).array())
             .matrix();
}

}  // namespace esm
