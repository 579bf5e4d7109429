#include "esm/ellipsoid.hpp"

#include <algorithm>
#include <cmath>

namespace esm {

HomEllipsoid::HomEllipsoid(SymMat lifted) : lifted_(std::move(lifted)) {
  if (lifted_.dim() < 2) {
    throw DimensionMismatch("HomEllipsoid: lifted matrix must be at least 2x2");
  }
}

Eigen::VectorXd HomEllipsoid::t() const {
  return lifted_.mat().col(0).tail(dim());
}

SymMat HomEllipsoid::shape_block() const { return lifted_.block(1, dim()); }

double lift_value(const SymMat& lifted, const Eigen::VectorXd& x) {
  const Eigen::Index n = lifted.dim() - 1;
  if (x.size() != n) {
    throw DimensionMismatch("lift_value: point dimension mismatch");
  }
  const auto& m = lifted.mat();
  const double s = m(0, 0);
  const auto t = m.col(0).tail(n);
  const auto f = m.bottomRightCorner(n, n);
  return s + 2.0 * t.dot(x) + x.dot(f * x);
}

double lift_value(const HomEllipsoid& e, const Eigen::VectorXd& x) {
  return lift_value(e.lifted(), x);
}

CenteredEllipsoid to_centered(const HomEllipsoid& e, double tol_pd,
                              double tol_empty) {
  const SymMat f = e.shape_block();
  const Eigen::VectorXd t = e.t();
  Eigen::VectorXd gamma;
  try {
    gamma = -solve_spd(f, t, tol_pd);
  } catch (const SingularMatrix&) {
    throw SingularMatrix("to_centered: F block not positive definite");
  }
  double delta = e.s() - gamma.dot(f.mat() * gamma);
  if (delta >= 1.0 - tol_empty) {
    throw EmptyEllipsoid("to_centered: lifting offset >= 1, level-1 set empty");
  }
  delta = std::max(delta, 0.0);  // Schur complement, up to roundoff
  SymMat shape(Eigen::MatrixXd(f.mat() / (1.0 - delta)));
  return CenteredEllipsoid{std::move(shape), std::move(gamma), delta};
}

HomEllipsoid from_centered(const SymMat& shape, const Eigen::VectorXd& center,
                           double tol_pd) {
  if (center.size() != shape.dim()) {
    throw DimensionMismatch("from_centered: center dimension mismatch");
  }
  if (lambda_min(shape) <= tol_pd) {
    throw SingularMatrix("from_centered: shape matrix not positive definite");
  }
  constexpr double kDeltaRepr = 0.5;
  const Eigen::Index n = shape.dim();
  const Eigen::MatrixXd f = (1.0 - kDeltaRepr) * shape.mat();
  const Eigen::VectorXd t = -(f * center);
  Eigen::MatrixXd lifted(n + 1, n + 1);
  lifted(0, 0) = kDeltaRepr + center.dot(f * center);
  lifted.row(0).tail(n) = t.transpose();
  lifted.col(0).tail(n) = t;
  lifted.bottomRightCorner(n, n) = f;
  return HomEllipsoid(SymMat(std::move(lifted)));
}

bool contains(const CenteredEllipsoid& c, const Eigen::VectorXd& x,
              double tol_mem) {
  const Eigen::VectorXd d = x - c.center;
  return quad_form(c.shape, d) <= 1.0 + tol_mem;
}

SegmentMin segment_min_value(const CenteredEllipsoid& c,
                             const Eigen::VectorXd& z,
                             const Eigen::VectorXd& x) {
  if (z.size() != c.center.size() || x.size() != c.center.size()) {
    throw DimensionMismatch("segment_min_value: point dimension mismatch");
  }
  // g(alpha) = a*alpha^2 + 2*b*alpha + c0 with u = z - gamma, v = x - z.
  const Eigen::VectorXd u = z - c.center;
  const Eigen::VectorXd v = x - z;
  const Eigen::VectorXd su = c.shape.mat() * u;
  const double a = v.dot(c.shape.mat() * v);
  const double b = v.dot(su);
  const double c0 = u.dot(su);
  const auto value_at = [&](double alpha) {
    return (a * alpha + 2.0 * b) * alpha + c0;
  };
  SegmentMin out;
  if (a > 0.0) {
    out.alpha = std::clamp(-b / a, 0.0, 1.0);
  } else {
    // Degenerate direction: g is (at most) linear; tie prefers alpha = 0.
    out.alpha = (b < 0.0) ? 1.0 : 0.0;
  }
  out.qmin = value_at(out.alpha);
  return out;
}

bool segment_intersects(const CenteredEllipsoid& c, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& x, double tol_mem) {
  return segment_min_value(c, z, x).qmin <= 1.0 + tol_mem;
}

}  // namespace esm
