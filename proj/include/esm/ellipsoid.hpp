#pragma once

#include <Eigen/Core>

#include "esm/symmat.hpp"

namespace esm {

// Membership tolerance: boundary points count as inside.
inline constexpr double kTolMembership = 1e-12;
// A lifting offset this close to 1 means the level-1 set has empty interior.
inline constexpr double kTolEmpty = 1e-9;

// Origin-centered quadratic form on R^{n+1} representing an n-dimensional
// ellipsoid through the lifting x -> (1, x). Partitioned as
//   [ s  t^T ]
//   [ t   F  ]
// with s scalar, t an n-vector and F the n x n shape block.
class HomEllipsoid {
 public:
  explicit HomEllipsoid(SymMat lifted);

  Eigen::Index dim() const { return lifted_.dim() - 1; }
  const SymMat& lifted() const { return lifted_; }

  double s() const { return lifted_(0, 0); }
  Eigen::VectorXd t() const;
  SymMat shape_block() const;  // F

 private:
  SymMat lifted_;
};

// The (S, gamma, delta) form: membership is (x-gamma)^T S (x-gamma) <= 1.
// delta is the lifting offset in [0, 1); it plays no role in prediction.
struct CenteredEllipsoid {
  SymMat shape;            // S, positive definite
  Eigen::VectorXd center;  // gamma
  double delta = 0.5;
};

// (1, x)^T S~ (1, x) = s + 2 x^T t + x^T F x.
double lift_value(const HomEllipsoid& e, const Eigen::VectorXd& x);
double lift_value(const SymMat& lifted, const Eigen::VectorXd& x);

// gamma = -F^{-1} t, delta = s - gamma^T F gamma, S = F / (1 - delta).
// Throws SingularMatrix when F is not positive definite and EmptyEllipsoid
// when delta >= 1 - tol_empty (level-1 set has empty interior).
CenteredEllipsoid to_centered(const HomEllipsoid& e, double tol_pd = kTolPd,
                              double tol_empty = kTolEmpty);

// Inverse map with the representation offset fixed at delta = 1/2:
// F = S/2, t = -F gamma, s = 1/2 + gamma^T F gamma.
HomEllipsoid from_centered(const SymMat& shape, const Eigen::VectorXd& center,
                           double tol_pd = kTolPd);

bool contains(const CenteredEllipsoid& c, const Eigen::VectorXd& x,
              double tol_mem = kTolMembership);

struct SegmentMin {
  double qmin = 0.0;  // min over alpha in [0,1] of the membership quadratic
  double alpha = 0.0; // its minimizer
};

// Minimum of g(alpha) = (p(alpha)-gamma)^T S (p(alpha)-gamma) over the
// segment p(alpha) = alpha*x + (1-alpha)*z, alpha in [0, 1]. g is a convex
// quadratic; a degenerate segment (z == x) reduces to membership of z.
SegmentMin segment_min_value(const CenteredEllipsoid& c,
                             const Eigen::VectorXd& z,
                             const Eigen::VectorXd& x);

bool segment_intersects(const CenteredEllipsoid& c, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& x,
                        double tol_mem = kTolMembership);

}  // namespace esm
