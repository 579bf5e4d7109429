#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "esm/classifier.hpp"
#include "esm/ellipsoid.hpp"

namespace esm {

struct Hyperparams {
  // Objective weights: pair slack, point slack, trace of F^{-1}, Frobenius
  // regularizer. All must be positive.
  double c1 = 0.01;
  double c2 = 0.1;
  double c3 = 0.1;
  double c4 = 10.0;

  // Outer alternation: relative stop tolerance and inner repetition count.
  double eps_gs = 0.1;
  int r_inner = 2;
  int max_outer = 50;

  // Dual ascent iteration cap per subproblem solve.
  int max_bundle_it = 30;

  // Classification threshold carried into the trained model.
  double eps_cls = 0.5;

  // Projected-gradient inner solver.
  double pg_tol = 1e-8;
  int pg_max_it = 2000;
  double eig_floor = 1e-8;

  // Pin the top-left lifted entry to 1 (alternating projection mode).
  bool fix_s = false;

  // Replace the dual ascent by a direct projected-(sub)gradient minimization
  // of the primal objective; used for validating descent behavior.
  bool exact_inner = false;

  // Optional cap on the number of point pairs (0 = off); pairs beyond the
  // cap are dropped by deterministic stride subsampling.
  long max_pairs = 0;
};

void validate(const Hyperparams& hp);

// All (plus, minus) index pairs with their interpolation coefficients.
struct PairSet {
  Eigen::MatrixXd plus_pts;   // n x n_plus, one point per column
  Eigen::MatrixXd minus_pts;  // n x n_minus
  std::vector<std::pair<int, int>> pairs;
  Eigen::VectorXd alpha;      // per pair, in [0, 1]

  Eigen::Index dim() const { return plus_pts.rows(); }
  Eigen::Index n_plus() const { return plus_pts.cols(); }
  Eigen::Index n_minus() const { return minus_pts.cols(); }
  // alpha*x_plus + (1-alpha)*x_minus for pair k.
  Eigen::VectorXd pair_point(std::size_t k) const;
};

PairSet build_pairs(const std::vector<Eigen::VectorXd>& xp,
                    const std::vector<Eigen::VectorXd>& xm,
                    long max_pairs = 0);

// Nonnegative dual multipliers: one per pair, per plus-point, per
// minus-point.
struct Multipliers {
  Eigen::VectorXd pair_mult;
  Eigen::VectorXd plus_mult;
  Eigen::VectorXd minus_mult;

  static Multipliers zeros(Eigen::Index n_pairs, Eigen::Index n_plus,
                           Eigen::Index n_minus);
};

// Box caps keeping the relaxed slack subproblems bounded, built from the
// smallest/largest lifted-point radii (leading 1 included in the norms).
struct SlackBounds {
  Eigen::VectorXd beta_cap;      // per pair
  Eigen::VectorXd nu_plus_cap;   // per plus-point
  Eigen::VectorXd nu_minus_cap;  // per minus-point
  double inner_radius = 0.0;     // min lifted midpoint norm
  double outer_radius = 0.0;     // max lifted data-point norm
};

// Evaluated once at the alpha = 1/2 initialization; not refreshed when
// alpha moves.
SlackBounds compute_bounds(const PairSet& ps);

struct SlackValues {
  Eigen::VectorXd beta;
  Eigen::VectorXd nu_plus;
  Eigen::VectorXd nu_minus;
};

// Closed-form box minimization of the relaxed slack terms: each entry sits
// at 0 when its cost coefficient is positive (or zero), at its cap when
// negative.
SlackValues relaxed_slack_step(const Multipliers& mult,
                               const SlackBounds& bounds,
                               const Hyperparams& hp);

// A = sum_P lambda_ij xt_ij xt_ij^T - sum_+ mu_i xt_i xt_i^T
//     - sum_- xi_j xt_j xt_j^T, so <A, S~> collects every lifted quadratic
// term of the relaxed objective.
SymMat weighted_data_matrix(const PairSet& ps, const Multipliers& mult);

struct InnerSolveResult {
  SymMat lifted;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

// Projected gradient with Armijo backtracking for
//   min <A, S~> + c3*tr(F^{-1}) + c4*||S~||_F^2   over  lambda_min(S~) >= floor
// where F is the lower-right block. Warm start when given, else identity.
InnerSolveResult inner_sdp_solve(const SymMat& a, const Hyperparams& hp,
                                 const SymMat* warm = nullptr);

// Residuals of the relaxed constraints at the current inner minimizers;
// positive entries are violations and form the dual ascent direction.
struct DualResiduals {
  Eigen::VectorXd pair_res;   // lift(x_ij) - 1 - beta_ij
  Eigen::VectorXd plus_res;   // 1 - lift(x_i+) - nu_i+
  Eigen::VectorXd minus_res;  // 1 - lift(x_j-) - nu_j-
};

DualResiduals dual_violations(const SymMat& lifted, const PairSet& ps,
                              const SlackValues& slacks);

// Per-pair exact minimization of the lifted quadratic over alpha in [0, 1];
// zero-curvature/zero-slope ties keep the previous alpha.
void alpha_step(const HomEllipsoid& e, PairSet& ps);

// Value of the alpha-fixed subproblem at the given S~, with slacks at their
// minimal feasible values.
double primal_objective(const SymMat& lifted, const PairSet& ps,
                        const Hyperparams& hp);
double primal_objective(const HomEllipsoid& e, const PairSet& ps,
                        const Hyperparams& hp);

struct SdpStepResult {
  SymMat lifted;            // iterate attaining the best dual value
  double phi_star = 0.0;    // primal_objective at that iterate
  double best_dual = 0.0;
  Multipliers mult;         // multipliers at the best dual value
  int nonconvergence_count = 0;
};

// Projected subgradient ascent on the Lagrangian dual with diminishing
// steps; runs exactly hp.max_bundle_it iterations.
SdpStepResult sdp_step(const PairSet& ps, const SlackBounds& bounds,
                       const Hyperparams& hp,
                       const Multipliers* warm_mult = nullptr,
                       const SymMat* warm_lifted = nullptr);

// Direct projected-subgradient minimization of primal_objective over the
// floored PSD cone (the exact-solve mode; no relaxation involved).
InnerSolveResult exact_primal_solve(const PairSet& ps, const Hyperparams& hp,
                                    const SymMat* warm = nullptr);

struct FitResult {
  TrainedModel model;
  std::vector<double> phi_steps;       // phi* after every subproblem solve
  std::vector<double> dual_values;     // best dual per solve (NaN in exact mode)
  std::vector<double> outer_phi;       // phi* at each outer-loop checkpoint
  int outer_iterations = 0;
  bool converged = false;              // stop test met before the outer cap
  int nonconvergence_warnings = 0;     // inner solves that hit their cap
};

// The block alternation driver: alpha = 1/2, one subproblem solve, then
// r_inner alternations of (alpha step, subproblem solve) per outer round
// until the relative phi change falls under eps_gs.
FitResult fit(const std::vector<Eigen::VectorXd>& xp,
              const std::vector<Eigen::VectorXd>& xm, const Hyperparams& hp);

}  // namespace esm
