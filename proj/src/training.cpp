#include "esm/training.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

// Training solves, in alternation:
//
//   min  C1*sum_P beta_ij + C2*(sum_+ nu_i + sum_- nu_j)
//        + C3*tr(F^{-1}) + C4*||S~||_F^2
//   s.t. lift(x_ij)  - 1 <= beta_ij        x_ij = a_ij*x_i+ + (1-a_ij)*x_j-
//        1 - lift(x_i+)  <= nu_i+
//        1 - lift(x_j-)  <= nu_j-
//        beta, nu >= 0,  a in [0,1],  lambda_min(S~) >= eig_floor
//
// with lift(x) = (1,x)^T S~ (1,x). For fixed alpha the problem in S~ is
// convex; it is attacked through its Lagrangian dual: relaxing the three
// constraint families with multipliers (lambda, mu, xi) makes the slack
// blocks separable box problems and leaves a small spectral subproblem
//   min <A, S~> + C3*tr(F^{-1}) + C4*||S~||_F^2
// over the floored PSD cone, where A weights the lifted outer products by
// the multipliers. The dual is maximized by projected subgradient steps
// with a diminishing step size; the best dual iterate wins. For fixed S~
// each alpha minimizes its own scalar convex quadratic in closed form.

namespace esm {

namespace {

constexpr double kArmijoSlope = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr int kFixSAlternations = 50;

double pd_tolerance(const Hyperparams& hp) {
  return std::min(kTolPd, 0.5 * hp.eig_floor);
}

Eigen::VectorXd lift_point(const Eigen::VectorXd& x) {
  Eigen::VectorXd xt(x.size() + 1);
  xt(0) = 1.0;
  xt.tail(x.size()) = x;
  return xt;
}

// Feasible-set projection: PSD floor, optionally intersected with the
// affine slice s = 1 by alternating projections.
SymMat project_feasible(const SymMat& m, const Hyperparams& hp) {
  if (!hp.fix_s) return project_psd(m, hp.eig_floor);
  SymMat cur = m;
  for (int it = 0; it < kFixSAlternations; ++it) {
    cur = project_psd(cur, hp.eig_floor);
    Eigen::MatrixXd pinned = cur.mat();
    pinned(0, 0) = 1.0;
    cur = SymMat(std::move(pinned));
  }
  return cur;
}

// Projected gradient with Armijo backtracking along the projection arc.
// Works for subgradients too: a failed line search (no decrease at any step
// size) terminates with the incumbent, so the iterates never go uphill.
InnerSolveResult projected_gradient(
    const std::function<double(const SymMat&)>& value,
    const std::function<SymMat(const SymMat&)>& grad, const SymMat& start,
    const Hyperparams& hp) {
  InnerSolveResult res;
  res.converged = false;
  SymMat cur = project_feasible(start, hp);
  double f_cur = value(cur);
  SymMat g = grad(cur);
  double step = 1.0 / (1.0 + std::sqrt(frob_sq(g)));
  int it = 0;
  while (it < hp.pg_max_it) {
    ++it;
    double t = step * 2.0;
    bool accepted = false;
    SymMat trial;
    double f_trial = 0.0;
    for (int ls = 0; ls < kMaxBacktracks; ++ls) {
      trial = project_feasible(SymMat(cur.mat() - t * g.mat()), hp);
      f_trial = value(trial);
      const double slope =
          ((trial.mat() - cur.mat()).array() * g.mat().array()).sum();
      if (f_trial <= f_cur + kArmijoSlope * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no descent at any step size: stalled minimum
      break;
    }
    const double change = std::abs(f_cur - f_trial);
    cur = std::move(trial);
    f_cur = f_trial;
    step = t;
    if (change <= hp.pg_tol * (1.0 + std::abs(f_cur))) {
      res.converged = true;
      break;
    }
    g = grad(cur);
  }
  res.lifted = std::move(cur);
  res.objective = f_cur;
  res.iterations = it;
  return res;
}

// Gradient contribution of c3*tr(F^{-1}) embedded into the lifted frame.
Eigen::MatrixXd embedded_trace_grad(const SymMat& lifted, double c3,
                                    double tol_pd) {
  const Eigen::Index n = lifted.dim() - 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const SymMat g = grad_trace_inverse(lifted.block(1, n), tol_pd);
  out.bottomRightCorner(n, n) = c3 * g.mat();
  return out;
}

}  // namespace

void validate(const Hyperparams& hp) {
  const bool weights_ok =
      hp.c1 > 0.0 && hp.c2 > 0.0 && hp.c3 > 0.0 && hp.c4 > 0.0;
  if (!weights_ok) throw Error("hyperparams: objective weights must be > 0");
  if (!(hp.eps_gs > 0.0)) throw Error("hyperparams: eps_gs must be > 0");
  if (hp.r_inner < 1) throw Error("hyperparams: r_inner must be >= 1");
  if (hp.max_outer < 1) throw Error("hyperparams: max_outer must be >= 1");
  if (hp.max_bundle_it < 1)
    throw Error("hyperparams: max_bundle_it must be >= 1");
  if (!(hp.eps_cls > 0.0 && hp.eps_cls <= 1.0))
    throw Error("hyperparams: eps_cls must be in (0, 1]");
  if (!(hp.pg_tol > 0.0)) throw Error("hyperparams: pg_tol must be > 0");
  if (hp.pg_max_it < 1) throw Error("hyperparams: pg_max_it must be >= 1");
  if (!(hp.eig_floor > 0.0)) throw Error("hyperparams: eig_floor must be > 0");
  if (hp.max_pairs < 0) throw Error("hyperparams: max_pairs must be >= 0");
}

Eigen::VectorXd PairSet::pair_point(std::size_t k) const {
  const auto [i, j] = pairs[k];
  const double a = alpha(static_cast<Eigen::Index>(k));
  return a * plus_pts.col(i) + (1.0 - a) * minus_pts.col(j);
}

PairSet build_pairs(const std::vector<Eigen::VectorXd>& xp,
                    const std::vector<Eigen::VectorXd>& xm, long max_pairs) {
  if (xp.empty() || xm.empty()) {
    throw EmptyClass("build_pairs: both classes must be nonempty");
  }
  const Eigen::Index n = xp.front().size();
  PairSet ps;
  ps.plus_pts.resize(n, static_cast<Eigen::Index>(xp.size()));
  ps.minus_pts.resize(n, static_cast<Eigen::Index>(xm.size()));
  for (std::size_t i = 0; i < xp.size(); ++i) {
    if (xp[i].size() != n)
      throw DimensionMismatch("build_pairs: inconsistent point dimension");
    ps.plus_pts.col(static_cast<Eigen::Index>(i)) = xp[i];
  }
  for (std::size_t j = 0; j < xm.size(); ++j) {
    if (xm[j].size() != n)
      throw DimensionMismatch("build_pairs: inconsistent point dimension");
    ps.minus_pts.col(static_cast<Eigen::Index>(j)) = xm[j];
  }
  const long np = static_cast<long>(xp.size());
  const long nm = static_cast<long>(xm.size());
  const long total = np * nm;
  long stride = 1;
  if (max_pairs > 0 && total > max_pairs) {
    stride = (total + max_pairs - 1) / max_pairs;
  }
  for (long idx = 0; idx < total; idx += stride) {
    ps.pairs.emplace_back(static_cast<int>(idx / nm),
                          static_cast<int>(idx % nm));
  }
  ps.alpha = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(ps.pairs.size()), 0.5);
  return ps;
}

Multipliers Multipliers::zeros(Eigen::Index n_pairs, Eigen::Index n_plus,
                               Eigen::Index n_minus) {
  return Multipliers{Eigen::VectorXd::Zero(n_pairs),
                     Eigen::VectorXd::Zero(n_plus),
                     Eigen::VectorXd::Zero(n_minus)};
}

SlackBounds compute_bounds(const PairSet& ps) {
  SlackBounds b;
  const Eigen::Index n_pairs = static_cast<Eigen::Index>(ps.pairs.size());
  // Lifted midpoint norms at the alpha = 1/2 initialization.
  Eigen::VectorXd mid_sq(n_pairs);
  for (Eigen::Index k = 0; k < n_pairs; ++k) {
    const auto [i, j] = ps.pairs[static_cast<std::size_t>(k)];
    const Eigen::VectorXd mid =
        0.5 * (ps.plus_pts.col(i) + ps.minus_pts.col(j));
    mid_sq(k) = 1.0 + mid.squaredNorm();
  }
  const double r_sq = mid_sq.minCoeff();
  b.inner_radius = std::sqrt(r_sq);
  Eigen::VectorXd plus_sq(ps.n_plus()), minus_sq(ps.n_minus());
  for (Eigen::Index i = 0; i < ps.n_plus(); ++i) {
    plus_sq(i) = 1.0 + ps.plus_pts.col(i).squaredNorm();
  }
  for (Eigen::Index j = 0; j < ps.n_minus(); ++j) {
    minus_sq(j) = 1.0 + ps.minus_pts.col(j).squaredNorm();
  }
  const double big_r_sq = std::max(plus_sq.maxCoeff(), minus_sq.maxCoeff());
  b.outer_radius = std::sqrt(big_r_sq);
  b.beta_cap = (mid_sq.array() - r_sq).max(0.0);
  b.nu_plus_cap = (big_r_sq - plus_sq.array()).max(0.0);
  b.nu_minus_cap = (big_r_sq - minus_sq.array()).max(0.0);
  return b;
}

SlackValues relaxed_slack_step(const Multipliers& mult,
                               const SlackBounds& bounds,
                               const Hyperparams& hp) {
  SlackValues s;
  const auto box_min = [](const Eigen::VectorXd& coeff,
                          const Eigen::VectorXd& cap) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(coeff.size());
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
      if (coeff(k) < 0.0) out(k) = cap(k);  // ties stay at 0
    }
    return out;
  };
  s.beta = box_min(hp.c1 - mult.pair_mult.array(), bounds.beta_cap);
  s.nu_plus = box_min(hp.c2 - mult.plus_mult.array(), bounds.nu_plus_cap);
  s.nu_minus = box_min(hp.c2 - mult.minus_mult.array(), bounds.nu_minus_cap);
  return s;
}

SymMat weighted_data_matrix(const PairSet& ps, const Multipliers& mult) {
  const Eigen::Index n = ps.dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (std::size_t k = 0; k < ps.pairs.size(); ++k) {
    const double w = mult.pair_mult(static_cast<Eigen::Index>(k));
    if (w == 0.0) continue;
    const Eigen::VectorXd xt = lift_point(ps.pair_point(k));
    acc.noalias() += w * (xt * xt.transpose());
  }
  for (Eigen::Index i = 0; i < ps.n_plus(); ++i) {
    const double w = mult.plus_mult(i);
    if (w == 0.0) continue;
    const Eigen::VectorXd xt = lift_point(ps.plus_pts.col(i));
    acc.noalias() -= w * (xt * xt.transpose());
  }
  for (Eigen::Index j = 0; j < ps.n_minus(); ++j) {
    const double w = mult.minus_mult(j);
    if (w == 0.0) continue;
    const Eigen::VectorXd xt = lift_point(ps.minus_pts.col(j));
    acc.noalias() -= w * (xt * xt.transpose());
  }
  return SymMat(std::move(acc));
}

InnerSolveResult inner_sdp_solve(const SymMat& a, const Hyperparams& hp,
                                 const SymMat* warm) {
  const Eigen::Index dim = a.dim();
  const Eigen::Index n = dim - 1;
  const double tol_pd = pd_tolerance(hp);
  const auto value = [&](const SymMat& m) {
    return (a.mat().array() * m.mat().array()).sum() +
           hp.c3 * trace_inverse(m.block(1, n), tol_pd) +
           hp.c4 * frob_sq(m);
  };
  const auto grad = [&](const SymMat& m) {
    Eigen::MatrixXd g = a.mat() + embedded_trace_grad(m, hp.c3, tol_pd) +
                        2.0 * hp.c4 * m.mat();
    return SymMat(std::move(g));
  };
  const SymMat start = warm ? *warm : SymMat::identity(dim);
  return projected_gradient(value, grad, start, hp);
}

DualResiduals dual_violations(const SymMat& lifted, const PairSet& ps,
                              const SlackValues& slacks) {
  DualResiduals g;
  const Eigen::Index n_pairs = static_cast<Eigen::Index>(ps.pairs.size());
  g.pair_res.resize(n_pairs);
  for (Eigen::Index k = 0; k < n_pairs; ++k) {
    g.pair_res(k) =
        lift_value(lifted, ps.pair_point(static_cast<std::size_t>(k))) - 1.0 -
        slacks.beta(k);
  }
  g.plus_res.resize(ps.n_plus());
  for (Eigen::Index i = 0; i < ps.n_plus(); ++i) {
    g.plus_res(i) =
        1.0 - lift_value(lifted, ps.plus_pts.col(i)) - slacks.nu_plus(i);
  }
  g.minus_res.resize(ps.n_minus());
  for (Eigen::Index j = 0; j < ps.n_minus(); ++j) {
    g.minus_res(j) =
        1.0 - lift_value(lifted, ps.minus_pts.col(j)) - slacks.nu_minus(j);
  }
  return g;
}

void alpha_step(const HomEllipsoid& e, PairSet& ps) {
  if (e.dim() != ps.dim()) {
    throw DimensionMismatch("alpha_step: ellipsoid/pair dimension mismatch");
  }
  const auto& m = e.lifted().mat();
  const Eigen::Index n = ps.dim();
  const auto t = m.col(0).tail(n);
  const auto f = m.bottomRightCorner(n, n);
  for (std::size_t k = 0; k < ps.pairs.size(); ++k) {
    const auto [i, j] = ps.pairs[k];
    const Eigen::VectorXd v = ps.plus_pts.col(i) - ps.minus_pts.col(j);
    const double a = v.dot(f * v);
    const double b = t.dot(v) + v.dot(f * ps.minus_pts.col(j));
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    if (a > 0.0) {
      ps.alpha(kk) = std::clamp(-b / a, 0.0, 1.0);
    } else if (b > 0.0) {
      ps.alpha(kk) = 0.0;
    } else if (b < 0.0) {
      ps.alpha(kk) = 1.0;
    }
    // zero curvature and zero slope: keep the previous alpha
  }
}

double primal_objective(const SymMat& lifted, const PairSet& ps,
                        const Hyperparams& hp) {
  const Eigen::Index n = ps.dim();
  double pair_cost = 0.0;
  for (std::size_t k = 0; k < ps.pairs.size(); ++k) {
    pair_cost += std::max(0.0, lift_value(lifted, ps.pair_point(k)) - 1.0);
  }
  double point_cost = 0.0;
  for (Eigen::Index i = 0; i < ps.n_plus(); ++i) {
    point_cost += std::max(0.0, 1.0 - lift_value(lifted, ps.plus_pts.col(i)));
  }
  for (Eigen::Index j = 0; j < ps.n_minus(); ++j) {
    point_cost += std::max(0.0, 1.0 - lift_value(lifted, ps.minus_pts.col(j)));
  }
  return hp.c1 * pair_cost + hp.c2 * point_cost +
         hp.c3 * trace_inverse(lifted.block(1, n), pd_tolerance(hp)) +
         hp.c4 * frob_sq(lifted);
}

double primal_objective(const HomEllipsoid& e, const PairSet& ps,
                        const Hyperparams& hp) {
  return primal_objective(e.lifted(), ps, hp);
}

SdpStepResult sdp_step(const PairSet& ps, const SlackBounds& bounds,
                       const Hyperparams& hp, const Multipliers* warm_mult,
                       const SymMat* warm_lifted) {
  const Eigen::Index n_pairs = static_cast<Eigen::Index>(ps.pairs.size());
  Multipliers mult = warm_mult ? *warm_mult
                               : Multipliers::zeros(n_pairs, ps.n_plus(),
                                                    ps.n_minus());
  std::optional<SymMat> cur;
  if (warm_lifted) cur = *warm_lifted;

  SdpStepResult out;
  out.best_dual = -std::numeric_limits<double>::infinity();
  Multipliers best_mult = mult;
  std::optional<SymMat> best_lifted;
  double step_scale = 0.0;

  for (int k = 1; k <= hp.max_bundle_it; ++k) {
    const SlackValues slacks = relaxed_slack_step(mult, bounds, hp);
    const SymMat a = weighted_data_matrix(ps, mult);
    const InnerSolveResult inner =
        inner_sdp_solve(a, hp, cur ? &*cur : nullptr);
    if (!inner.converged) ++out.nonconvergence_count;
    cur = inner.lifted;

    // Dual value: spectral part + box slack costs + multiplier constants.
    double dual = inner.objective;
    dual += ((hp.c1 - mult.pair_mult.array()) * slacks.beta.array()).sum();
    dual +=
        ((hp.c2 - mult.plus_mult.array()) * slacks.nu_plus.array()).sum();
    dual +=
        ((hp.c2 - mult.minus_mult.array()) * slacks.nu_minus.array()).sum();
    dual += -mult.pair_mult.sum() + mult.plus_mult.sum() +
            mult.minus_mult.sum();
    if (dual > out.best_dual) {
      out.best_dual = dual;
      best_lifted = *cur;
      best_mult = mult;
    }

    const DualResiduals g = dual_violations(*cur, ps, slacks);
    const double g_norm =
        std::sqrt(g.pair_res.squaredNorm() + g.plus_res.squaredNorm() +
                  g.minus_res.squaredNorm());
    if (k == 1) step_scale = 1.0 / (1.0 + g_norm);
    const double step = step_scale / std::sqrt(static_cast<double>(k));
    mult.pair_mult = (mult.pair_mult + step * g.pair_res).cwiseMax(0.0);
    mult.plus_mult = (mult.plus_mult + step * g.plus_res).cwiseMax(0.0);
    mult.minus_mult = (mult.minus_mult + step * g.minus_res).cwiseMax(0.0);
  }

  out.lifted = *best_lifted;
  out.mult = std::move(best_mult);
  out.phi_star = primal_objective(out.lifted, ps, hp);
  return out;
}

InnerSolveResult exact_primal_solve(const PairSet& ps, const Hyperparams& hp,
                                    const SymMat* warm) {
  const Eigen::Index n = ps.dim();
  const double tol_pd = pd_tolerance(hp);
  const auto value = [&](const SymMat& m) {
    return primal_objective(m, ps, hp);
  };
  // Subgradient of the hinge sums; kinks contribute nothing.
  const auto grad = [&](const SymMat& m) {
    Eigen::MatrixXd g =
        embedded_trace_grad(m, hp.c3, tol_pd) + 2.0 * hp.c4 * m.mat();
    for (std::size_t k = 0; k < ps.pairs.size(); ++k) {
      const Eigen::VectorXd xt = lift_point(ps.pair_point(k));
      if (lift_value(m, ps.pair_point(k)) > 1.0) {
        g.noalias() += hp.c1 * (xt * xt.transpose());
      }
    }
    for (Eigen::Index i = 0; i < ps.n_plus(); ++i) {
      if (lift_value(m, ps.plus_pts.col(i)) < 1.0) {
        const Eigen::VectorXd xt = lift_point(ps.plus_pts.col(i));
        g.noalias() -= hp.c2 * (xt * xt.transpose());
      }
    }
    for (Eigen::Index j = 0; j < ps.n_minus(); ++j) {
      if (lift_value(m, ps.minus_pts.col(j)) < 1.0) {
        const Eigen::VectorXd xt = lift_point(ps.minus_pts.col(j));
        g.noalias() -= hp.c2 * (xt * xt.transpose());
      }
    }
    return SymMat(std::move(g));
  };
  const SymMat start = warm ? *warm : SymMat::identity(n + 1);
  return projected_gradient(value, grad, start, hp);
}

FitResult fit(const std::vector<Eigen::VectorXd>& xp,
              const std::vector<Eigen::VectorXd>& xm, const Hyperparams& hp) {
  validate(hp);
  PairSet ps = build_pairs(xp, xm, hp.max_pairs);
  const SlackBounds bounds = compute_bounds(ps);

  FitResult res;
  Multipliers mult = Multipliers::zeros(
      static_cast<Eigen::Index>(ps.pairs.size()), ps.n_plus(), ps.n_minus());
  std::optional<SymMat> lifted;

  const auto solve_subproblem = [&]() -> double {
    double phi = 0.0;
    if (hp.exact_inner) {
      const InnerSolveResult inner =
          exact_primal_solve(ps, hp, lifted ? &*lifted : nullptr);
      if (!inner.converged) ++res.nonconvergence_warnings;
      lifted = inner.lifted;
      phi = inner.objective;
      res.dual_values.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      const SdpStepResult step =
          sdp_step(ps, bounds, hp, &mult, lifted ? &*lifted : nullptr);
      res.nonconvergence_warnings += step.nonconvergence_count;
      lifted = step.lifted;
      mult = step.mult;
      phi = step.phi_star;
      res.dual_values.push_back(step.best_dual);
    }
    res.phi_steps.push_back(phi);
    return phi;
  };

  double phi_star = solve_subproblem();
  res.outer_phi.push_back(phi_star);
  double phi_bar = std::numeric_limits<double>::infinity();
  while (std::abs(phi_star - phi_bar) >
         hp.eps_gs * (1.0 + std::abs(phi_bar))) {
    if (res.outer_iterations >= hp.max_outer) break;
    phi_bar = phi_star;
    for (int i = 0; i < hp.r_inner; ++i) {
      alpha_step(HomEllipsoid(*lifted), ps);
      phi_star = solve_subproblem();
    }
    res.outer_phi.push_back(phi_star);
    ++res.outer_iterations;
  }
  res.converged = std::abs(phi_star - phi_bar) <=
                  hp.eps_gs * (1.0 + std::abs(phi_bar));

  const CenteredEllipsoid ellipsoid =
      to_centered(HomEllipsoid(*lifted), pd_tolerance(hp));
  auto [xbar_plus, xbar_minus, degenerate] = reduce_sets(ellipsoid, xp, xm);
  res.model = TrainedModel{ellipsoid, std::move(xbar_plus),
                           std::move(xbar_minus), hp.eps_cls, degenerate};
  return res;
}

}  // namespace esm
