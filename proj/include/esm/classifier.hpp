#pragma once

#include <Eigen/Core>
#include <tuple>
#include <vector>

#include "esm/ellipsoid.hpp"

namespace esm {

enum class Label { Plus, Minus, Rejected };

// +1 / -1 / 0 encoding used by files and reports.
int label_to_int(Label l);

// A trained separator: the ellipsoid plus the reduced training sets (the
// points left outside the ellipsoid). When one reduced set is empty the
// model is degenerate and rejects every query.
struct TrainedModel {
  CenteredEllipsoid ellipsoid;
  std::vector<Eigen::VectorXd> xbar_plus;
  std::vector<Eigen::VectorXd> xbar_minus;
  double eps_cls = 0.5;
  bool degenerate = false;
};

struct ClassScores {
  long n_plus = 0;      // reduced plus-points separated from z
  long n_minus = 0;     // reduced minus-points separated from z
  double r_plus = 0.0;  // n_minus/|Xbar-| - n_plus/|Xbar+|, in [-1, 1]
  double r_minus = 0.0; // exactly -r_plus
};

// Drops every training point the ellipsoid contains; the flag is set when
// either side ends up empty.
std::tuple<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>, bool>
reduce_sets(const CenteredEllipsoid& c,
            const std::vector<Eigen::VectorXd>& xp,
            const std::vector<Eigen::VectorXd>& xm);

// Counts of reduced points whose segment to z meets the ellipsoid.
// Throws DegenerateModel when the model is degenerate.
ClassScores separation_counts(const TrainedModel& m, const Eigen::VectorXd& z);

// Normalized separation difference from the counts; r_minus is the exact
// negation of r_plus. Throws DegenerateModel on a zero-size set.
std::pair<double, double> rejection_scores(long n_plus, long n_minus,
                                           std::size_t size_plus,
                                           std::size_t size_minus);

// Plus if r_plus >= eps_cls, Minus if r_minus >= eps_cls, else Rejected.
// Degenerate models reject everything.
Label predict(const TrainedModel& m, const Eigen::VectorXd& z);

// Elementwise predict, order preserved; may fan out over `jobs` threads.
std::vector<Label> predict_batch(const TrainedModel& m,
                                 const std::vector<Eigen::VectorXd>& zs,
                                 int jobs = 1);

}  // namespace esm
