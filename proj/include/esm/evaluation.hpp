#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "esm/data_io.hpp"

namespace esm {

// The five rejection-aware metrics. ar = wc - rho*rej in fraction form;
// acc is undefined (acc_defined false, value NaN) when everything was
// rejected.
struct RejectionScores {
  double rho = 0.0;
  double ar = 0.0;
  double acc = 0.0;
  double wc = 0.0;
  double mc = 0.0;
  double rej = 0.0;
  bool acc_defined = true;
  long n_wc = 0;
  long n_mc = 0;
  long n_rej = 0;
  long n_total = 0;
};

// Raw outcome counts; rho-independent, so a single CV pass can be scored
// at any rejection cost afterwards.
struct ConfusionCounts {
  long n_wc = 0;
  long n_mc = 0;
  long n_rej = 0;
  long n_total = 0;
};

ConfusionCounts count_outcomes(const std::vector<int>& y_true,
                               const std::vector<Label>& y_pred);
RejectionScores scores_from_counts(const ConfusionCounts& c, double rho);

RejectionScores score(const std::vector<int>& y_true,
                      const std::vector<Label>& y_pred, double rho);

// Deterministic stratified fold assignment: per-class shuffle, then
// round-robin dealing. fold_of[i] in [0, k).
std::vector<int> make_stratified_folds(const Dataset& ds, int k,
                                       std::uint64_t seed);

struct CvResult {
  std::vector<ConfusionCounts> fold_counts;
  std::vector<RejectionScores> fold_scores;  // at the requested rho
  double mean_ar = 0.0;
  bool any_degenerate = false;
};

// Stratified k-fold cross-validation: fit on k-1 folds, score the held-out
// fold; degenerate fold models score with all-rejected semantics and the
// run continues.
CvResult kfold_cv(const Dataset& train, const Hyperparams& hp, int k,
                  double rho, std::uint64_t seed);

struct GridSpec {
  std::vector<double> c1s{0.001, 0.01, 0.1};
  std::vector<double> c2s{0.1, 1.0, 10.0, 100.0};
  std::vector<double> c3s{0.1, 1.0, 10.0, 100.0};
  std::vector<double> c4s{0.1, 1.0, 10.0, 100.0};
  std::vector<int> max_bundle_its{15, 30, 50};
  int folds = 3;
  std::vector<double> rhos{0.1, 0.3, 0.49};
};

struct GridCell {
  Hyperparams hp;
  bool ok = false;
  std::string error;
  std::vector<ConfusionCounts> fold_counts;
  bool any_degenerate = false;

  double mean_ar(double rho) const;
};

struct GridResult {
  std::vector<GridCell> cells;
  int folds = 0;
};

// Every Cartesian-product cell cross-validated on shared folds; failed
// cells carry their error string and never win selection. Cells may be
// evaluated in parallel; the table order is the enumeration order.
GridResult evaluate_grid(const Dataset& train, const GridSpec& grid,
                         const Hyperparams& base, std::uint64_t seed,
                         int jobs = 1);

// Index of the argmax mean-CV AR at the given rho; ties break toward
// lexicographically smaller (c1, c2, c3, c4, max_bundle_it). Returns -1
// when no cell succeeded.
int select_best(const GridResult& result, double rho);

// Convenience wrapper: evaluate, then select at a single rho.
std::pair<Hyperparams, GridResult> grid_search(const Dataset& train,
                                               const GridSpec& grid,
                                               double rho, std::uint64_t seed,
                                               const Hyperparams& base = {},
                                               int jobs = 1);

// Long-format table: one row per (cell, rho, fold) plus a mean row.
void write_grid_csv(const GridResult& result, const GridSpec& grid,
                    std::ostream& out);

}  // namespace esm
