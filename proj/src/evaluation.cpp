#include "esm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <tuple>

#include "esm/num_format.hpp"
#include "esm/parallel.hpp"

namespace esm {

ConfusionCounts count_outcomes(const std::vector<int>& y_true,
                               const std::vector<Label>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DimensionMismatch("count_outcomes: label vectors differ in length");
  }
  ConfusionCounts c;
  c.n_total = static_cast<long>(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_pred[i] == Label::Rejected) {
      ++c.n_rej;
    } else if (label_to_int(y_pred[i]) == y_true[i]) {
      ++c.n_wc;
    } else {
      ++c.n_mc;
    }
  }
  return c;
}

RejectionScores scores_from_counts(const ConfusionCounts& c, double rho) {
  if (!(rho >= 0.0 && rho < 0.5)) {
    throw Error("scores_from_counts: rho must be in [0, 0.5)");
  }
  if (c.n_total <= 0) throw Error("scores_from_counts: empty sample");
  RejectionScores s;
  s.rho = rho;
  s.n_wc = c.n_wc;
  s.n_mc = c.n_mc;
  s.n_rej = c.n_rej;
  s.n_total = c.n_total;
  const double n = static_cast<double>(c.n_total);
  s.wc = static_cast<double>(c.n_wc) / n;
  s.mc = static_cast<double>(c.n_mc) / n;
  s.rej = static_cast<double>(c.n_rej) / n;
  s.ar = (static_cast<double>(c.n_wc) - rho * static_cast<double>(c.n_rej)) / n;
  if (c.n_wc + c.n_mc > 0) {
    s.acc = static_cast<double>(c.n_wc) /
            static_cast<double>(c.n_wc + c.n_mc);
    s.acc_defined = true;
  } else {
    s.acc = std::numeric_limits<double>::quiet_NaN();
    s.acc_defined = false;
  }
  return s;
}

RejectionScores score(const std::vector<int>& y_true,
                      const std::vector<Label>& y_pred, double rho) {
  return scores_from_counts(count_outcomes(y_true, y_pred), rho);
}

std::vector<int> make_stratified_folds(const Dataset& ds, int k,
                                       std::uint64_t seed) {
  if (k < 2) throw Error("make_stratified_folds: k must be >= 2");
  std::vector<std::size_t> plus_idx, minus_idx;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds.labels[i] > 0 ? plus_idx : minus_idx).push_back(i);
  }
  if (plus_idx.size() < static_cast<std::size_t>(k) ||
      minus_idx.size() < static_cast<std::size_t>(k)) {
    throw ClassTooSmall("make_stratified_folds: each class needs >= k points");
  }
  std::mt19937_64 rng(seed);
  const auto shuffle = [&](std::vector<std::size_t>& idx) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng() % i)]);
    }
  };
  shuffle(plus_idx);
  shuffle(minus_idx);
  std::vector<int> fold_of(ds.size(), 0);
  for (std::size_t p = 0; p < plus_idx.size(); ++p) {
    fold_of[plus_idx[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
  }
  for (std::size_t p = 0; p < minus_idx.size(); ++p) {
    fold_of[minus_idx[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
  }
  return fold_of;
}

namespace {

// Cross-validates one hyperparameter cell on a fixed fold assignment.
std::pair<std::vector<ConfusionCounts>, bool> cv_counts_on_folds(
    const Dataset& ds, const std::vector<int>& fold_of, int k,
    const Hyperparams& hp) {
  std::vector<ConfusionCounts> counts;
  counts.reserve(static_cast<std::size_t>(k));
  bool any_degenerate = false;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<Eigen::VectorXd> xp, xm, held;
    std::vector<int> held_labels;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (fold_of[i] == fold) {
        held.push_back(ds.points[i]);
        held_labels.push_back(ds.labels[i]);
      } else {
        (ds.labels[i] > 0 ? xp : xm).push_back(ds.points[i]);
      }
    }
    const FitResult fit_res = fit(xp, xm, hp);
    any_degenerate = any_degenerate || fit_res.model.degenerate;
    const std::vector<Label> pred = predict_batch(fit_res.model, held);
    counts.push_back(count_outcomes(held_labels, pred));
  }
  return {std::move(counts), any_degenerate};
}

}  // namespace

CvResult kfold_cv(const Dataset& train, const Hyperparams& hp, int k,
                  double rho, std::uint64_t seed) {
  const std::vector<int> fold_of = make_stratified_folds(train, k, seed);
  CvResult res;
  std::tie(res.fold_counts, res.any_degenerate) =
      cv_counts_on_folds(train, fold_of, k, hp);
  double sum = 0.0;
  for (const auto& c : res.fold_counts) {
    res.fold_scores.push_back(scores_from_counts(c, rho));
    sum += res.fold_scores.back().ar;
  }
  res.mean_ar = sum / static_cast<double>(k);
  return res;
}

double GridCell::mean_ar(double rho) const {
  if (!ok || fold_counts.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  double sum = 0.0;
  for (const auto& c : fold_counts) sum += scores_from_counts(c, rho).ar;
  return sum / static_cast<double>(fold_counts.size());
}

GridResult evaluate_grid(const Dataset& train, const GridSpec& grid,
                         const Hyperparams& base, std::uint64_t seed,
                         int jobs) {
  if (grid.c1s.empty() || grid.c2s.empty() || grid.c3s.empty() ||
      grid.c4s.empty() || grid.max_bundle_its.empty()) {
    throw Error("evaluate_grid: empty candidate list");
  }
  GridResult res;
  res.folds = grid.folds;
  for (double c1 : grid.c1s) {
    for (double c2 : grid.c2s) {
      for (double c3 : grid.c3s) {
        for (double c4 : grid.c4s) {
          for (int mbi : grid.max_bundle_its) {
            GridCell cell;
            cell.hp = base;
            cell.hp.c1 = c1;
            cell.hp.c2 = c2;
            cell.hp.c3 = c3;
            cell.hp.c4 = c4;
            cell.hp.max_bundle_it = mbi;
            res.cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  // One fold assignment shared by every cell.
  const std::vector<int> fold_of =
      make_stratified_folds(train, grid.folds, seed);
  parallel_for(res.cells.size(), jobs, [&](std::size_t i) {
    GridCell& cell = res.cells[i];
    try {
      std::tie(cell.fold_counts, cell.any_degenerate) =
          cv_counts_on_folds(train, fold_of, grid.folds, cell.hp);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });
  return res;
}

int select_best(const GridResult& result, double rho) {
  int best = -1;
  double best_ar = -std::numeric_limits<double>::infinity();
  const auto key = [](const Hyperparams& hp) {
    return std::make_tuple(hp.c1, hp.c2, hp.c3, hp.c4, hp.max_bundle_it);
  };
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const GridCell& cell = result.cells[i];
    if (!cell.ok) continue;
    const double ar = cell.mean_ar(rho);
    if (best < 0 || ar > best_ar ||
        (ar == best_ar &&
         key(cell.hp) < key(result.cells[static_cast<std::size_t>(best)].hp))) {
      best = static_cast<int>(i);
      best_ar = ar;
    }
  }
  return best;
}

std::pair<Hyperparams, GridResult> grid_search(const Dataset& train,
                                               const GridSpec& grid,
                                               double rho, std::uint64_t seed,
                                               const Hyperparams& base,
                                               int jobs) {
  GridResult res = evaluate_grid(train, grid, base, seed, jobs);
  const int best = select_best(res, rho);
  if (best < 0) throw Error("grid_search: every grid cell failed");
  return {res.cells[static_cast<std::size_t>(best)].hp, std::move(res)};
}

void write_grid_csv(const GridResult& result, const GridSpec& grid,
                    std::ostream& out) {
  out << "c1,c2,c3,c4,max_bundle_it,rho,fold,status,ar,acc,wc,mc,rej\n";
  for (const auto& cell : result.cells) {
    const std::string prefix = fmt_double(cell.hp.c1) + "," +
                               fmt_double(cell.hp.c2) + "," +
                               fmt_double(cell.hp.c3) + "," +
                               fmt_double(cell.hp.c4) + "," +
                               std::to_string(cell.hp.max_bundle_it) + ",";
    for (double rho : grid.rhos) {
      if (!cell.ok) {
        out << prefix << fmt_double(rho) << ",mean,failed:" << cell.error
            << ",,,,,\n";
        continue;
      }
      ConfusionCounts total;
      double ar_sum = 0.0;
      for (std::size_t f = 0; f < cell.fold_counts.size(); ++f) {
        const RejectionScores s = scores_from_counts(cell.fold_counts[f], rho);
        ar_sum += s.ar;
        total.n_wc += cell.fold_counts[f].n_wc;
        total.n_mc += cell.fold_counts[f].n_mc;
        total.n_rej += cell.fold_counts[f].n_rej;
        total.n_total += cell.fold_counts[f].n_total;
        out << prefix << fmt_double(rho) << ',' << f << ",ok,"
            << fmt_double(s.ar) << ','
            << (s.acc_defined ? fmt_double(s.acc) : "nan") << ','
            << fmt_double(s.wc) << ',' << fmt_double(s.mc) << ','
            << fmt_double(s.rej) << '\n';
      }
      const RejectionScores pooled = scores_from_counts(total, rho);
      out << prefix << fmt_double(rho) << ",mean,ok,"
          << fmt_double(ar_sum /
                        static_cast<double>(cell.fold_counts.size()))
          << ',' << (pooled.acc_defined ? fmt_double(pooled.acc) : "nan")
          << ',' << fmt_double(pooled.wc) << ',' << fmt_double(pooled.mc)
          << ',' << fmt_double(pooled.rej) << '\n';
    }
  }
}

}  // namespace esm
