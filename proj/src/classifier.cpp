#include "esm/classifier.hpp"

#include "esm/parallel.hpp"

namespace esm {

int label_to_int(Label l) {
  switch (l) {
    case Label::Plus:
      return 1;
    case Label::Minus:
      return -1;
    case Label::Rejected:
      return 0;
  }
  return 0;
}

std::tuple<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>, bool>
reduce_sets(const CenteredEllipsoid& c,
            const std::vector<Eigen::VectorXd>& xp,
            const std::vector<Eigen::VectorXd>& xm) {
  std::vector<Eigen::VectorXd> rp, rm;
  rp.reserve(xp.size());
  rm.reserve(xm.size());
  for (const auto& x : xp) {
    if (!contains(c, x)) rp.push_back(x);
  }
  for (const auto& x : xm) {
    if (!contains(c, x)) rm.push_back(x);
  }
  const bool degenerate = rp.empty() || rm.empty();
  return {std::move(rp), std::move(rm), degenerate};
}

ClassScores separation_counts(const TrainedModel& m,
                              const Eigen::VectorXd& z) {
  if (m.degenerate) {
    throw DegenerateModel("separation_counts: a reduced set is empty");
  }
  ClassScores s;
  for (const auto& x : m.xbar_plus) {
    if (segment_intersects(m.ellipsoid, z, x)) ++s.n_plus;
  }
  for (const auto& x : m.xbar_minus) {
    if (segment_intersects(m.ellipsoid, z, x)) ++s.n_minus;
  }
  std::tie(s.r_plus, s.r_minus) = rejection_scores(
      s.n_plus, s.n_minus, m.xbar_plus.size(), m.xbar_minus.size());
  return s;
}

std::pair<double, double> rejection_scores(long n_plus, long n_minus,
                                           std::size_t size_plus,
                                           std::size_t size_minus) {
  if (size_plus == 0 || size_minus == 0) {
    throw DegenerateModel("rejection_scores: zero-size reduced set");
  }
  const double r_plus = static_cast<double>(n_minus) / size_minus -
                        static_cast<double>(n_plus) / size_plus;
  return {r_plus, -r_plus};
}

Label predict(const TrainedModel& m, const Eigen::VectorXd& z) {
  if (m.degenerate) return Label::Rejected;
  const ClassScores s = separation_counts(m, z);
  if (s.r_plus >= m.eps_cls) return Label::Plus;
  if (s.r_minus >= m.eps_cls) return Label::Minus;
  return Label::Rejected;
}

std::vector<Label> predict_batch(const TrainedModel& m,
                                 const std::vector<Eigen::VectorXd>& zs,
                                 int jobs) {
  std::vector<Label> out(zs.size(), Label::Rejected);
  parallel_for(zs.size(), jobs,
               [&](std::size_t i) { out[i] = predict(m, zs[i]); });
  return out;
}

}  // namespace esm
