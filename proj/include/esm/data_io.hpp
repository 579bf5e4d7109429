#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "esm/classifier.hpp"
#include "esm/training.hpp"

namespace esm {

struct Dataset {
  std::vector<Eigen::VectorXd> points;
  std::vector<int> labels;  // +1 / -1
  int feature_dim = 0;
  std::string name;

  std::size_t size() const { return points.size(); }
};

// Splits into (plus points, minus points) preserving order.
std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>>
split_by_label(const Dataset& ds);

// Sparse "label index:value" text format with 1-based, strictly increasing
// indices; blank lines and '#' comments are skipped. Labels must be +1/-1;
// with remap_labels, 0/1 and 2/4 are mapped to -1/+1 as well.
Dataset parse_svmlight(std::istream& in, bool remap_labels = false,
                       std::string name = "");

// Writes every feature index (zeros included) so parsing recovers the exact
// dataset, dimension included.
void write_svmlight(const Dataset& ds, std::ostream& out);

// Comma-separated, label in the first column; a non-numeric first row is
// treated as a header and skipped.
Dataset parse_csv(std::istream& in, bool remap_labels = false,
                  std::string name = "");

// Dispatches on the ".csv" extension, otherwise reads the sparse format.
Dataset load_dataset(const std::string& path, bool remap_labels = false);

// In-place per-feature min-max scaling to [0, 1]; constant features map to 0.
void min_max_scale(Dataset& ds);

struct SynthSpec {
  int n_samples = 150;
  int n_features = 10;
  double class_sep = 1.0;
  int n_clusters_per_class = 2;
  std::uint64_t seed = 42;
};

// Two balanced classes, each a mixture of unit Gaussians around distinct
// hypercube vertices with coordinates +/- class_sep. Deterministic in the
// seed. Throws TooManyClusters when the cube has too few vertices.
Dataset make_synthetic(const SynthSpec& spec);

// Stratified split; per-class train size is train_frac*count rounded to
// nearest (half away from zero). Throws ClassTooSmall when a class would
// land empty on either side.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds,
                                             double train_frac,
                                             std::uint64_t seed);

// Versioned JSON-shaped model file; doubles carry 17 significant digits so
// save -> load -> save is byte-identical.
void save_model(const TrainedModel& model, const Hyperparams& hp,
                const std::string& path);
std::pair<TrainedModel, Hyperparams> load_model(const std::string& path);

}  // namespace esm
