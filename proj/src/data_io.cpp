#include "esm/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "esm/num_format.hpp"

namespace esm {

namespace {

int parse_label_token(const std::string& tok, bool remap, long line_no) {
  double v = 0.0;
  try {
    std::size_t pos = 0;
    v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    throw MalformedLine("line " + std::to_string(line_no) +
                        ": bad label token '" + tok + "'");
  }
  if (v == 1.0) return 1;
  if (v == -1.0) return -1;
  if (remap) {
    if (v == 0.0 || v == 2.0) return -1;
    if (v == 4.0) return 1;
  }
  throw UnknownLabel("line " + std::to_string(line_no) + ": label '" + tok +
                     "' (expected +1/-1" +
                     (remap ? " or 0/1, 2/4" : "; use label remapping for 0/1 or 2/4") +
                     ")");
}

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Deterministic uniforms and normals, independent of the standard library's
// distribution implementations.
struct RandomSource {
  std::mt19937_64 rng;
  bool have_spare = false;
  double spare = 0.0;

  explicit RandomSource(std::uint64_t seed) : rng(seed) {}

  double uniform01() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare = radius * std::sin(angle);
    have_spare = true;
    return radius * std::cos(angle);
  }
};

void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>>
split_by_label(const Dataset& ds) {
  std::vector<Eigen::VectorXd> xp, xm;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds.labels[i] > 0 ? xp : xm).push_back(ds.points[i]);
  }
  return {std::move(xp), std::move(xm)};
}

Dataset parse_svmlight(std::istream& in, bool remap_labels, std::string name) {
  std::vector<int> labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  int max_index = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    labels.push_back(parse_label_token(tok, remap_labels, line_no));
    std::vector<std::pair<int, double>> row;
    int prev_index = 0;
    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == tok.size()) {
        throw MalformedLine("line " + std::to_string(line_no) +
                            ": expected index:value, got '" + tok + "'");
      }
      int index = 0;
      double value = 0.0;
      try {
        std::size_t pos = 0;
        index = std::stoi(tok.substr(0, colon), &pos);
        if (pos != colon) throw std::invalid_argument(tok);
        value = std::stod(tok.substr(colon + 1), &pos);
        if (pos != tok.size() - colon - 1) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw MalformedLine("line " + std::to_string(line_no) +
                            ": bad index:value token '" + tok + "'");
      }
      if (index < 1) {
        throw MalformedLine("line " + std::to_string(line_no) +
                            ": feature indices are 1-based");
      }
      if (index <= prev_index) {
        throw NonMonotoneIndex("line " + std::to_string(line_no) +
                               ": index " + std::to_string(index) +
                               " not strictly increasing");
      }
      prev_index = index;
      max_index = std::max(max_index, index);
      row.emplace_back(index, value);
    }
    rows.push_back(std::move(row));
  }
  Dataset ds;
  ds.name = std::move(name);
  ds.feature_dim = max_index;
  ds.labels = std::move(labels);
  ds.points.reserve(rows.size());
  for (const auto& row : rows) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(max_index);
    for (const auto& [idx, val] : row) x(idx - 1) = val;
    ds.points.push_back(std::move(x));
  }
  return ds;
}

void write_svmlight(const Dataset& ds, std::ostream& out) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    const auto& x = ds.points[i];
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      out << ' ' << (j + 1) << ':' << fmt_double_17(x(j));
    }
    out << '\n';
  }
}

Dataset parse_csv(std::istream& in, bool remap_labels, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  std::string line;
  long line_no = 0;
  bool first_data_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) {
      // trim
      const auto b = field.find_first_not_of(" \t\r");
      const auto e = field.find_last_not_of(" \t\r");
      fields.push_back(b == std::string::npos
                           ? std::string()
                           : field.substr(b, e - b + 1));
    }
    if (fields.empty()) continue;
    if (first_data_row) {
      // Header detection: a non-numeric first field means a header row.
      try {
        std::size_t pos = 0;
        std::stod(fields[0], &pos);
        if (pos != fields[0].size()) throw std::invalid_argument(fields[0]);
      } catch (const std::exception&) {
        first_data_row = false;
        continue;  // skip header
      }
    }
    first_data_row = false;
    const int n_features = static_cast<int>(fields.size()) - 1;
    if (n_features < 1) {
      throw MalformedLine("line " + std::to_string(line_no) +
                          ": need a label and at least one feature");
    }
    if (ds.feature_dim == 0) {
      ds.feature_dim = n_features;
    } else if (n_features != ds.feature_dim) {
      throw MalformedLine("line " + std::to_string(line_no) +
                          ": inconsistent column count");
    }
    ds.labels.push_back(parse_label_token(fields[0], remap_labels, line_no));
    Eigen::VectorXd x(n_features);
    for (int j = 0; j < n_features; ++j) {
      try {
        std::size_t pos = 0;
        x(j) = std::stod(fields[j + 1], &pos);
        if (pos != fields[j + 1].size())
          throw std::invalid_argument(fields[j + 1]);
      } catch (const std::exception&) {
        throw MalformedLine("line " + std::to_string(line_no) +
                            ": bad numeric field '" + fields[j + 1] + "'");
      }
    }
    ds.points.push_back(std::move(x));
  }
  return ds;
}

Dataset load_dataset(const std::string& path, bool remap_labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  const bool is_csv =
      path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return is_csv ? parse_csv(in, remap_labels, path)
                : parse_svmlight(in, remap_labels, path);
}

void min_max_scale(Dataset& ds) {
  if (ds.points.empty() || ds.feature_dim == 0) return;
  Eigen::VectorXd lo = ds.points.front();
  Eigen::VectorXd hi = ds.points.front();
  for (const auto& x : ds.points) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const Eigen::VectorXd range = hi - lo;
  for (auto& x : ds.points) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      x(j) = range(j) > 0.0 ? (x(j) - lo(j)) / range(j) : 0.0;
    }
  }
}

Dataset make_synthetic(const SynthSpec& spec) {
  if (spec.n_samples < 2) throw DataError("make_synthetic: n_samples < 2");
  if (spec.n_features < 1) throw DataError("make_synthetic: n_features < 1");
  if (spec.n_clusters_per_class < 1) {
    throw DataError("make_synthetic: n_clusters_per_class < 1");
  }
  const int needed = 2 * spec.n_clusters_per_class;
  if (spec.n_features < 63 &&
      static_cast<std::uint64_t>(needed) >
          (std::uint64_t{1} << spec.n_features)) {
    throw TooManyClusters("make_synthetic: 2*n_clusters_per_class exceeds "
                          "the number of hypercube vertices");
  }
  RandomSource rand(spec.seed);

  // Distinct vertex sign patterns; both classes draw from the same cube.
  std::vector<std::vector<std::uint8_t>> patterns;
  std::set<std::vector<std::uint8_t>> seen;
  long attempts = 0;
  while (static_cast<int>(patterns.size()) < needed) {
    if (++attempts > 100000) {
      throw TooManyClusters("make_synthetic: could not draw distinct vertices");
    }
    std::vector<std::uint8_t> p(static_cast<std::size_t>(spec.n_features));
    for (auto& bit : p) bit = static_cast<std::uint8_t>(rand.rng() & 1u);
    if (seen.insert(p).second) patterns.push_back(std::move(p));
  }
  const auto centroid = [&](int c) {
    Eigen::VectorXd v(spec.n_features);
    for (int j = 0; j < spec.n_features; ++j) {
      v(j) = patterns[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]
                 ? spec.class_sep
                 : -spec.class_sep;
    }
    return v;
  };

  Dataset ds;
  ds.feature_dim = spec.n_features;
  ds.name = "synthetic";
  const int class_sizes[2] = {(spec.n_samples + 1) / 2, spec.n_samples / 2};
  const int class_labels[2] = {1, -1};
  for (int c = 0; c < 2; ++c) {
    const int k = spec.n_clusters_per_class;
    for (int cluster = 0; cluster < k; ++cluster) {
      const int count = class_sizes[c] / k + (cluster < class_sizes[c] % k);
      const Eigen::VectorXd mu = centroid(c * k + cluster);
      for (int p = 0; p < count; ++p) {
        Eigen::VectorXd x(spec.n_features);
        for (int j = 0; j < spec.n_features; ++j) x(j) = mu(j) + rand.normal();
        ds.points.push_back(std::move(x));
        ds.labels.push_back(class_labels[c]);
      }
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds,
                                             double train_frac,
                                             std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error("split_train_test: train_frac must be in (0, 1)");
  }
  std::vector<std::size_t> plus_idx, minus_idx;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds.labels[i] > 0 ? plus_idx : minus_idx).push_back(i);
  }
  std::mt19937_64 rng(seed);
  shuffle_indices(plus_idx, rng);
  shuffle_indices(minus_idx, rng);

  const auto take = [&](const std::vector<std::size_t>& idx) -> std::size_t {
    const long n_train =
        std::lround(train_frac * static_cast<double>(idx.size()));
    if (n_train <= 0 || n_train >= static_cast<long>(idx.size())) {
      throw ClassTooSmall(
          "split_train_test: a class would be empty on one side");
    }
    return static_cast<std::size_t>(n_train);
  };
  const std::size_t np_train = take(plus_idx);
  const std::size_t nm_train = take(minus_idx);

  Dataset train, test;
  train.feature_dim = test.feature_dim = ds.feature_dim;
  train.name = ds.name.empty() ? "train" : ds.name + ":train";
  test.name = ds.name.empty() ? "test" : ds.name + ":test";
  const auto emit = [&](const std::vector<std::size_t>& idx, std::size_t cut) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Dataset& dst = (k < cut) ? train : test;
      dst.points.push_back(ds.points[idx[k]]);
      dst.labels.push_back(ds.labels[idx[k]]);
    }
  };
  emit(plus_idx, np_train);
  emit(minus_idx, nm_train);
  return {std::move(train), std::move(test)};
}

namespace {

constexpr const char* kModelSchema = "esm-model";
constexpr int kModelVersion = 1;

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << fmt_double_17(v(i));
  }
  out << ']';
}

void write_point_list(std::ostream& out, const char* key,
                      const std::vector<Eigen::VectorXd>& pts) {
  out << "  \"" << key << "\": [";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out << (i ? ",\n    " : "\n    ");
    write_vector(out, pts[i]);
  }
  out << (pts.empty() ? "]" : "\n  ]");
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v(i++) = e.get<double>();
  return v;
}

}  // namespace

void save_model(const TrainedModel& model, const Hyperparams& hp,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  const Eigen::Index n = model.ellipsoid.shape.dim();
  out << "{\n";
  out << "  \"schema\": \"" << kModelSchema << "\",\n";
  out << "  \"version\": " << kModelVersion << ",\n";
  out << "  \"feature_dim\": " << n << ",\n";
  out << "  \"eps_cls\": " << fmt_double_17(model.eps_cls) << ",\n";
  out << "  \"degenerate\": " << (model.degenerate ? "true" : "false")
      << ",\n";
  out << "  \"shape\": [";
  for (Eigen::Index i = 0; i < n; ++i) {
    out << (i ? ",\n    " : "\n    ");
    write_vector(out, model.ellipsoid.shape.mat().row(i).transpose());
  }
  out << "\n  ],\n";
  out << "  \"center\": ";
  write_vector(out, model.ellipsoid.center);
  out << ",\n";
  write_point_list(out, "xbar_plus", model.xbar_plus);
  out << ",\n";
  write_point_list(out, "xbar_minus", model.xbar_minus);
  out << ",\n";
  out << "  \"hyperparams\": {\n";
  out << "    \"c1\": " << fmt_double_17(hp.c1) << ",\n";
  out << "    \"c2\": " << fmt_double_17(hp.c2) << ",\n";
  out << "    \"c3\": " << fmt_double_17(hp.c3) << ",\n";
  out << "    \"c4\": " << fmt_double_17(hp.c4) << ",\n";
  out << "    \"eps_gs\": " << fmt_double_17(hp.eps_gs) << ",\n";
  out << "    \"r_inner\": " << hp.r_inner << ",\n";
  out << "    \"max_outer\": " << hp.max_outer << ",\n";
  out << "    \"max_bundle_it\": " << hp.max_bundle_it << ",\n";
  out << "    \"eps_cls\": " << fmt_double_17(hp.eps_cls) << ",\n";
  out << "    \"pg_tol\": " << fmt_double_17(hp.pg_tol) << ",\n";
  out << "    \"pg_max_it\": " << hp.pg_max_it << ",\n";
  out << "    \"eig_floor\": " << fmt_double_17(hp.eig_floor) << ",\n";
  out << "    \"fix_s\": " << (hp.fix_s ? "true" : "false") << ",\n";
  out << "    \"exact_inner\": " << (hp.exact_inner ? "true" : "false")
      << ",\n";
  out << "    \"max_pairs\": " << hp.max_pairs << "\n";
  out << "  }\n";
  out << "}\n";
  if (!out) throw DataError("failed writing model file: " + path);
}

std::pair<TrainedModel, Hyperparams> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw CorruptFile("model file is not valid: " + path);
  try {
    if (j.at("schema").get<std::string>() != kModelSchema ||
        j.at("version").get<int>() != kModelVersion) {
      throw SchemaMismatch("unsupported model schema in " + path);
    }
    const auto n = j.at("feature_dim").get<Eigen::Index>();
    Eigen::MatrixXd shape(n, n);
    const auto& rows = j.at("shape");
    if (static_cast<Eigen::Index>(rows.size()) != n) {
      throw CorruptFile("model shape has wrong row count: " + path);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd row = vector_from_json(rows[i]);
      if (row.size() != n) {
        throw CorruptFile("model shape has wrong column count: " + path);
      }
      shape.row(i) = row;
    }
    TrainedModel model;
    model.ellipsoid.shape = SymMat(std::move(shape));
    model.ellipsoid.center = vector_from_json(j.at("center"));
    if (model.ellipsoid.center.size() != n) {
      throw CorruptFile("model center has wrong dimension: " + path);
    }
    model.eps_cls = j.at("eps_cls").get<double>();
    model.degenerate = j.at("degenerate").get<bool>();
    for (const auto& p : j.at("xbar_plus")) {
      model.xbar_plus.push_back(vector_from_json(p));
    }
    for (const auto& p : j.at("xbar_minus")) {
      model.xbar_minus.push_back(vector_from_json(p));
    }
    const auto& h = j.at("hyperparams");
    Hyperparams hp;
    hp.c1 = h.at("c1").get<double>();
    hp.c2 = h.at("c2").get<double>();
    hp.c3 = h.at("c3").get<double>();
    hp.c4 = h.at("c4").get<double>();
    hp.eps_gs = h.at("eps_gs").get<double>();
    hp.r_inner = h.at("r_inner").get<int>();
    hp.max_outer = h.at("max_outer").get<int>();
    hp.max_bundle_it = h.at("max_bundle_it").get<int>();
    hp.eps_cls = h.at("eps_cls").get<double>();
    hp.pg_tol = h.at("pg_tol").get<double>();
    hp.pg_max_it = h.at("pg_max_it").get<int>();
    hp.eig_floor = h.at("eig_floor").get<double>();
    hp.fix_s = h.at("fix_s").get<bool>();
    hp.exact_inner = h.at("exact_inner").get<bool>();
    hp.max_pairs = h.at("max_pairs").get<long>();
    return {std::move(model), hp};
  } catch (const SchemaMismatch&) {
    throw;
  } catch (const CorruptFile&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptFile("model file " + path + ": " + e.what());
  }
}

}  // namespace esm
