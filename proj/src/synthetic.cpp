#include "phex/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phex/errors.hpp"

namespace phex {

namespace {

void check_generator_params(const SyntheticTaskSpec& spec) {
  if (spec.num_classes < 2) throw ValidationError("need at least 2 classes");
  if (spec.dim <= 0) throw ValidationError("feature dimension must be positive");
  if (!std::isfinite(spec.centroid_scale) || spec.centroid_scale <= 0.0) {
    throw ValidationError("centroid scale must be positive and finite");
  }
  if (!std::isfinite(spec.secondary_scale) || spec.secondary_scale < 0.0) {
    throw ValidationError("secondary scale must be >= 0 and finite");
  }
  if (!std::isfinite(spec.noise_scale) || spec.noise_scale < 0.0) {
    throw ValidationError("noise scale must be >= 0 and finite");
  }
  if (spec.train_per_class < 0 || spec.val_per_class < 0 ||
      spec.test_per_class < 0) {
    throw ValidationError("per-class instance counts must be >= 0");
  }
  if (!(spec.label_noise >= 0.0 && spec.label_noise <= 1.0)) {
    throw ValidationError("label noise must lie in [0, 1]");
  }
  if (!(spec.relation_noise >= 0.0 && spec.relation_noise <= 1.0)) {
    throw ValidationError("relation noise must lie in [0, 1]");
  }
}

std::vector<double> gauss_vec(int d, double scale, std::mt19937_64& rng,
                              std::normal_distribution<double>& gauss) {
  std::vector<double> v(d);
  for (double& x : v) x = scale * gauss(rng);
  return v;
}

void add_scaled(std::vector<double>& out, const std::vector<double>& v,
                double s) {
  for (size_t i = 0; i < out.size(); ++i) out[i] += s * v[i];
}

}  // namespace

std::vector<std::vector<int>> random_predicates(int num_classes,
                                                int num_attributes,
                                                std::mt19937_64& rng) {
  if (num_classes < 1 || num_attributes < 0) {
    throw ValidationError("predicate matrix needs >= 1 class and >= 0 attributes");
  }
  if (num_attributes == 0) {
    return std::vector<std::vector<int>>(num_classes, std::vector<int>{});
  }
  if (num_attributes > 20) {
    throw ValidationError("signature sampling supports at most 20 attributes");
  }
  const int space = (1 << num_attributes) - 2;  // drop all-0 and all-1 rows
  if (num_classes > space) {
    throw ValidationError("not enough distinct non-constant signatures for " +
                          std::to_string(num_classes) + " classes over " +
                          std::to_string(num_attributes) + " attributes");
  }
  std::vector<int> pool(space);
  std::iota(pool.begin(), pool.end(), 1);
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::vector<int>> pred(num_classes,
                                       std::vector<int>(num_attributes, 0));
    for (int c = 0; c < num_classes; ++c) {
      for (int t = 0; t < num_attributes; ++t) {
        pred[c][t] = (pool[c] >> t) & 1;
      }
    }
    bool degenerate = false;
    for (int t = 0; t < num_attributes && !degenerate; ++t) {
      int ones = 0;
      for (int c = 0; c < num_classes; ++c) ones += pred[c][t];
      degenerate = ones == 0 || ones == num_classes;
    }
    if (!degenerate) return pred;
  }
  throw NumericalError("failed to sample a predicate matrix without degenerate attributes");
}

LabelGraph build_attribute_graph(const std::vector<std::vector<int>>& predicates,
                                 const std::vector<std::string>& class_names,
                                 const std::vector<std::string>& attribute_names,
                                 double u_pos, double u_neg,
                                 std::vector<std::string>* warnings) {
  const int k = static_cast<int>(class_names.size());
  const int a = static_cast<int>(attribute_names.size());
  if (k < 2) throw ValidationError("attribute graph needs at least 2 classes");
  if (static_cast<int>(predicates.size()) != k) {
    throw ValidationError("predicate matrix has " +
                          std::to_string(predicates.size()) + " rows, expected " +
                          std::to_string(k));
  }
  for (const auto& row : predicates) {
    if (static_cast<int>(row.size()) != a) {
      throw ValidationError("predicate row length does not match attribute count");
    }
    for (int v : row) {
      if (v != 0 && v != 1) {
        throw ValidationError("predicate entries must be 0 or 1");
      }
    }
  }

  LabelGraph graph;
  graph.labels = class_names;
  graph.labels.insert(graph.labels.end(), attribute_names.begin(),
                      attribute_names.end());
  std::vector<int> members(k);
  std::iota(members.begin(), members.end(), 0);
  graph.set_mece(members);
  for (int t = 0; t < a; ++t) {
    const int attr = k + t;
    int ones = 0;
    for (int c = 0; c < k; ++c) {
      if (predicates[c][t] == 1) {
        graph.add_subsumption(attr, c, EdgeStrength::finite(u_pos));
        ++ones;
      } else {
        graph.add_exclusion(attr, c, EdgeStrength::finite(u_neg));
      }
    }
    if (warnings != nullptr && (ones == 0 || ones == k)) {
      warnings->push_back("attribute '" + attribute_names[t] +
                          "' has a constant predicate column (all-" +
                          (ones == 0 ? "0" : "1") + ")");
    }
  }
  return graph;
}

int hierarchy_parent_of(int leaf, int num_leaves, int num_parents) {
  if (leaf < 0 || leaf >= num_leaves || num_parents < 1 ||
      num_parents > num_leaves) {
    throw ValidationError("bad leaf/parent indices");
  }
  return static_cast<int>(static_cast<long long>(leaf) * num_parents /
                          num_leaves);
}

SyntheticDataset build_hierarchy_task(const SyntheticTaskSpec& spec) {
  check_generator_params(spec);
  const int k = spec.num_classes;
  const int p_count = spec.num_parents;
  if (p_count < 1 || p_count > k) {
    throw ValidationError("hierarchy task needs 1 <= num_parents <= num_classes");
  }
  if (!(spec.relabel_fraction >= 0.0 && spec.relabel_fraction <= 1.0)) {
    throw ValidationError("relabel fraction must lie in [0, 1]");
  }

  SyntheticDataset out;
  out.dim = spec.dim;
  for (int l = 0; l < k; ++l) out.graph.labels.push_back("leaf" + std::to_string(l));
  for (int p = 0; p < p_count; ++p) {
    out.graph.labels.push_back("parent" + std::to_string(p));
  }
  std::vector<int> members(k);
  std::iota(members.begin(), members.end(), 0);
  out.graph.set_mece(members);
  for (int l = 0; l < k; ++l) {
    const int parent = k + hierarchy_parent_of(l, k, p_count);
    out.graph.add_subsumption(parent, l, EdgeStrength::finite(spec.u_pos));
  }
  for (int p = 0; p < p_count; ++p) {
    for (int q = p + 1; q < p_count; ++q) {
      out.graph.add_exclusion(k + p, k + q, EdgeStrength::finite(spec.u_neg));
    }
  }
  out.class_labels = members;
  out.eval_candidates = members;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> parent_mu;
  parent_mu.reserve(p_count);
  for (int p = 0; p < p_count; ++p) {
    parent_mu.push_back(gauss_vec(spec.dim, spec.centroid_scale, rng, gauss));
  }
  std::vector<std::vector<double>> centroid;
  centroid.reserve(k);
  for (int l = 0; l < k; ++l) {
    std::vector<double> c = parent_mu[hierarchy_parent_of(l, k, p_count)];
    add_scaled(c, gauss_vec(spec.dim, 1.0, rng, gauss),
               spec.centroid_scale * spec.secondary_scale);
    centroid.push_back(std::move(c));
  }

  const int relabeled =
      static_cast<int>(std::lround(spec.relabel_fraction * spec.train_per_class));
  std::vector<int> annotated;       // leaf written by the annotator, per instance
  std::vector<char> parent_only;
  for (int l = 0; l < k; ++l) {
    for (int i = 0; i < spec.train_per_class; ++i) {
      std::vector<double> x = centroid[l];
      add_scaled(x, gauss_vec(spec.dim, 1.0, rng, gauss), spec.noise_scale);
      out.train.push_back({std::move(x), {}});
      annotated.push_back(l);
      // The last `relabeled` draws per leaf keep only the parent label.
      parent_only.push_back(i >= spec.train_per_class - relabeled ? 1 : 0);
    }
    for (int i = 0; i < spec.val_per_class; ++i) {
      std::vector<double> x = centroid[l];
      add_scaled(x, gauss_vec(spec.dim, 1.0, rng, gauss), spec.noise_scale);
      out.val.push_back({std::move(x), {{l, 1}}});
      out.val_truth.push_back(l);
    }
    for (int i = 0; i < spec.test_per_class; ++i) {
      std::vector<double> x = centroid[l];
      add_scaled(x, gauss_vec(spec.dim, 1.0, rng, gauss), spec.noise_scale);
      out.test.push_back({std::move(x), {{l, 1}}});
      out.test_truth.push_back(l);
    }
  }

  // Annotation error: some training instances are written down as a different
  // leaf entirely, before any relabeling to the parent. The flipped leaf's
  // parent is then what a relabeled instance carries, so noise corrupts
  // parent-level supervision too -- like mislabeled leaves in a real dataset.
  if (spec.label_noise > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> other(0, k - 2);
    for (int& leaf : annotated) {
      if (unit(rng) < spec.label_noise) {
        const int pick = other(rng);
        leaf = pick < leaf ? pick : pick + 1;
      }
    }
  }
  for (size_t idx = 0; idx < out.train.size(); ++idx) {
    const int leaf = annotated[idx];
    const int target =
        parent_only[idx] ? k + hierarchy_parent_of(leaf, k, p_count) : leaf;
    out.train[idx].targets = {{target, 1}};
  }
  return out;
}

SyntheticDataset build_zero_shot_task(const SyntheticTaskSpec& spec) {
  check_generator_params(spec);
  const int k = spec.num_classes;
  const int a = spec.num_attributes;
  if (a < 0) throw ValidationError("attribute count must be >= 0");
  std::vector<char> unseen(k, 0);
  for (int c : spec.unseen_classes) {
    if (c < 0 || c >= k) throw ValidationError("unseen class id out of range");
    if (unseen[c]) throw ValidationError("duplicate unseen class id");
    unseen[c] = 1;
  }
  if (spec.unseen_classes.size() >= static_cast<size_t>(k)) {
    throw ValidationError("at least one class must remain seen");
  }

  std::vector<std::string> class_names, attr_names;
  for (int c = 0; c < k; ++c) class_names.push_back("class" + std::to_string(c));
  for (int t = 0; t < a; ++t) attr_names.push_back("attr" + std::to_string(t));

  std::mt19937_64 rng(spec.seed);

  // An imperfect knowledge base: the graph may record some class-attribute
  // relations with the wrong polarity, while features and annotations below
  // stay faithful to the true predicates. The flips use their own stream so
  // the instances are byte-identical across relation_noise settings.
  std::vector<std::vector<int>> recorded = spec.predicates;
  if (spec.relation_noise > 0.0) {
    std::mt19937_64 flip_rng(spec.seed ^ 0xc2b2ae3d27d4eb4full);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& row : recorded) {
      for (int& cell : row) {
        if (unit(flip_rng) < spec.relation_noise) cell = 1 - cell;
      }
    }
  }

  SyntheticDataset out;
  out.dim = spec.dim;
  out.graph = build_attribute_graph(recorded, class_names, attr_names,
                                    spec.u_pos, spec.u_neg);
  out.class_labels.resize(k);
  std::iota(out.class_labels.begin(), out.class_labels.end(), 0);
  out.eval_candidates = spec.unseen_classes;
  std::sort(out.eval_candidates.begin(), out.eval_candidates.end());

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> basis;
  basis.reserve(a);
  for (int t = 0; t < a; ++t) {
    basis.push_back(gauss_vec(spec.dim, spec.centroid_scale, rng, gauss));
  }
  // Class centroids mix the basis vectors of their positive attributes, so
  // classes sharing attributes share feature structure; a scaled class-private
  // component keeps seen classes separable from each other.
  std::vector<std::vector<double>> centroid;
  centroid.reserve(k);
  for (int c = 0; c < k; ++c) {
    std::vector<double> v(spec.dim, 0.0);
    int ones = 0;
    for (int t = 0; t < a; ++t) ones += spec.predicates[c][t];
    const double mix = 1.0 / std::sqrt(static_cast<double>(std::max(1, ones)));
    for (int t = 0; t < a; ++t) {
      if (spec.predicates[c][t] == 1) add_scaled(v, basis[t], mix);
    }
    add_scaled(v, gauss_vec(spec.dim, 1.0, rng, gauss),
               spec.centroid_scale * spec.secondary_scale);
    centroid.push_back(std::move(v));
  }

  for (int c = 0; c < k; ++c) {
    if (!unseen[c]) {
      for (int i = 0; i < spec.train_per_class; ++i) {
        std::vector<double> x = centroid[c];
        add_scaled(x, gauss_vec(spec.dim, 1.0, rng, gauss), spec.noise_scale);
        std::vector<Target> targets = {{c, 1}};
        for (int t = 0; t < a; ++t) {
          targets.push_back({k + t, spec.predicates[c][t] == 1 ? 1 : -1});
        }
        out.train.push_back({std::move(x), std::move(targets)});
      }
      continue;
    }
    for (int i = 0; i < spec.val_per_class; ++i) {
      std::vector<double> x = centroid[c];
      add_scaled(x, gauss_vec(spec.dim, 1.0, rng, gauss), spec.noise_scale);
      out.val.push_back({std::move(x), {{c, 1}}});
      out.val_truth.push_back(c);
    }
    for (int i = 0; i < spec.test_per_class; ++i) {
      std::vector<double> x = centroid[c];
      add_scaled(x, gauss_vec(spec.dim, 1.0, rng, gauss), spec.noise_scale);
      out.test.push_back({std::move(x), {{c, 1}}});
      out.test_truth.push_back(c);
    }
  }
  return out;
}

SyntheticTaskSpec default_hierarchy_spec() {
  SyntheticTaskSpec spec;
  spec.seed = 31;
  spec.num_classes = 12;
  spec.num_parents = 3;
  spec.dim = 10;
  spec.centroid_scale = 1.0;
  spec.secondary_scale = 0.9;
  spec.noise_scale = 1.1;
  spec.train_per_class = 20;
  spec.val_per_class = 25;
  spec.test_per_class = 30;
  spec.relabel_fraction = 0.95;
  spec.label_noise = 0.1;
  spec.u_pos = 1.0;
  spec.u_neg = 1.0;
  return spec;
}

SyntheticTaskSpec default_zero_shot_spec(std::uint64_t seed) {
  SyntheticTaskSpec spec;
  spec.seed = seed;
  spec.num_classes = 13;
  spec.num_attributes = 16;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  spec.predicates = random_predicates(spec.num_classes, spec.num_attributes, rng);
  spec.dim = 24;
  spec.centroid_scale = 1.0;
  // The class-private component is large on purpose: unseen classes then look
  // systematically unlike anything the attribute detectors calibrated on,
  // which is the regime where capped votes beat amplitude-weighted ones.
  spec.secondary_scale = 1.0;
  spec.noise_scale = 1.0;
  spec.train_per_class = 20;
  spec.val_per_class = 25;
  spec.test_per_class = 25;
  spec.unseen_classes = {10, 11, 12};
  spec.relation_noise = 0.1;
  spec.u_pos = 1.0;
  spec.u_neg = 1.0;
  return spec;
}

}  // namespace phex
