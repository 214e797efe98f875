#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "phex/label_graph.hpp"
#include "phex/learning.hpp"

namespace phex {

// Generator parameters for the desk-scale experiment suite. The seed fully
// determines the dataset; unseen classes receive zero training instances.
struct SyntheticTaskSpec {
  std::uint64_t seed = 0;
  int num_classes = 0;
  int num_attributes = 0;
  std::vector<std::vector<int>> predicates;  // num_classes x num_attributes, 0/1
  int num_parents = 0;                       // hierarchy task only
  int dim = 0;
  double centroid_scale = 1.0;
  double secondary_scale = 0.5;  // per-class offset, relative to centroid_scale
  double noise_scale = 1.0;
  int train_per_class = 0;
  int val_per_class = 0;
  int test_per_class = 0;
  std::vector<int> unseen_classes;  // zero-shot task: held out of training
  double relabel_fraction = 0.0;    // hierarchy task: rho
  // Fraction of training annotations flipped to a uniformly random other
  // leaf before parent relabeling (hierarchy task). Mimics annotation error;
  // val/test stay clean.
  double label_noise = 0.0;
  // Fraction of class-attribute cells whose relation enters the graph with
  // the opposite polarity (zero-shot task). Features and annotations follow
  // the true predicates; only the graph is wrong, like an imperfect
  // knowledge base.
  double relation_noise = 0.0;
  double u_pos = 1.0;               // subsumption strength at build time
  double u_neg = 1.0;               // exclusion strength at build time
};

struct SyntheticDataset {
  LabelGraph graph;
  int dim = 0;
  std::vector<int> class_labels;     // MECE member ids (classes or leaves)
  std::vector<int> eval_candidates;  // argmax candidates for val/test scoring
  std::vector<TrainingInstance> train;
  std::vector<TrainingInstance> val;
  std::vector<TrainingInstance> test;
  std::vector<int> val_truth;   // class label id per val instance
  std::vector<int> test_truth;  // class label id per test instance
};

// Distinct non-constant attribute signatures, rejection-sampled until no
// predicate column is all-0 or all-1.
std::vector<std::vector<int>> random_predicates(int num_classes,
                                                int num_attributes,
                                                std::mt19937_64& rng);

// MECE group over the classes; attribute->class subsumption where the
// predicate is 1, attribute--class exclusion where it is 0. Degenerate
// (constant) predicate columns are allowed but reported via `warnings`.
LabelGraph build_attribute_graph(const std::vector<std::vector<int>>& predicates,
                                 const std::vector<std::string>& class_names,
                                 const std::vector<std::string>& attribute_names,
                                 double u_pos, double u_neg,
                                 std::vector<std::string>* warnings = nullptr);

// Block assignment of leaves to parents: leaf l belongs to parent l*P/k.
int hierarchy_parent_of(int leaf, int num_leaves, int num_parents);

// Two-level tree over `num_classes` leaves: MECE over leaves, parent->leaf
// subsumption, parent--parent exclusion. A fraction rho of each leaf's
// training instances carries only the parent label; val/test stay leaf-labeled.
SyntheticDataset build_hierarchy_task(const SyntheticTaskSpec& spec);

// Attribute-transfer task: seen classes train with class + attribute targets,
// unseen classes appear only in val/test and are scored against the unseen
// candidate set.
SyntheticDataset build_zero_shot_task(const SyntheticTaskSpec& spec);

// Pinned parameter sets used by the CLI defaults and the experiment checks.
SyntheticTaskSpec default_hierarchy_spec();
SyntheticTaskSpec default_zero_shot_spec(std::uint64_t seed);

}  // namespace phex
