#pragma once

#include <cstdint>
#include <vector>

#include "phex/exact.hpp"
#include "phex/lbp.hpp"

namespace phex {

// A single observed label. Labels absent from an instance's target list are
// hidden and get marginalized out, never treated as negatives.
struct Target {
  int label = -1;
  int state = 1;  // +1 / -1
};

struct TrainingInstance {
  std::vector<double> x;
  std::vector<Target> targets;
};

enum class Inference { kExact, kLbp };

// Negative log likelihood of the observed labels: sum over targets of
// -log p(y_t = s_t | z), each term a separate marginal query. Returns +inf
// when a queried marginal is exactly zero.
double nll_loss(const IsingModel& model, const EvidenceVector& z,
                const std::vector<Target>& targets, Inference method,
                const LBPOptions& lbp_opts = {});

// Same loss under hard relation semantics (enumeration over legal states).
// This is where structurally impossible targets surface as +inf.
double nll_loss_hex(const LabelGraph& graph, const EvidenceVector& z,
                    const std::vector<Target>& targets);

// dL/dz: per target, the clamped-phase expectation (target clamped to its
// state, one at a time) minus the unclamped expectation, negated and summed.
std::vector<double> grad_scores(const IsingModel& model, const EvidenceVector& z,
                                const std::vector<Target>& targets,
                                Inference method, const LBPOptions& lbp_opts = {});

struct GradReport {
  std::vector<double> analytic;
  std::vector<double> numeric;   // central differences of nll_loss
  double max_rel_error = 0.0;
};

GradReport finite_difference_check(const IsingModel& model,
                                   const EvidenceVector& z,
                                   const std::vector<Target>& targets,
                                   Inference method, double epsilon = 1e-5,
                                   const LBPOptions& lbp_opts = {});

// Linear stand-in for the local classifiers: z = W x + bias.
struct LinearScorer {
  int n = 0;
  int d = 0;
  std::vector<std::vector<double>> weights;  // n rows of length d
  std::vector<double> bias;

  static LinearScorer zeros(int n, int d);
  EvidenceVector score(const std::vector<double>& x) const;
};

struct TrainOptions {
  double learning_rate = 0.05;
  int epochs = 50;
  int batch_size = 16;
  std::uint64_t shuffle_seed = 0;
  Inference inference = Inference::kExact;
  LBPOptions lbp;
};

struct TrainResult {
  LinearScorer scorer;
  std::vector<double> epoch_loss;  // mean per-instance NLL, one entry per epoch
};

// Plain SGD on the summed NLL, gradients chained through z = W x + bias.
// Throws NumericalError if the loss goes non-finite.
TrainResult train_linear(const LinearScorer& init,
                         const std::vector<TrainingInstance>& data,
                         const IsingModel& model, const TrainOptions& opts);

enum class StrengthMode {
  kUniform,      // every edge gets the candidate u
  kScalePriors,  // per-edge prior weights multiplied by the candidate
};

struct GridSearchRow {
  double u = 0.0;
  double val_accuracy = 0.0;
};

struct GridSearchResult {
  double best_u = 0.0;
  std::vector<GridSearchRow> rows;
};

const std::vector<double>& default_strength_grid();

// Trains a fresh scorer per candidate strength and returns the candidate with
// the best validation top-1 accuracy over class_candidates; ties break to the
// smaller u.
GridSearchResult grid_search_strength(const std::vector<double>& candidates,
                                      const LabelGraph& graph, StrengthMode mode,
                                      const std::vector<TrainingInstance>& train,
                                      const std::vector<TrainingInstance>& val,
                                      const std::vector<int>& class_candidates,
                                      int dim, const TrainOptions& opts);

// Top-1 accuracy of a scorer on labeled instances, argmax over candidates.
double multiclass_accuracy(const LinearScorer& scorer, const IsingModel& model,
                           const std::vector<TrainingInstance>& data,
                           const std::vector<int>& candidates, Inference method,
                           const LBPOptions& lbp_opts = {});

}  // namespace phex
