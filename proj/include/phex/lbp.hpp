#pragma once

#include <array>
#include <map>
#include <vector>

#include "phex/ising.hpp"
#include "phex/marginals.hpp"

namespace phex {

struct LBPOptions {
  int max_iterations = 200;
  // Convergence on max absolute change of normalized log-beliefs.
  double tolerance = 1e-6;
  // Messages damped in log space: new = damping * old + (1 - damping) * raw.
  double damping = 0.5;
};

// Loopy belief propagation on a conditioned Ising model. Binary nodes carry
// (+1, -1) beliefs; a MECE group is carried as a single k-state multinomial
// node whose couplings to an outside node j fold all member couplings J_{j,c_s}
// into one message. Updates run as asynchronous sequential sweeps in ascending
// label order (the group node sits at its smallest member id), all arithmetic
// in the log domain.
class BeliefPropagation {
 public:
  BeliefPropagation(const ConditionedModel& model, const ClampSet& clamps,
                    LBPOptions opts = {});

  // One full sweep over all nodes; returns the max log-belief change.
  double sweep();

  // Sweeps until convergence or max_iterations; returns the marginals.
  MarginalTable run();

  MarginalTable marginals() const;
  int iterations() const { return iterations_; }
  bool converged() const { return converged_; }

  // Exposed for tests and diagnostics.
  std::array<double, 2> log_belief(int label) const;          // {log b(+1), log b(-1)}
  const std::vector<double>& group_log_belief() const { return log_bc_; }
  void update_binary(int label);
  void update_group();

 private:
  struct GroupLink {
    std::vector<double> j_to_members;  // J_{j, c_s} per state s
    double j_sum = 0.0;                // sum_s J_{j, c_s}
  };

  bool is_group_node(int order_entry) const { return order_entry < 0; }
  void check_finite(int iteration) const;

  ConditionedModel model_;
  LBPOptions opts_;
  int n_ = 0;
  int k_ = 0;                          // group size, 0 when absent
  std::vector<int> members_;
  std::vector<int> member_state_;      // label -> state index, -1 otherwise
  std::vector<int> order_;             // node sweep order; -1 marks the group
  std::map<int, int> binary_clamps_;   // non-member label -> +-1
  std::optional<int> group_clamp_;
  std::vector<char> masked_states_;

  std::vector<std::vector<std::pair<int, double>>> adj_;  // binary-binary (nbr, J)
  std::map<int, GroupLink> group_adj_;                    // outside nbr -> link

  std::vector<std::array<double, 2>> log_b_;              // index 0: +1, 1: -1
  std::vector<double> log_bc_;
  std::map<std::pair<int, int>, std::array<double, 2>> bin_msg_;  // (from,to)
  std::map<int, std::vector<double>> msg_to_group_;
  std::map<int, std::array<double, 2>> msg_from_group_;

  int iterations_ = 0;
  bool converged_ = false;
};

MarginalTable run_lbp(const ConditionedModel& model, const ClampSet& clamps = {},
                      const LBPOptions& opts = {});

// Multilabel rule: label i is on when p(y_i = 1) >= 0.5.
std::vector<int> predict_multilabel(const MarginalTable& marginals);

// Multiclass rule: argmax of p(y_i = 1) over the candidate set (defaults to
// the MECE members when present, else all labels); ties break to the lowest
// label id.
int predict_multiclass(const MarginalTable& marginals,
                       std::vector<int> candidates = {});

// Candidate ids ordered by decreasing marginal, ties by lowest id.
std::vector<int> rank_labels(const MarginalTable& marginals,
                             std::vector<int> candidates = {});

}  // namespace phex
