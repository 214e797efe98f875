#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "phex/lbp.hpp"
#include "phex/marginals.hpp"

namespace phex {

struct EvalReport {
  std::map<int, double> topk;            // cutoff -> accuracy
  double per_class_mean = 0.0;           // unweighted mean of class accuracies
  int num_instances = 0;
  std::map<int, int> per_class_total;    // truth label id -> instance count
  std::map<int, int> per_class_correct;  // truth label id -> top-1 hits
  // Method metadata; u is left NaN unless the caller ran a strength sweep.
  double u = std::numeric_limits<double>::quiet_NaN();
  std::string method;
  long long iterations = 0;              // summed over instances

  double top1() const;
};

// Rank-based accuracies over per-instance marginal tables. A top-k hit means
// the true label appears among the k best candidates, ties broken by lowest
// label id (via rank_labels). Method metadata is aggregated from the tables.
EvalReport evaluate(const std::vector<MarginalTable>& outputs,
                    const std::vector<int>& truth,
                    const std::vector<int>& candidates,
                    const std::vector<int>& top_k = {1, 5});

}  // namespace phex
