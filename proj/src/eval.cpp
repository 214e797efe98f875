#include "phex/eval.hpp"

#include <algorithm>

#include "phex/errors.hpp"

namespace phex {

double EvalReport::top1() const {
  const auto it = topk.find(1);
  return it == topk.end() ? 0.0 : it->second;
}

EvalReport evaluate(const std::vector<MarginalTable>& outputs,
                    const std::vector<int>& truth,
                    const std::vector<int>& candidates,
                    const std::vector<int>& top_k) {
  if (outputs.size() != truth.size()) {
    throw ValidationError("evaluate: " + std::to_string(outputs.size()) +
                          " outputs vs " + std::to_string(truth.size()) +
                          " truth labels");
  }
  for (int k : top_k) {
    if (k < 1) throw ValidationError("top-k cutoffs must be >= 1");
  }

  EvalReport report;
  report.num_instances = static_cast<int>(outputs.size());
  std::map<int, int> hits;
  for (int k : top_k) hits[k] = 0;

  for (size_t i = 0; i < outputs.size(); ++i) {
    const std::vector<int> ranked = rank_labels(outputs[i], candidates);
    if (ranked.empty()) throw ValidationError("evaluate: empty candidate set");
    const int t = truth[i];
    ++report.per_class_total[t];
    if (ranked.front() == t) ++report.per_class_correct[t];
    for (auto& [k, count] : hits) {
      const auto stop = ranked.begin() + std::min<size_t>(k, ranked.size());
      if (std::find(ranked.begin(), stop, t) != stop) ++count;
    }
    if (i == 0) {
      report.method = outputs[i].method;
    } else if (report.method != outputs[i].method) {
      report.method = "mixed";
    }
    report.iterations += outputs[i].iterations;
  }

  for (const auto& [k, count] : hits) {
    report.topk[k] = report.num_instances == 0
                         ? 0.0
                         : static_cast<double>(count) / report.num_instances;
  }
  double class_sum = 0.0;
  for (const auto& [label, total] : report.per_class_total) {
    const auto it = report.per_class_correct.find(label);
    const int correct = it == report.per_class_correct.end() ? 0 : it->second;
    class_sum += static_cast<double>(correct) / total;
  }
  report.per_class_mean = report.per_class_total.empty()
                              ? 0.0
                              : class_sum / report.per_class_total.size();
  return report;
}

}  // namespace phex
