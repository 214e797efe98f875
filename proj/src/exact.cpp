#include "phex/exact.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "phex/errors.hpp"
#include "phex/numeric.hpp"

namespace phex {

namespace {

struct Accumulators {
  LogAccumulator total;
  std::vector<LogAccumulator> label_on;   // y_i = +1
  std::vector<LogAccumulator> group_state;

  explicit Accumulators(int n, int k) : label_on(n), group_state(k) {}

  void add(std::span<const int> y, int state, double log_w) {
    total.add(log_w);
    for (size_t i = 0; i < y.size(); ++i) {
      if (y[i] == 1) label_on[i].add(log_w);
    }
    if (state >= 0) group_state[state].add(log_w);
  }
};

// Walks every configuration compatible with the resolved clamps (one-hot
// group states when a MECE group exists) and hands it to visit(y, state).
template <typename Visit>
void enumerate_configurations(int n, const std::optional<MECEGroup>& group,
                              const ResolvedClamps& clamps, Visit&& visit) {
  // A MECE group contributes k one-hot states instead of 2^k, so the bound is
  // on the enumerated state count, not the raw label count.
  const int members = group ? static_cast<int>(group->members.size()) : 0;
  const double log2_states =
      (n - members) +
      (members > 0 ? std::log2(static_cast<double>(members)) : 0.0);
  if (log2_states > kMaxExactLabels) {
    throw ValidationError("enumeration bound exceeded: ~2^" +
                          std::to_string(static_cast<int>(log2_states)) +
                          " states > 2^" + std::to_string(kMaxExactLabels));
  }
  std::vector<int> y(n, -1);
  std::vector<char> is_member(n, 0);
  if (group) {
    for (int m : group->members) is_member[m] = 1;
  }
  std::vector<int> free_labels;
  for (int i = 0; i < n; ++i) {
    if (is_member[i]) continue;
    const auto it = clamps.binary.find(i);
    if (it != clamps.binary.end()) {
      y[i] = it->second;
    } else {
      free_labels.push_back(i);
    }
  }
  const int f = static_cast<int>(free_labels.size());
  const unsigned long long combos = 1ull << f;

  auto sweep_free = [&](int state) {
    for (unsigned long long mask = 0; mask < combos; ++mask) {
      for (int t = 0; t < f; ++t) {
        y[free_labels[t]] = (mask >> t) & 1ull ? 1 : -1;
      }
      visit(std::span<const int>(y), state);
    }
  };

  if (!group) {
    sweep_free(-1);
    return;
  }
  const int k = static_cast<int>(group->members.size());
  for (int s = 0; s < k; ++s) {
    if (!clamps.state_allowed(s)) continue;
    for (int m = 0; m < k; ++m) y[group->members[m]] = (m == s) ? 1 : -1;
    sweep_free(s);
  }
}

MarginalTable assemble(const Accumulators& acc, int n,
                       const std::optional<MECEGroup>& group,
                       const ResolvedClamps& clamps, const std::string& method) {
  if (acc.total.empty()) {
    throw ValidationError("infeasible clamp: no legal configuration remains");
  }
  const double log_z = acc.total.log_total();
  MarginalTable table;
  table.method = method;
  table.p.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto it = clamps.binary.find(i);
    if (it != clamps.binary.end()) {
      table.p[i] = it->second == 1 ? 1.0 : 0.0;
    } else {
      table.p[i] = acc.label_on[i].empty()
                       ? 0.0
                       : std::exp(acc.label_on[i].log_total() - log_z);
    }
  }
  if (group) {
    const int k = static_cast<int>(group->members.size());
    std::vector<double> dist(k, 0.0);
    for (int s = 0; s < k; ++s) {
      dist[s] = acc.group_state[s].empty()
                    ? 0.0
                    : std::exp(acc.group_state[s].log_total() - log_z);
      table.p[group->members[s]] = dist[s];
    }
    table.mece_dist = std::move(dist);
    table.mece_members = group->members;
  }
  return table;
}

}  // namespace

MarginalTable exact_marginals(const ConditionedModel& model,
                              const ClampSet& clamps) {
  const int n = model.model.n;
  const auto resolved = resolve_clamps(clamps, model.model.mece, n);
  const int k = model.model.mece ? static_cast<int>(model.model.mece->members.size()) : 0;
  Accumulators acc(n, k);
  enumerate_configurations(n, model.model.mece, resolved,
                           [&](std::span<const int> y, int state) {
                             acc.add(y, state, -energy(model, y));
                           });
  return assemble(acc, n, model.model.mece, resolved, "exact");
}

MarginalTable exact_hex_marginals(const LabelGraph& graph,
                                  const EvidenceVector& z,
                                  const ClampSet& clamps) {
  const int n = graph.size();
  if (static_cast<int>(z.size()) != n) {
    throw ValidationError("evidence vector length does not match label count");
  }
  const auto resolved = resolve_clamps(clamps, graph.mece, n);
  const int k = graph.mece ? static_cast<int>(graph.mece->members.size()) : 0;
  Accumulators acc(n, k);
  enumerate_configurations(
      n, graph.mece, resolved, [&](std::span<const int> y, int state) {
        double log_w = 0.0;
        for (const RelationEdge& e : graph.edges) {
          if (e.strength.hard()) {
            const bool legal = e.kind == RelationKind::kExclusion
                                   ? !(y[e.a] == 1 && y[e.b] == 1)
                                   : !(y[e.parent()] == -1 && y[e.child()] == 1);
            if (!legal) return;
          } else {
            const double u = std::min(e.strength.u(), kMaxCoupling);
            log_w -= e.kind == RelationKind::kExclusion
                         ? pair_energy_exclusion(y[e.a], y[e.b], u)
                         : pair_energy_subsumption(y[e.parent()], y[e.child()], u);
          }
        }
        for (int i = 0; i < n; ++i) log_w += z[i] * y[i];
        acc.add(y, state, log_w);
      });
  return assemble(acc, n, graph.mece, resolved, "hex");
}

MarginalTable exact_conditional(const ConditionedModel& model,
                                const ClampSet& clamps, int target) {
  if (target < 0 || target >= model.model.n) {
    throw ValidationError("conditional target out of range");
  }
  return exact_marginals(model, clamps.with(target, 1));
}

}  // namespace phex
