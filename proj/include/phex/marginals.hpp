#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phex/label_graph.hpp"

namespace phex {

// Label -> state assignments held fixed during inference. A +1 clamp on a
// MECE member is translated to the group-state clamp; a -1 clamp on a member
// masks that group state.
struct ClampSet {
  std::map<int, int> states;          // label id -> +1 / -1
  std::optional<int> mece_state;      // group state index

  bool empty() const { return states.empty() && !mece_state; }
  ClampSet& set(int label, int state);
  ClampSet& set_mece(int state);
  ClampSet with(int label, int state) const;
};

// ClampSet after translating member clamps against a concrete group.
struct ResolvedClamps {
  std::map<int, int> binary;          // non-member label id -> +1 / -1
  std::optional<int> group_state;
  std::vector<char> masked_states;    // per group state, 1 = excluded

  bool state_allowed(int s) const;
};

ResolvedClamps resolve_clamps(const ClampSet& clamps,
                              const std::optional<MECEGroup>& group, int n);

struct MarginalTable {
  std::vector<double> p;                        // p(y_i = 1 | z, clamps)
  std::optional<std::vector<double>> mece_dist; // distribution over group states
  std::vector<int> mece_members;                // label ids behind mece_dist
  std::string method;
  int iterations = 0;
  bool converged = true;

  double expectation(int label) const { return 2.0 * p[label] - 1.0; }
};

}  // namespace phex
