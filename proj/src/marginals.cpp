#include "phex/marginals.hpp"

#include "phex/errors.hpp"

namespace phex {

ClampSet& ClampSet::set(int label, int state) {
  if (state != 1 && state != -1) {
    throw ValidationError("clamp state must be +1 or -1");
  }
  states[label] = state;
  return *this;
}

ClampSet& ClampSet::set_mece(int state) {
  mece_state = state;
  return *this;
}

ClampSet ClampSet::with(int label, int state) const {
  ClampSet out = *this;
  out.set(label, state);
  return out;
}

bool ResolvedClamps::state_allowed(int s) const {
  return !masked_states[s] && (!group_state || *group_state == s);
}

ResolvedClamps resolve_clamps(const ClampSet& clamps,
                              const std::optional<MECEGroup>& group, int n) {
  ResolvedClamps out;
  const int k = group ? static_cast<int>(group->members.size()) : 0;
  out.masked_states.assign(k, 0);
  if (clamps.mece_state) {
    if (!group) throw ValidationError("MECE clamp on a graph without a group");
    if (*clamps.mece_state < 0 || *clamps.mece_state >= k) {
      throw ValidationError("MECE clamp state out of range");
    }
    out.group_state = clamps.mece_state;
  }
  for (const auto& [label, state] : clamps.states) {
    if (label < 0 || label >= n) {
      throw ValidationError("clamped label id out of range: " + std::to_string(label));
    }
    const int member_state = group ? group->state_of(label) : -1;
    if (member_state < 0) {
      out.binary[label] = state;
      continue;
    }
    if (state == 1) {
      if (out.group_state && *out.group_state != member_state) {
        throw ValidationError("clamp contradicting MECE: two members forced on");
      }
      out.group_state = member_state;
    } else {
      out.masked_states[member_state] = 1;
    }
  }
  if (out.group_state && out.masked_states[*out.group_state]) {
    throw ValidationError("clamp contradicting MECE: state both forced and masked");
  }
  return out;
}

}  // namespace phex
