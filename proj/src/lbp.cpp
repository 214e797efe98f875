#include "phex/lbp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phex/errors.hpp"
#include "phex/numeric.hpp"

namespace phex {

namespace {

// Masked / clamped-off states. Large negative instead of -inf keeps every
// subtraction NaN-free; exp() of it underflows to exactly 0.
constexpr double kMaskLog = -1e30;

double floored(double x) { return x > kLogFloor ? x : kLogFloor; }

void normalize2(std::array<double, 2>& v) {
  const double lse = log_sum_exp(v[0], v[1]);
  v[0] -= lse;
  v[1] -= lse;
}

void normalize_vec(std::vector<double>& v) {
  const double lse = log_sum_exp(std::span<const double>(v));
  for (double& x : v) x -= lse;
}

void damp2(std::array<double, 2>& stored, std::array<double, 2> raw, double lambda) {
  normalize2(raw);
  stored[0] = lambda * stored[0] + (1.0 - lambda) * raw[0];
  stored[1] = lambda * stored[1] + (1.0 - lambda) * raw[1];
  normalize2(stored);
}

void damp_vec(std::vector<double>& stored, std::vector<double> raw, double lambda) {
  normalize_vec(raw);
  for (size_t i = 0; i < stored.size(); ++i) {
    stored[i] = lambda * stored[i] + (1.0 - lambda) * raw[i];
  }
  normalize_vec(stored);
}

}  // namespace

BeliefPropagation::BeliefPropagation(const ConditionedModel& model,
                                     const ClampSet& clamps, LBPOptions opts)
    : model_(model), opts_(opts), n_(model.model.n) {
  if (opts_.tolerance <= 0.0) throw ValidationError("LBP tolerance must be > 0");
  if (opts_.damping < 0.0 || opts_.damping >= 1.0) {
    throw ValidationError("LBP damping must lie in [0, 1)");
  }
  if (!all_finite(model_.h_eff)) {
    throw ValidationError("conditioned fields must be finite for LBP");
  }
  for (const auto& [pair, J] : model_.model.couplings) {
    if (!std::isfinite(J)) throw ValidationError("couplings must be finite for LBP");
  }

  member_state_.assign(n_, -1);
  if (model_.model.mece) {
    members_ = model_.model.mece->members;
    k_ = static_cast<int>(members_.size());
    for (int s = 0; s < k_; ++s) member_state_[members_[s]] = s;
  }

  const auto resolved = resolve_clamps(clamps, model_.model.mece, n_);
  binary_clamps_ = resolved.binary;
  group_clamp_ = resolved.group_state;
  masked_states_ = resolved.masked_states;

  // Adjacency. Member-member couplings cannot exist in a normalized graph.
  adj_.assign(n_, {});
  for (const auto& [pair, J] : model_.model.couplings) {
    const auto [i, j] = pair;
    const int si = member_state_[i];
    const int sj = member_state_[j];
    if (si >= 0 && sj >= 0) {
      throw ValidationError(
          "coupling between MECE members; normalize the graph before LBP");
    }
    if (si < 0 && sj < 0) {
      adj_[i].push_back({j, J});
      adj_[j].push_back({i, J});
      bin_msg_[{i, j}] = bin_msg_[{j, i}] = {-std::log(2.0), -std::log(2.0)};
    } else {
      const int outside = si >= 0 ? j : i;
      const int state = si >= 0 ? si : sj;
      auto& link = group_adj_[outside];
      if (link.j_to_members.empty()) link.j_to_members.assign(k_, 0.0);
      link.j_to_members[state] += J;
      link.j_sum += J;
    }
  }
  for (auto& [j, link] : group_adj_) {
    msg_to_group_[j].assign(k_, -std::log(static_cast<double>(k_)));
    msg_from_group_[j] = {-std::log(2.0), -std::log(2.0)};
  }

  // Sweep order: non-member labels ascending; the group node at its smallest
  // member id.
  std::vector<std::pair<int, int>> keyed;
  for (int i = 0; i < n_; ++i) {
    if (member_state_[i] < 0) keyed.push_back({i, i});
  }
  if (k_ > 0) {
    keyed.push_back({*std::min_element(members_.begin(), members_.end()), -1});
  }
  std::sort(keyed.begin(), keyed.end());
  for (const auto& [key, node] : keyed) order_.push_back(node);

  // Uniform start; clamped nodes hold their indicator throughout.
  log_b_.assign(n_, {-std::log(2.0), -std::log(2.0)});
  for (const auto& [i, state] : binary_clamps_) {
    log_b_[i] = state == 1 ? std::array<double, 2>{0.0, kMaskLog}
                           : std::array<double, 2>{kMaskLog, 0.0};
  }
  if (k_ > 0) {
    log_bc_.assign(k_, -std::log(static_cast<double>(k_)));
    if (group_clamp_) {
      for (int s = 0; s < k_; ++s) log_bc_[s] = s == *group_clamp_ ? 0.0 : kMaskLog;
    } else {
      bool any = false;
      for (int s = 0; s < k_; ++s) {
        if (masked_states_[s]) log_bc_[s] = kMaskLog;
        else any = true;
      }
      if (!any) throw ValidationError("infeasible clamp: all group states masked");
      normalize_vec(log_bc_);
    }
  }
}

void BeliefPropagation::update_binary(int i) {
  const bool clamped = binary_clamps_.count(i) > 0;
  if (!clamped) {
    std::array<double, 2> nb = {-model_.h_eff[i], model_.h_eff[i]};
    for (const auto& [j, J] : adj_[i]) {
      const auto& m = bin_msg_.at({j, i});
      nb[0] += m[0];
      nb[1] += m[1];
    }
    if (group_adj_.count(i) > 0) {
      const auto& m = msg_from_group_.at(i);
      nb[0] += m[0];
      nb[1] += m[1];
    }
    normalize2(nb);
    log_b_[i] = nb;
  }

  // Outgoing messages from the (possibly indicator) belief, cavity form
  // b_i / m_{j->i} with the log-floor guarding clamped zeros.
  for (const auto& [j, J] : adj_[i]) {
    const auto& incoming = bin_msg_.at({j, i});
    const double cav_p = floored(log_b_[i][0] - incoming[0]);
    const double cav_m = floored(log_b_[i][1] - incoming[1]);
    std::array<double, 2> raw;
    raw[0] = log_sum_exp(-J + cav_p, J + cav_m);   // to y_j = +1
    raw[1] = log_sum_exp(J + cav_p, -J + cav_m);   // to y_j = -1
    damp2(bin_msg_.at({i, j}), raw, opts_.damping);
  }
  const auto git = group_adj_.find(i);
  if (git != group_adj_.end()) {
    const auto& incoming = msg_from_group_.at(i);
    const double cav_p = floored(log_b_[i][0] - incoming[0]);
    const double cav_m = floored(log_b_[i][1] - incoming[1]);
    std::vector<double> raw(k_);
    for (int s = 0; s < k_; ++s) {
      // Pair log-potential with the group at state s is
      // y_i * (sum_t J_{i,c_t} - 2 J_{i,c_s}).
      const double a = git->second.j_sum - 2.0 * git->second.j_to_members[s];
      raw[s] = log_sum_exp(a + cav_p, -a + cav_m);
    }
    damp_vec(msg_to_group_.at(i), std::move(raw), opts_.damping);
  }
}

void BeliefPropagation::update_group() {
  if (k_ == 0) return;
  if (!group_clamp_) {
    std::vector<double> nb(k_);
    for (int s = 0; s < k_; ++s) {
      if (masked_states_[s]) {
        nb[s] = kMaskLog;
        continue;
      }
      // One-hot state energy over the member fields is 2 h'_{c_s} plus a
      // state-independent constant, dropped by normalization.
      nb[s] = -2.0 * model_.h_eff[members_[s]];
      for (const auto& [j, m] : msg_to_group_) nb[s] += m[s];
    }
    normalize_vec(nb);
    log_bc_ = nb;
  }

  for (auto& [j, link] : group_adj_) {
    const auto& incoming = msg_to_group_.at(j);
    std::array<double, 2> raw = {-std::numeric_limits<double>::infinity(),
                                 -std::numeric_limits<double>::infinity()};
    for (int s = 0; s < k_; ++s) {
      const double a = link.j_sum - 2.0 * link.j_to_members[s];
      const double cav = floored(log_bc_[s] - incoming[s]);
      raw[0] = log_sum_exp(raw[0], a + cav);
      raw[1] = log_sum_exp(raw[1], -a + cav);
    }
    damp2(msg_from_group_.at(j), raw, opts_.damping);
  }
}

double BeliefPropagation::sweep() {
  double max_delta = 0.0;
  for (int node : order_) {
    if (is_group_node(node)) {
      const std::vector<double> before = log_bc_;
      update_group();
      for (int s = 0; s < k_; ++s) {
        // Masked states sit near kMaskLog; exclude them from the residual.
        if (log_bc_[s] < 0.5 * kMaskLog || before[s] < 0.5 * kMaskLog) continue;
        max_delta = std::max(max_delta, std::abs(log_bc_[s] - before[s]));
      }
    } else {
      if (binary_clamps_.count(node) > 0) {
        update_binary(node);
        continue;
      }
      const std::array<double, 2> before = log_b_[node];
      update_binary(node);
      max_delta = std::max(max_delta, std::abs(log_b_[node][0] - before[0]));
      max_delta = std::max(max_delta, std::abs(log_b_[node][1] - before[1]));
    }
  }
  return max_delta;
}

void BeliefPropagation::check_finite(int iteration) const {
  for (int i = 0; i < n_; ++i) {
    if (member_state_[i] >= 0) continue;
    if (std::isnan(log_b_[i][0]) || std::isnan(log_b_[i][1])) {
      throw NumericalError("numerical failure in LBP at iteration " +
                           std::to_string(iteration));
    }
  }
  for (double x : log_bc_) {
    if (std::isnan(x)) {
      throw NumericalError("numerical failure in LBP at iteration " +
                           std::to_string(iteration));
    }
  }
}

MarginalTable BeliefPropagation::run() {
  converged_ = false;
  for (iterations_ = 1; iterations_ <= opts_.max_iterations; ++iterations_) {
    const double delta = sweep();
    check_finite(iterations_);
    if (delta < opts_.tolerance) {
      converged_ = true;
      break;
    }
  }
  iterations_ = std::min(iterations_, opts_.max_iterations);
  return marginals();
}

MarginalTable BeliefPropagation::marginals() const {
  MarginalTable table;
  table.method = "lbp";
  table.iterations = iterations_;
  table.converged = converged_;
  table.p.assign(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    if (member_state_[i] < 0) table.p[i] = std::exp(log_b_[i][0]);
  }
  if (k_ > 0) {
    std::vector<double> dist(k_);
    for (int s = 0; s < k_; ++s) {
      dist[s] = std::exp(log_bc_[s]);
      table.p[members_[s]] = dist[s];
    }
    table.mece_dist = std::move(dist);
    table.mece_members = members_;
  }
  return table;
}

std::array<double, 2> BeliefPropagation::log_belief(int label) const {
  const int s = member_state_[label];
  if (s < 0) return log_b_[label];
  // Member beliefs live on the group node.
  const double on = log_bc_[s];
  double off = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < k_; ++t) {
    if (t != s) off = log_sum_exp(off, log_bc_[t]);
  }
  return {on, off};
}

MarginalTable run_lbp(const ConditionedModel& model, const ClampSet& clamps,
                      const LBPOptions& opts) {
  BeliefPropagation bp(model, clamps, opts);
  return bp.run();
}

std::vector<int> predict_multilabel(const MarginalTable& marginals) {
  std::vector<int> on;
  for (size_t i = 0; i < marginals.p.size(); ++i) {
    if (marginals.p[i] >= 0.5) on.push_back(static_cast<int>(i));
  }
  return on;
}

std::vector<int> rank_labels(const MarginalTable& marginals,
                             std::vector<int> candidates) {
  if (candidates.empty()) {
    if (!marginals.mece_members.empty()) {
      candidates = marginals.mece_members;
    } else {
      candidates.resize(marginals.p.size());
      for (size_t i = 0; i < candidates.size(); ++i) candidates[i] = static_cast<int>(i);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (marginals.p[a] != marginals.p[b]) return marginals.p[a] > marginals.p[b];
    return a < b;
  });
  return candidates;
}

int predict_multiclass(const MarginalTable& marginals, std::vector<int> candidates) {
  const auto ranked = rank_labels(marginals, std::move(candidates));
  if (ranked.empty()) throw ValidationError("multiclass prediction needs candidates");
  return ranked.front();
}

}  // namespace phex
