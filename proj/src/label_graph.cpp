#include "phex/label_graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "phex/errors.hpp"
#include "phex/numeric.hpp"

namespace phex {

double strength_from_u(double u) {
  if (!std::isfinite(u) || u < 0.0) {
    throw ValidationError("edge strength u must be finite and >= 0");
  }
  return std::exp(-4.0 * u);
}

double strength_from_q(double q) {
  if (!std::isfinite(q) || q <= 0.0 || q > 1.0) {
    throw ValidationError(
        "edge strength q must lie in (0, 1]; use a hard relation for q = 0");
  }
  return -std::log(q) / 4.0;
}

EdgeStrength EdgeStrength::finite(double u) {
  if (!std::isfinite(u) || u < 0.0) {
    throw ValidationError("edge strength u must be finite and >= 0");
  }
  return EdgeStrength(false, u);
}

EdgeStrength EdgeStrength::from_q(double q) {
  return EdgeStrength(false, strength_from_q(q));
}

EdgeStrength EdgeStrength::hard_relation() { return EdgeStrength(true, 0.0); }

double EdgeStrength::u() const {
  if (hard_) throw ValidationError("hard edge has no finite coupling u");
  return u_;
}

double EdgeStrength::q() const { return hard_ ? 0.0 : std::exp(-4.0 * u_); }

bool EdgeStrength::exceeds_cap() const { return !hard_ && u_ > kMaxCoupling; }

bool MECEGroup::contains(int label) const { return state_of(label) >= 0; }

int MECEGroup::state_of(int label) const {
  for (size_t i = 0; i < members.size(); ++i) {
    if (members[i] == label) return static_cast<int>(i);
  }
  return -1;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& e : errors) os << "error[" << e.code << "]: " << e.message << "\n";
  for (const auto& w : warnings) os << "warning[" << w.code << "]: " << w.message << "\n";
  return os.str();
}

LabelGraph::LabelGraph(std::vector<std::string> label_names)
    : labels(std::move(label_names)) {}

int LabelGraph::label_id(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (labels[i] == name) return i;
  }
  return -1;
}

void LabelGraph::add_exclusion(int a, int b, EdgeStrength s) {
  if (a > b) std::swap(a, b);
  edges.push_back({RelationKind::kExclusion, a, b, s});
}

void LabelGraph::add_subsumption(int parent, int child, EdgeStrength s) {
  edges.push_back({RelationKind::kSubsumption, parent, child, s});
}

namespace {
int require_label(const LabelGraph& g, const std::string& name) {
  const int id = g.label_id(name);
  if (id < 0) throw ValidationError("unknown label: " + name);
  return id;
}
}  // namespace

void LabelGraph::add_exclusion(const std::string& a, const std::string& b,
                               EdgeStrength s) {
  add_exclusion(require_label(*this, a), require_label(*this, b), s);
}

void LabelGraph::add_subsumption(const std::string& parent,
                                 const std::string& child, EdgeStrength s) {
  add_subsumption(require_label(*this, parent), require_label(*this, child), s);
}

void LabelGraph::set_mece(std::vector<int> members) {
  mece = MECEGroup{std::move(members)};
}

bool LabelGraph::has_hard_edges() const {
  return std::any_of(edges.begin(), edges.end(),
                     [](const RelationEdge& e) { return e.strength.hard(); });
}

ValidationReport validate(const LabelGraph& graph) {
  ValidationReport report;
  auto error = [&](const std::string& code, const std::string& msg) {
    report.errors.push_back({code, msg});
  };
  auto warn = [&](const std::string& code, const std::string& msg) {
    report.warnings.push_back({code, msg});
  };

  std::set<std::string> seen_names;
  for (int i = 0; i < graph.size(); ++i) {
    const std::string& name = graph.labels[i];
    if (name.empty()) error("empty-label", "label " + std::to_string(i) + " has an empty name");
    if (!seen_names.insert(name).second) {
      error("duplicate-label", "label name '" + name + "' appears more than once");
    }
  }

  std::set<std::pair<int, int>> seen_pairs;
  for (const RelationEdge& e : graph.edges) {
    if (e.a < 0 || e.a >= graph.size() || e.b < 0 || e.b >= graph.size()) {
      error("unknown-label", "edge endpoint out of range: (" +
                                 std::to_string(e.a) + ", " + std::to_string(e.b) + ")");
      continue;
    }
    if (e.a == e.b) {
      error("self-edge", "self-edge on label '" + graph.labels[e.a] + "'");
      continue;
    }
    const auto pair = std::minmax(e.a, e.b);
    if (!seen_pairs.insert({pair.first, pair.second}).second) {
      error("duplicate-pair", "more than one edge on pair ('" +
                                  graph.labels[pair.first] + "', '" +
                                  graph.labels[pair.second] + "')");
    }
    if (e.kind == RelationKind::kExclusion && e.a > e.b) {
      error("bad-direction", "exclusion endpoints must be stored with a < b");
    }
    if (e.strength.exceeds_cap()) {
      warn("strength-cap", "coupling u > 16 on pair ('" + graph.labels[e.a] +
                               "', '" + graph.labels[e.b] +
                               "') saturates double precision and is clamped "
                               "when compiled");
    }
  }

  if (graph.mece) {
    const auto& members = graph.mece->members;
    if (members.size() < 2) {
      error("mece-too-small", "MECE group needs at least 2 members");
    }
    std::set<int> member_set;
    for (int m : members) {
      if (m < 0 || m >= graph.size()) {
        error("unknown-label", "MECE member id out of range: " + std::to_string(m));
      } else if (!member_set.insert(m).second) {
        error("duplicate-label", "MECE member repeated: '" + graph.labels[m] + "'");
      }
    }
    for (const RelationEdge& e : graph.edges) {
      if (e.a < 0 || e.a >= graph.size() || e.b < 0 || e.b >= graph.size()) continue;
      const bool both = member_set.count(e.a) > 0 && member_set.count(e.b) > 0;
      if (!both) continue;
      if (e.kind == RelationKind::kExclusion) {
        error("exclusion-inside-mece",
              "exclusion between MECE members ('" + graph.labels[e.a] + "', '" +
                  graph.labels[e.b] + "'); run normalize_mece");
      } else {
        error("subsumption-inside-mece",
              "subsumption between MECE members ('" + graph.labels[e.a] +
                  "', '" + graph.labels[e.b] + "') contradicts exactly-one-hot");
      }
    }
  }
  return report;
}

LabelGraph normalize_mece(const LabelGraph& graph) {
  if (!graph.mece) return graph;
  LabelGraph out = graph;
  out.edges.clear();
  for (const RelationEdge& e : graph.edges) {
    const bool both = graph.mece->contains(e.a) && graph.mece->contains(e.b);
    if (!both) {
      out.edges.push_back(e);
      continue;
    }
    if (e.kind == RelationKind::kSubsumption) {
      throw ValidationError("subsumption between MECE members ('" +
                            graph.labels[e.a] + "' subsumes '" +
                            graph.labels[e.b] +
                            "') is unsatisfiable under exactly-one-hot");
    }
    // Exclusion inside the group replicates the MECE constraint; drop it.
  }
  return out;
}

LabelGraph scale_strengths(const LabelGraph& graph, double factor) {
  if (!std::isfinite(factor) || factor < 0.0) {
    throw ValidationError("strength scale factor must be finite and >= 0");
  }
  LabelGraph out = graph;
  for (RelationEdge& e : out.edges) {
    if (!e.strength.hard()) {
      e.strength = EdgeStrength::finite(e.strength.u() * factor);
    }
  }
  return out;
}

LabelGraph with_uniform_strength(const LabelGraph& graph, double u) {
  LabelGraph out = graph;
  for (RelationEdge& e : out.edges) e.strength = EdgeStrength::finite(u);
  return out;
}

LabelGraph as_hard(const LabelGraph& graph) {
  LabelGraph out = graph;
  for (RelationEdge& e : out.edges) e.strength = EdgeStrength::hard_relation();
  return out;
}

}  // namespace phex
