#pragma once

#include <optional>
#include <string>
#include <vector>

namespace phex {

// q = exp(-4u) maps an Ising coupling magnitude u to the factor value placed
// on the illegal state of a relation. u = 0 is the non-relation limit (q = 1);
// hard relations are q = 0 (u = +inf).
double strength_from_u(double u);

// Inverse map u = -ln(q) / 4 for q in (0, 1]. q <= 0 is rejected here; callers
// wanting a hard relation must opt in via EdgeStrength::hard_relation().
double strength_from_q(double q);

class EdgeStrength {
 public:
  static EdgeStrength finite(double u);
  static EdgeStrength from_q(double q);
  static EdgeStrength hard_relation();

  bool hard() const { return hard_; }
  double u() const;          // throws for hard edges
  double q() const;          // 0 for hard edges
  bool exceeds_cap() const;  // finite u above kMaxCoupling

 private:
  EdgeStrength(bool hard, double u) : hard_(hard), u_(u) {}
  bool hard_ = false;
  double u_ = 0.0;
};

enum class RelationKind { kExclusion, kSubsumption };

// Exclusion endpoints are stored with a < b. Subsumption is ordered:
// a subsumes b, i.e. b = +1 forces a = +1.
struct RelationEdge {
  RelationKind kind;
  int a = -1;
  int b = -1;
  EdgeStrength strength = EdgeStrength::finite(0.0);

  int parent() const { return a; }
  int child() const { return b; }
};

// Mutually exclusive and collectively exhaustive group: exactly one member is
// +1 in every legal configuration.
struct MECEGroup {
  std::vector<int> members;

  bool contains(int label) const;
  int state_of(int label) const;  // index into members, -1 if absent
};

struct ValidationIssue {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
  std::string summary() const;
};

// A pHEX label-relation graph: labels indexed 0..n-1, typed relation edges,
// and at most one MECE group.
struct LabelGraph {
  std::vector<std::string> labels;
  std::vector<RelationEdge> edges;
  std::optional<MECEGroup> mece;

  LabelGraph() = default;
  explicit LabelGraph(std::vector<std::string> label_names);

  int size() const { return static_cast<int>(labels.size()); }
  int label_id(const std::string& name) const;  // -1 if unknown

  void add_exclusion(int a, int b, EdgeStrength s);
  void add_subsumption(int parent, int child, EdgeStrength s);
  void add_exclusion(const std::string& a, const std::string& b, EdgeStrength s);
  void add_subsumption(const std::string& parent, const std::string& child,
                       EdgeStrength s);
  void set_mece(std::vector<int> members);

  bool has_hard_edges() const;
};

ValidationReport validate(const LabelGraph& graph);

// Drops exclusion edges between two MECE members (they replicate the group
// constraint). A subsumption edge strictly inside the group is contradictory
// and throws. Idempotent.
LabelGraph normalize_mece(const LabelGraph& graph);

// Every edge's u multiplied by factor (hard edges stay hard).
LabelGraph scale_strengths(const LabelGraph& graph, double factor);

// Every edge's strength replaced by the same finite u.
LabelGraph with_uniform_strength(const LabelGraph& graph, double u);

// Every edge made hard; the HEX limit of the graph.
LabelGraph as_hard(const LabelGraph& graph);

}  // namespace phex
