#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "phex/label_graph.hpp"

namespace phex {

// Per-label local classifier scores z for one instance.
using EvidenceVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Pairwise relation factors. Absolute factors are 1 on the legal state space
// and 0 on the illegal state; probabilistic factors place q on the illegal
// state instead. Exclusion is illegal at (1,1); subsumption (y1 subsumes y2)
// is illegal at (-1,1).
// ---------------------------------------------------------------------------

double phi_abs_exclusion(int y1, int y2);
double phi_abs_subsumption(int y_parent, int y_child);
inline double phi_abs_none(int, int) { return 1.0; }

double phi_prob_exclusion(int y1, int y2, double q);
double phi_prob_subsumption(int y_parent, int y_child, double q);

// Equivalent pairwise Ising energies, q = exp(-4u). Exclusion:
// u*y1*y2 + u*y1 + u*y2 (-u legal, 3u at (1,1)). Subsumption:
// -u*y1*y2 - u*y1 + u*y2 (-u legal, 3u at (-1,1)).
double pair_energy_exclusion(int y1, int y2, double u);
double pair_energy_subsumption(int y_parent, int y_child, double u);

// ---------------------------------------------------------------------------
// Compiled model: p(y) ∝ exp(-sum J_ij y_i y_j - sum h_i y_i), beta fixed to 1.
// ---------------------------------------------------------------------------

struct IsingModel {
  int n = 0;
  // Keyed by (i, j) with i < j; entries exist exactly for graph edges.
  std::map<std::pair<int, int>, double> couplings;
  std::vector<double> fields;
  std::optional<MECEGroup> mece;

  static constexpr double beta = 1.0;

  double coupling(int i, int j) const;  // 0 when no edge
};

// Sums the per-edge energies into (J, h): exclusion (i,j) adds +u to J_ij and
// +u to both fields; subsumption parent->child adds -u to J, -u to h_parent,
// +u to h_child. Finite couplings are clamped at kMaxCoupling. Hard edges are
// rejected; they belong to the enumeration oracle.
IsingModel compile(const LabelGraph& graph);

// Model with evidence absorbed into the fields: h'_i = h_i - z_i.
struct ConditionedModel {
  IsingModel model;
  std::vector<double> h_eff;
};

ConditionedModel condition(const IsingModel& model, const EvidenceVector& z);

// E(y) = sum J_ij y_i y_j + sum h'_i y_i over spins y in {-1,+1}^n. The MECE
// constraint is not enforced here.
double energy(const ConditionedModel& model, std::span<const int> y);

}  // namespace phex
