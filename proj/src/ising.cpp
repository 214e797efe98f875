#include "phex/ising.hpp"

#include <algorithm>
#include <cmath>

#include "phex/errors.hpp"
#include "phex/numeric.hpp"

namespace phex {

namespace {
void check_spin(int y) {
  if (y != 1 && y != -1) throw ValidationError("spin values must be +1 or -1");
}
}  // namespace

double phi_abs_exclusion(int y1, int y2) {
  check_spin(y1);
  check_spin(y2);
  return (y1 == 1 && y2 == 1) ? 0.0 : 1.0;
}

double phi_abs_subsumption(int y_parent, int y_child) {
  check_spin(y_parent);
  check_spin(y_child);
  return (y_parent == -1 && y_child == 1) ? 0.0 : 1.0;
}

double phi_prob_exclusion(int y1, int y2, double q) {
  check_spin(y1);
  check_spin(y2);
  return (y1 == 1 && y2 == 1) ? q : 1.0;
}

double phi_prob_subsumption(int y_parent, int y_child, double q) {
  check_spin(y_parent);
  check_spin(y_child);
  return (y_parent == -1 && y_child == 1) ? q : 1.0;
}

double pair_energy_exclusion(int y1, int y2, double u) {
  check_spin(y1);
  check_spin(y2);
  return u * y1 * y2 + u * y1 + u * y2;
}

double pair_energy_subsumption(int y_parent, int y_child, double u) {
  check_spin(y_parent);
  check_spin(y_child);
  return -u * y_parent * y_child - u * y_parent + u * y_child;
}

double IsingModel::coupling(int i, int j) const {
  if (i > j) std::swap(i, j);
  const auto it = couplings.find({i, j});
  return it == couplings.end() ? 0.0 : it->second;
}

IsingModel compile(const LabelGraph& graph) {
  IsingModel model;
  model.n = graph.size();
  model.fields.assign(model.n, 0.0);
  model.mece = graph.mece;

  for (const RelationEdge& e : graph.edges) {
    if (e.strength.hard()) {
      throw ValidationError(
          "hard-edge unsupported in compile; use the enumeration oracle for "
          "hard relations");
    }
    if (e.a < 0 || e.a >= model.n || e.b < 0 || e.b >= model.n || e.a == e.b) {
      throw ValidationError("compile requires a validated graph");
    }
    const double u = std::min(e.strength.u(), kMaxCoupling);
    const auto key = std::minmax(e.a, e.b);
    if (e.kind == RelationKind::kExclusion) {
      model.couplings[{key.first, key.second}] += u;
      model.fields[e.a] += u;
      model.fields[e.b] += u;
    } else {
      model.couplings[{key.first, key.second}] += -u;
      model.fields[e.parent()] += -u;
      model.fields[e.child()] += u;
    }
  }
  return model;
}

ConditionedModel condition(const IsingModel& model, const EvidenceVector& z) {
  if (static_cast<int>(z.size()) != model.n) {
    throw ValidationError("evidence vector length " + std::to_string(z.size()) +
                          " does not match label count " +
                          std::to_string(model.n));
  }
  if (!all_finite(z)) throw ValidationError("evidence scores must be finite");
  ConditionedModel cm{model, model.fields};
  for (int i = 0; i < model.n; ++i) cm.h_eff[i] -= z[i];
  return cm;
}

double energy(const ConditionedModel& cm, std::span<const int> y) {
  if (static_cast<int>(y.size()) != cm.model.n) {
    throw ValidationError("configuration length does not match label count");
  }
  double e = 0.0;
  for (const auto& [pair, J] : cm.model.couplings) {
    e += J * y[pair.first] * y[pair.second];
  }
  for (int i = 0; i < cm.model.n; ++i) e += cm.h_eff[i] * y[i];
  return e;
}

}  // namespace phex
