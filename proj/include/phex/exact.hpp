#pragma once

#include "phex/ising.hpp"
#include "phex/marginals.hpp"

namespace phex {

// Enumeration bound as a log2 state count: 2^n states for n free labels, with
// a MECE group counting k states rather than 2^k. The oracle must stay fast
// in test suites; exceeding the bound is an error, not a warning.
inline constexpr int kMaxExactLabels = 24;

// Exact marginals of the conditioned Ising model by enumeration over all
// legal configurations: 2^n, or k * 2^(n-k) with the MECE one-hot states.
MarginalTable exact_marginals(const ConditionedModel& model,
                              const ClampSet& clamps = {});

// Exact marginals under hard relation semantics: configurations violating a
// hard edge's legal state space are excluded, soft edges contribute energy,
// and evidence enters as exp(z_i y_i). Throws "infeasible clamp" when no
// configuration survives.
MarginalTable exact_hex_marginals(const LabelGraph& graph,
                                  const EvidenceVector& z,
                                  const ClampSet& clamps = {});

// exact_marginals with the target added to the clamps at state +1.
MarginalTable exact_conditional(const ConditionedModel& model,
                                const ClampSet& clamps, int target);

}  // namespace phex
