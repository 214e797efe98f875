#include <doctest.h>

#include <cmath>

#include "phex/errors.hpp"
#include "phex/exact.hpp"
#include "phex/label_graph.hpp"
#include "test_util.hpp"

using namespace phex;

namespace {

ConditionedModel conditioned(const LabelGraph& g, const EvidenceVector& z) {
  return condition(compile(normalize_mece(g)), z);
}

}  // namespace

TEST_SUITE("clamps") {

TEST_CASE("ClampSet validates states and copies via with()") {
  ClampSet c;
  c.set(2, 1);
  CHECK_THROWS_AS(c.set(3, 0), ValidationError);
  const ClampSet d = c.with(4, -1);
  CHECK(c.states.size() == 1);
  CHECK(d.states.size() == 2);
  CHECK(d.states.at(4) == -1);
  CHECK(c.empty() == false);
  CHECK(ClampSet{}.empty());
}

TEST_CASE("member +1 clamp becomes a group-state clamp") {
  MECEGroup group{{1, 3, 5}};
  const ResolvedClamps r = resolve_clamps(ClampSet{}.set(3, 1), group, 6);
  REQUIRE(r.group_state.has_value());
  CHECK(*r.group_state == 1);
  CHECK(r.binary.empty());
}

TEST_CASE("member -1 clamp masks its state") {
  MECEGroup group{{1, 3, 5}};
  const ResolvedClamps r = resolve_clamps(ClampSet{}.set(5, -1), group, 6);
  CHECK_FALSE(r.group_state.has_value());
  CHECK(r.masked_states == std::vector<char>{0, 0, 1});
  CHECK(r.state_allowed(0));
  CHECK_FALSE(r.state_allowed(2));
}

TEST_CASE("non-member clamps stay binary") {
  MECEGroup group{{1, 3}};
  const ResolvedClamps r = resolve_clamps(ClampSet{}.set(0, -1), group, 4);
  CHECK(r.binary.at(0) == -1);
}

TEST_CASE("two members forced on is a contradiction") {
  MECEGroup group{{0, 1}};
  CHECK_THROWS_WITH_AS(
      resolve_clamps(ClampSet{}.set(0, 1).set(1, 1), group, 2),
      doctest::Contains("two members forced on"), ValidationError);
}

TEST_CASE("forcing a masked state is a contradiction") {
  // set() overwrites per label, so build the contradiction via mece_state:
  // the group is pinned to member 0 while member 0 is forced off.
  MECEGroup group{{0, 1}};
  CHECK_THROWS_AS(
      resolve_clamps(ClampSet{}.set_mece(0).set(0, -1), group, 2),
      ValidationError);
}

TEST_CASE("mece_state requires a group and a valid index") {
  CHECK_THROWS_AS(resolve_clamps(ClampSet{}.set_mece(0), std::nullopt, 3),
                  ValidationError);
  MECEGroup group{{0, 1}};
  CHECK_THROWS_AS(resolve_clamps(ClampSet{}.set_mece(7), group, 2),
                  ValidationError);
}

TEST_CASE("clamp label ids are range checked") {
  CHECK_THROWS_AS(resolve_clamps(ClampSet{}.set(9, 1), std::nullopt, 2),
                  ValidationError);
}

}  // TEST_SUITE

TEST_SUITE("exact") {

TEST_CASE("single label, no relations: p = sigmoid(2z)") {
  LabelGraph g({"solo"});
  CHECK(exact_marginals(conditioned(g, {0.0})).p[0] == doctest::Approx(0.5));
  // h' = -0.5 (z = 0.5): p = 1 / (1 + e^{-1})
  CHECK(exact_marginals(conditioned(g, {0.5})).p[0] ==
        doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(exact_marginals(conditioned(g, {-2.0})).p[0] ==
        doctest::Approx(1.0 / (1.0 + std::exp(4.0))).epsilon(1e-12));
}

TEST_CASE("hard-limit exclusion at u = 8 pins marginals near 1/3") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::finite(8.0));
  const MarginalTable t = exact_marginals(conditioned(g, {0.0, 0.0}));
  // The (+1,+1) weight e^{-4u} is negligible at u = 8, so each side sits at
  // 1/3 to within 1e-14 -- the hard-exclusion limit.
  CHECK(std::abs(t.p[0] - 1.0 / 3.0) <= 2e-3);
  CHECK(std::abs(t.p[1] - 1.0 / 3.0) <= 2e-3);
}

TEST_CASE("exclusion marginal matches the closed form for any u") {
  // Three legal states weigh e^u each, the soft-illegal (+1,+1) weighs
  // e^{-3u}, so p(y_i = 1) = (1 + e^{-4u}) / (3 + e^{-4u}).
  for (double u : {0.0, 0.3, 1.0, 2.5}) {
    LabelGraph g({"a", "b"});
    g.add_exclusion(0, 1, EdgeStrength::finite(u));
    const MarginalTable t = exact_marginals(conditioned(g, {0.0, 0.0}));
    const double e4 = std::exp(-4.0 * u);
    CHECK(t.p[0] == doctest::Approx((1.0 + e4) / (3.0 + e4)).epsilon(1e-12));
  }
}

TEST_CASE("u = 0 is the independent limit") {
  LabelGraph g({"a", "b", "c"});
  g.add_exclusion(0, 1, EdgeStrength::finite(0.0));
  g.add_subsumption(1, 2, EdgeStrength::finite(0.0));
  const MarginalTable t = exact_marginals(conditioned(g, {0.3, -0.7, 1.1}));
  CHECK(t.p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * 0.3))).epsilon(1e-12));
  CHECK(t.p[1] == doctest::Approx(1.0 / (1.0 + std::exp(2.0 * 0.7))).epsilon(1e-12));
  CHECK(t.p[2] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * 1.1))).epsilon(1e-12));
}

TEST_CASE("matches the joint-table oracle on random models") {
  testutil::Rng rng(5150);
  for (int round = 0; round < 40; ++round) {
    const int n = testutil::uniform_int(rng, 2, 9);
    const IsingModel m =
        testutil::random_loopy_model(rng, n, 1.5, 1.0, 0.45);
    const ConditionedModel cm = condition(m, testutil::random_scores(rng, n, 1.0));
    const auto oracle = testutil::oracle_marginals(cm);
    const MarginalTable t = exact_marginals(cm);
    CHECK(testutil::linf(t.p, oracle.p) < 1e-12);
  }
}

TEST_CASE("matches the oracle on random MECE models, dist included") {
  testutil::Rng rng(6021);
  for (int round = 0; round < 40; ++round) {
    const int n = testutil::uniform_int(rng, 3, 9);
    const int k = testutil::uniform_int(rng, 2, n);
    const IsingModel m = testutil::random_loopy_model(rng, n, 1.5, 1.0, 0.45, k);
    const ConditionedModel cm = condition(m, testutil::random_scores(rng, n, 1.0));
    const auto oracle = testutil::oracle_marginals(cm);
    const MarginalTable t = exact_marginals(cm);
    CHECK(testutil::linf(t.p, oracle.p) < 1e-12);
    REQUIRE(t.mece_dist.has_value());
    CHECK(testutil::linf(*t.mece_dist, oracle.group_dist) < 1e-12);
    double total = 0.0;
    for (double v : *t.mece_dist) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(t.mece_members == m.mece->members);
  }
}

TEST_CASE("matches the oracle under random clamps") {
  testutil::Rng rng(7203);
  for (int round = 0; round < 40; ++round) {
    const int n = testutil::uniform_int(rng, 3, 8);
    const bool with_group = testutil::coin(rng);
    const int k = with_group ? testutil::uniform_int(rng, 2, n) : 0;
    const IsingModel m = testutil::random_loopy_model(rng, n, 1.0, 1.0, 0.4, k);
    const ConditionedModel cm = condition(m, testutil::random_scores(rng, n, 1.0));
    const int label = testutil::uniform_int(rng, 0, n - 1);
    const int state = testutil::coin(rng) ? 1 : -1;
    const MarginalTable t = exact_marginals(cm, ClampSet{}.set(label, state));
    const auto oracle = testutil::oracle_marginals(cm, {{label, state}});
    CHECK(testutil::linf(t.p, oracle.p) < 1e-12);
    CHECK(t.p[label] == (state == 1 ? 1.0 : 0.0));
  }
}

TEST_CASE("clamping every member off is infeasible") {
  LabelGraph g({"a", "b", "x"});
  g.set_mece({0, 1});
  const ConditionedModel cm = conditioned(g, {0.0, 0.0, 0.0});
  CHECK_THROWS_WITH_AS(
      exact_marginals(cm, ClampSet{}.set(0, -1).set(1, -1)),
      doctest::Contains("infeasible clamp"), ValidationError);
}

TEST_CASE("enumeration bound is enforced") {
  IsingModel m;
  m.n = kMaxExactLabels + 1;
  m.fields.assign(m.n, 0.0);
  const ConditionedModel cm = condition(m, std::vector<double>(m.n, 0.0));
  CHECK_THROWS_WITH_AS(exact_marginals(cm),
                       doctest::Contains("enumeration bound"), ValidationError);
}

TEST_CASE("MECE enumeration visits k * 2^(n-k) states") {
  // Indirect check: uniform model marginals. 3 members, 2 free labels.
  LabelGraph g({"m0", "m1", "m2", "x", "y"});
  g.set_mece({0, 1, 2});
  const MarginalTable t = exact_marginals(conditioned(g, {0, 0, 0, 0, 0}));
  for (int s = 0; s < 3; ++s) CHECK(t.p[s] == doctest::Approx(1.0 / 3.0));
  CHECK(t.p[3] == doctest::Approx(0.5));
  CHECK(t.p[4] == doctest::Approx(0.5));
}

TEST_CASE("exact_conditional adds a +1 clamp on the target") {
  LabelGraph g({"dog", "animal"});
  g.add_subsumption(1, 0, EdgeStrength::finite(2.0));
  const ConditionedModel cm = conditioned(g, {0.0, 0.0});
  const MarginalTable t = exact_conditional(cm, {}, 0);
  CHECK(t.p[0] == 1.0);
  // p(animal | dog on) = sigmoid(4u) at z = 0.
  CHECK(t.p[1] == doctest::Approx(1.0 / (1.0 + std::exp(-8.0))).epsilon(1e-12));
  CHECK_THROWS_AS(exact_conditional(cm, {}, 9), ValidationError);
}

TEST_CASE("group-state clamp narrows the distribution") {
  LabelGraph g({"m0", "m1", "m2"});
  g.set_mece({0, 1, 2});
  const ConditionedModel cm = conditioned(g, {0.0, 1.0, 0.0});
  const MarginalTable t = exact_marginals(cm, ClampSet{}.set_mece(2));
  CHECK(t.p[2] == 1.0);
  CHECK(t.p[0] == 0.0);
  CHECK(t.p[1] == 0.0);
}

}  // TEST_SUITE

TEST_SUITE("exact_hex") {

TEST_CASE("hard exclusion removes the (1,1) configuration") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::hard_relation());
  const MarginalTable t = exact_hex_marginals(g, {0.0, 0.0});
  // Three legal states, uniform: p(a) = p(b) = 1/3.
  CHECK(t.p[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(t.p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(t.method == "hex");
}

TEST_CASE("hard subsumption: child on forces parent on") {
  LabelGraph g({"animal", "dog"});
  g.add_subsumption(0, 1, EdgeStrength::hard_relation());
  const MarginalTable t =
      exact_hex_marginals(g, {0.0, 0.0}, ClampSet{}.set(1, 1));
  CHECK(t.p[0] == 1.0);
}

TEST_CASE("evidence shifts the hex marginals") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::hard_relation());
  // Legal states: (-,-), (+,-), (-,+) with weights e^{-z0-z1}, e^{z0-z1}, e^{-z0+z1}.
  const double z0 = 0.7, z1 = -0.2;
  const MarginalTable t = exact_hex_marginals(g, {z0, z1});
  const double w_mm = std::exp(-z0 - z1), w_pm = std::exp(z0 - z1),
               w_mp = std::exp(-z0 + z1);
  CHECK(t.p[0] == doctest::Approx(w_pm / (w_mm + w_pm + w_mp)).epsilon(1e-12));
  CHECK(t.p[1] == doctest::Approx(w_mp / (w_mm + w_pm + w_mp)).epsilon(1e-12));
}

TEST_CASE("soft edges in a hex graph match the factor oracle") {
  testutil::Rng rng(8814);
  for (int round = 0; round < 30; ++round) {
    const int n = testutil::uniform_int(rng, 2, 7);
    LabelGraph g = testutil::random_mixed_graph(rng, n, 0.2, 2.0, 0.5);
    // Harden a random subset of edges.
    for (RelationEdge& e : g.edges) {
      if (testutil::coin(rng, 0.4)) e.strength = EdgeStrength::hard_relation();
    }
    const EvidenceVector z = testutil::random_scores(rng, n, 1.0);
    const MarginalTable t = exact_hex_marginals(g, z);
    CHECK(testutil::linf(t.p, testutil::oracle_hex_marginals(g, z)) < 1e-12);
  }
}

TEST_CASE("an all-soft hex run agrees with the compiled-model marginals") {
  testutil::Rng rng(99);
  for (int round = 0; round < 20; ++round) {
    const int n = testutil::uniform_int(rng, 2, 7);
    const LabelGraph g = testutil::random_mixed_graph(rng, n, 0.0, 2.0, 0.5);
    const EvidenceVector z = testutil::random_scores(rng, n, 1.0);
    const MarginalTable hex = exact_hex_marginals(g, z);
    const MarginalTable ising = exact_marginals(condition(compile(g), z));
    CHECK(testutil::linf(hex.p, ising.p) < 1e-10);
  }
}

TEST_CASE("contradictory hard clamps are infeasible") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::hard_relation());
  CHECK_THROWS_WITH_AS(
      exact_hex_marginals(g, {0.0, 0.0}, ClampSet{}.set(0, 1).set(1, 1)),
      doctest::Contains("infeasible clamp"), ValidationError);
}

TEST_CASE("hex evidence length is validated") {
  LabelGraph g({"a", "b"});
  CHECK_THROWS_AS(exact_hex_marginals(g, {0.0}), ValidationError);
}

}  // TEST_SUITE
