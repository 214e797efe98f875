#include <doctest.h>

#include <array>
#include <cmath>

#include "phex/errors.hpp"
#include "phex/ising.hpp"
#include "phex/numeric.hpp"
#include "test_util.hpp"

using namespace phex;

TEST_SUITE("ising") {

TEST_CASE("absolute factors zero out exactly the illegal state") {
  CHECK(phi_abs_exclusion(1, 1) == 0.0);
  CHECK(phi_abs_exclusion(1, -1) == 1.0);
  CHECK(phi_abs_exclusion(-1, 1) == 1.0);
  CHECK(phi_abs_exclusion(-1, -1) == 1.0);

  CHECK(phi_abs_subsumption(-1, 1) == 0.0);  // parent off, child on
  CHECK(phi_abs_subsumption(1, 1) == 1.0);
  CHECK(phi_abs_subsumption(1, -1) == 1.0);
  CHECK(phi_abs_subsumption(-1, -1) == 1.0);

  CHECK(phi_abs_none(1, -1) == 1.0);
  CHECK_THROWS_AS(phi_abs_exclusion(0, 1), ValidationError);
}

TEST_CASE("probabilistic factors put q on the illegal state") {
  CHECK(phi_prob_exclusion(1, 1, 0.3) == 0.3);
  CHECK(phi_prob_exclusion(-1, 1, 0.3) == 1.0);
  CHECK(phi_prob_subsumption(-1, 1, 0.1) == 0.1);
  CHECK(phi_prob_subsumption(1, 1, 0.1) == 1.0);
}

TEST_CASE("probabilistic factor is the q-mixture of hole and absolute factors") {
  // phi_p = q * phi_none + (1 - q) * phi_abs, state by state.
  const double q = 0.37;
  for (int y1 : {-1, 1}) {
    for (int y2 : {-1, 1}) {
      CHECK(phi_prob_exclusion(y1, y2, q) ==
            doctest::Approx(q * phi_abs_none(y1, y2) +
                            (1.0 - q) * phi_abs_exclusion(y1, y2)));
      CHECK(phi_prob_subsumption(y1, y2, q) ==
            doctest::Approx(q * phi_abs_none(y1, y2) +
                            (1.0 - q) * phi_abs_subsumption(y1, y2)));
    }
  }
}

TEST_CASE("pair energies: -u legal, 3u illegal") {
  const double u = 0.8;
  CHECK(pair_energy_exclusion(1, 1, u) == doctest::Approx(3.0 * u));
  CHECK(pair_energy_exclusion(1, -1, u) == doctest::Approx(-u));
  CHECK(pair_energy_exclusion(-1, 1, u) == doctest::Approx(-u));
  CHECK(pair_energy_exclusion(-1, -1, u) == doctest::Approx(-u));

  CHECK(pair_energy_subsumption(-1, 1, u) == doctest::Approx(3.0 * u));
  CHECK(pair_energy_subsumption(1, 1, u) == doctest::Approx(-u));
  CHECK(pair_energy_subsumption(1, -1, u) == doctest::Approx(-u));
  CHECK(pair_energy_subsumption(-1, -1, u) == doctest::Approx(-u));
}

TEST_CASE("factor / exp(-energy) ratio is exp(-u) on every state") {
  const double u = 1.3;
  const double q = strength_from_u(u);
  for (int y1 : {-1, 1}) {
    for (int y2 : {-1, 1}) {
      CHECK(phi_prob_exclusion(y1, y2, q) /
                std::exp(-pair_energy_exclusion(y1, y2, u)) ==
            doctest::Approx(std::exp(-u)).epsilon(1e-12));
      CHECK(phi_prob_subsumption(y1, y2, q) /
                std::exp(-pair_energy_subsumption(y1, y2, u)) ==
            doctest::Approx(std::exp(-u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("compile: one exclusion edge") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::finite(1.0));
  const IsingModel m = compile(g);
  CHECK(m.n == 2);
  CHECK(m.coupling(0, 1) == doctest::Approx(1.0));
  CHECK(m.fields[0] == doctest::Approx(1.0));
  CHECK(m.fields[1] == doctest::Approx(1.0));
}

TEST_CASE("compile: one subsumption edge") {
  LabelGraph g({"animal", "dog"});
  g.add_subsumption(0, 1, EdgeStrength::finite(1.0));
  const IsingModel m = compile(g);
  CHECK(m.coupling(0, 1) == doctest::Approx(-1.0));
  CHECK(m.fields[0] == doctest::Approx(-1.0));  // parent
  CHECK(m.fields[1] == doctest::Approx(1.0));   // child
}

TEST_CASE("compile accumulates contributions on shared labels") {
  LabelGraph g({"a", "b", "c"});
  g.add_exclusion(0, 1, EdgeStrength::finite(0.5));
  g.add_subsumption(2, 1, EdgeStrength::finite(0.25));  // c subsumes b
  const IsingModel m = compile(g);
  CHECK(m.coupling(0, 1) == doctest::Approx(0.5));
  CHECK(m.coupling(1, 2) == doctest::Approx(-0.25));
  CHECK(m.fields[0] == doctest::Approx(0.5));
  CHECK(m.fields[1] == doctest::Approx(0.5 + 0.25));  // excluded + child
  CHECK(m.fields[2] == doctest::Approx(-0.25));       // parent
  CHECK(m.coupling(0, 2) == 0.0);
}

TEST_CASE("compile clamps strengths at the numeric cap") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::finite(25.0));
  const IsingModel m = compile(g);
  CHECK(m.coupling(0, 1) == doctest::Approx(kMaxCoupling));
  CHECK(m.fields[0] == doctest::Approx(kMaxCoupling));
}

TEST_CASE("compile rejects hard edges") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::hard_relation());
  CHECK_THROWS_WITH_AS(compile(g), doctest::Contains("hard-edge unsupported"),
                       ValidationError);
}

TEST_CASE("compile carries the MECE group through") {
  LabelGraph g({"a", "b", "c"});
  g.set_mece({0, 1});
  const IsingModel m = compile(g);
  REQUIRE(m.mece.has_value());
  CHECK(m.mece->members == std::vector<int>{0, 1});
}

TEST_CASE("u = 0 compiles to the empty model") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::finite(0.0));
  const IsingModel m = compile(g);
  CHECK(m.coupling(0, 1) == 0.0);
  CHECK(m.fields[0] == 0.0);
  CHECK(m.fields[1] == 0.0);
}

TEST_CASE("condition subtracts evidence from the fields") {
  LabelGraph g({"a", "b"});
  g.add_exclusion(0, 1, EdgeStrength::finite(1.0));
  const IsingModel m = compile(g);
  const ConditionedModel cm = condition(m, {0.25, -2.0});
  CHECK(cm.h_eff[0] == doctest::Approx(1.0 - 0.25));
  CHECK(cm.h_eff[1] == doctest::Approx(1.0 + 2.0));
  CHECK(cm.model.fields[0] == doctest::Approx(1.0));  // original untouched
}

TEST_CASE("condition validates the evidence vector") {
  IsingModel m;
  m.n = 2;
  m.fields = {0.0, 0.0};
  CHECK_THROWS_AS(condition(m, {1.0}), ValidationError);
  CHECK_THROWS_AS(condition(m, {1.0, std::nan("")}), ValidationError);
  CHECK_THROWS_AS(condition(m, {1.0, std::numeric_limits<double>::infinity()}),
                  ValidationError);
}

TEST_CASE("energy sums couplings and effective fields") {
  IsingModel m;
  m.n = 3;
  m.fields = {0.5, -1.0, 0.0};
  m.couplings[{0, 1}] = 2.0;
  m.couplings[{1, 2}] = -0.5;
  const ConditionedModel cm = condition(m, {0.0, 0.0, 1.0});
  const std::array<int, 3> y = {1, -1, 1};
  // J01*y0*y1 + J12*y1*y2 + h0*y0 + h1*y1 + h2*y2
  const double expected = 2.0 * -1 + -0.5 * -1 + 0.5 * 1 + -1.0 * -1 + -1.0 * 1;
  CHECK(energy(cm, y) == doctest::Approx(expected).epsilon(1e-12));
  const std::array<int, 2> short_y = {1, -1};
  CHECK_THROWS_AS(energy(cm, short_y), ValidationError);
}

TEST_CASE("compiled energies match the per-edge energies on random graphs") {
  testutil::Rng rng(411);
  for (int round = 0; round < 30; ++round) {
    const int n = testutil::uniform_int(rng, 2, 8);
    const LabelGraph g = testutil::random_mixed_graph(rng, n, 0.0, 2.0, 0.5);
    const ConditionedModel cm =
        condition(compile(g), std::vector<double>(n, 0.0));
    for (long mask = 0; mask < (1L << n); ++mask) {
      std::vector<int> y(n);
      for (int i = 0; i < n; ++i) y[i] = (mask >> i) & 1 ? 1 : -1;
      double per_edge = 0.0;
      for (const RelationEdge& e : g.edges) {
        per_edge += e.kind == RelationKind::kExclusion
                        ? pair_energy_exclusion(y[e.a], y[e.b], e.strength.u())
                        : pair_energy_subsumption(y[e.parent()], y[e.child()],
                                                  e.strength.u());
      }
      CHECK(energy(cm, y) == doctest::Approx(per_edge).epsilon(1e-10));
    }
  }
}

}  // TEST_SUITE
