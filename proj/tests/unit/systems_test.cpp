// Copyright 2026 The xsec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "xsec/systems.hpp"

using namespace xsec;

namespace {
const GroupModel kZ = GroupModel::lattice(1);
}

TEST_CASE("system construction invariants") {
  CHECK_THROWS_AS(SymbolicSystem::bernoulli(kZ, {0.5, 0.4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SymbolicSystem::bernoulli(kZ, {1.5, -0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SymbolicSystem::markov({{0.5, 0.5}, {0.3}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SymbolicSystem::markov_with_stationary(
                      {{0.9, 0.1}, {0.1, 0.9}}, {0.9, 0.1}),
                  std::invalid_argument);  // fails pi P = pi
  CHECK_THROWS_AS(SymbolicSystem::two_state(1.5), std::invalid_argument);
  CHECK_THROWS_AS(SymbolicSystem::periodic_cycle(1), std::invalid_argument);

  // Stationary vector solved and verified to 1e-12 for an asymmetric chain.
  const SymbolicSystem m =
      SymbolicSystem::markov({{0.5, 0.5}, {0.2, 0.8}});
  double check = 0;
  for (size_t i = 0; i < 2; ++i)
    check += m.stationary()[i] * m.matrix()[i][0];
  CHECK(std::abs(check - m.stationary()[0]) < 1e-12);
  CHECK(m.stationary()[0] == Catch::Approx(2.0 / 7.0).epsilon(1e-9));

  const SymbolicSystem base = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  CHECK_THROWS_AS(SymbolicSystem::suspend(base, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(SymbolicSystem::suspend(base, {2}), std::invalid_argument);

  const SymbolicSystem tower = SymbolicSystem::suspend(base, {2, 2});
  CHECK_THROWS_AS(SymbolicSystem::suspend(tower, {1, 1, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SymbolicSystem::induce(tower, Cylinder::single(0, 0)),
                  std::invalid_argument);
}

TEST_CASE("analytic entropy oracle") {
  const SymbolicSystem fair = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  CHECK(analytic_entropy(fair) == 1.0);

  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  const double expected = -(0.9 * std::log2(0.9) + 0.1 * std::log2(0.1));
  CHECK(analytic_entropy(chain) == Catch::Approx(expected).epsilon(1e-12));
  CHECK(expected == Catch::Approx(0.4690).margin(5e-5));

  const SymbolicSystem tower = SymbolicSystem::suspend(fair, {2, 2});
  CHECK(analytic_entropy(tower) == Catch::Approx(0.5).epsilon(1e-12));

  // Oracle consistency: h(tower) * E[roof] = h(base), exactly.
  for (const SymbolicSystem& base : {fair, chain}) {
    const SymbolicSystem t = SymbolicSystem::suspend(base, {1, 3});
    CHECK(analytic_entropy(t) * expected_roof(t) ==
          Catch::Approx(analytic_entropy(base)).epsilon(1e-12));
  }

  // Roof 1 is the base system.
  const SymbolicSystem flat = SymbolicSystem::suspend(chain, {1, 1});
  CHECK(analytic_entropy(flat) ==
        Catch::Approx(analytic_entropy(chain)).epsilon(1e-12));

  const SymbolicSystem induced =
      SymbolicSystem::induce(fair, Cylinder::single(0, 0));
  CHECK(analytic_entropy(induced) == Catch::Approx(2.0).epsilon(1e-12));

  CHECK(analytic_entropy(SymbolicSystem::periodic_cycle(4)) == 0.0);
}

TEST_CASE("cylinder probabilities") {
  const SymbolicSystem fair = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  CHECK(fair.cylinder_probability(Cylinder::single(0, 0)) == 0.5);
  CHECK(fair.cylinder_probability(Cylinder{{{0, 0}, {1, 1}}}) == 0.25);

  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  CHECK(chain.cylinder_probability(Cylinder::single(3, 1)) == 0.5);
  // Two pinned symbols one step apart: pi(0) P(0,0).
  CHECK(chain.cylinder_probability(Cylinder{{{0, 0}, {1, 0}}}) ==
        Catch::Approx(0.45).epsilon(1e-12));
  // Contradictory double pin has probability zero.
  CHECK(chain.cylinder_probability(Cylinder{{{0, 0}, {0, 1}}}) == 0.0);
  CHECK_THROWS_AS(
      SymbolicSystem::induce(chain, Cylinder{{{0, 0}, {0, 1}}}),
      std::invalid_argument);
}

TEST_CASE("window sampling laws") {
  // Bernoulli symbol frequency within 5 sigma.
  const SymbolicSystem fair = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  const ElementSet w = ElementSet::interval(kZ, 0, 999999);
  const LabeledWindow lw = sample_window(fair, w, 4242);
  int64_t ones = 0;
  for (int v : lw.labels) ones += v;
  const double freq = static_cast<double>(ones) / 1e6;
  CHECK(std::abs(freq - 0.5) < 5 * 0.5 / 1000.0);

  // Markov transition frequencies within 5 sigma of the matrix entries.
  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  Rng rng(7, 0);
  const std::vector<int> span = sample_span(chain, 1000000, rng);
  int64_t from0 = 0, move01 = 0;
  for (size_t i = 0; i + 1 < span.size(); ++i) {
    if (span[i] == 0) {
      ++from0;
      if (span[i + 1] == 1) ++move01;
    }
  }
  const double p01 = static_cast<double>(move01) / static_cast<double>(from0);
  const double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(from0));
  CHECK(std::abs(p01 - 0.1) < 5 * sigma);

  // Alphabet of size one gives a constant window.
  const SymbolicSystem constant = SymbolicSystem::bernoulli(kZ, {1.0});
  const LabeledWindow cw =
      sample_window(constant, ElementSet::interval(kZ, 0, 99), 1);
  for (int v : cw.labels) CHECK(v == 0);

  // Only Bernoulli fields extend beyond Z.
  const GroupModel z2 = GroupModel::lattice(2);
  CHECK_THROWS_AS(
      sample_window(chain, ElementSet::box(z2, {0, 0}, {3, 3}), 1),
      std::invalid_argument);
}

TEST_CASE("field sampling is shard-independent") {
  const GroupModel z2 = GroupModel::lattice(2);
  const SymbolicSystem field = SymbolicSystem::bernoulli(z2, {0.3, 0.7});
  const ElementSet big = ElementSet::box(z2, {0, 0}, {19, 19});
  const ElementSet small = ElementSet::box(z2, {5, 5}, {12, 12});
  const LabeledWindow lb = sample_window(field, big, 99);
  const LabeledWindow ls = sample_window(field, small, 99);
  for (size_t i = 0; i < small.size(); ++i) {
    const Element& e = small.elems()[i];
    const auto it = std::lower_bound(big.begin(), big.end(), e);
    const size_t j = static_cast<size_t>(it - big.begin());
    CHECK(lb.labels[j] == ls.labels[i]);
  }
}

TEST_CASE("induced systems and Kac's identity") {
  const SymbolicSystem fair = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});

  // Whole space: an alphabet-one base returns every step.
  const SymbolicSystem sure = SymbolicSystem::bernoulli(kZ, {1.0});
  const KacReport trivial =
      kac_check(SymbolicSystem::induce(sure, Cylinder::single(0, 0)), 10000, 3);
  CHECK(trivial.mean_return == 1.0);
  CHECK(trivial.expected == 1.0);

  // Bernoulli(1/2) on {x0=0}: mean return 2 within 3 stderr.
  const KacReport kb =
      kac_check(SymbolicSystem::induce(fair, Cylinder::single(0, 0)), 200000, 5);
  CHECK(kb.expected == 2.0);
  CHECK(kb.pass);

  // Markov(stay 0.9) on {x0=0}: mean return 2 by symmetry.
  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  const KacReport km =
      kac_check(SymbolicSystem::induce(chain, Cylinder::single(0, 0)), 200000, 6);
  CHECK(km.expected == 2.0);
  CHECK(km.pass);

  // Return words of {x0=0} under Bernoulli are 0 followed by 1s.
  InducedProcess proc(SymbolicSystem::induce(fair, Cylinder::single(0, 0)), 11);
  for (int i = 0; i < 200; ++i) {
    const std::vector<int> w = proc.next_word();
    REQUIRE(!w.empty());
    CHECK(w[0] == 0);
    for (size_t j = 1; j < w.size(); ++j) CHECK(w[j] == 1);
  }
}

TEST_CASE("towers: section recovery and spacing") {
  const SymbolicSystem chain = SymbolicSystem::two_state(0.8);
  const std::vector<int> roof = {2, 3};
  const SymbolicSystem tower = SymbolicSystem::suspend(chain, roof);
  CHECK(tower.max_roof() == 3);

  Rng rng(31, 0);
  const std::vector<int> span = sample_span(tower, 200000, rng);
  // Level-0 positions are spaced exactly by the roof of the decoded symbol,
  // and the level coordinate counts up between visits.
  int64_t last_visit = -1;
  int last_symbol = -1;
  for (size_t i = 0; i < span.size(); ++i) {
    const int level = span[i] % tower.max_roof();
    const int symbol = span[i] / tower.max_roof();
    if (level == 0) {
      if (last_visit >= 0) {
        CHECK(static_cast<int64_t>(i) - last_visit ==
              roof[static_cast<size_t>(last_symbol)]);
      }
      last_visit = static_cast<int64_t>(i);
      last_symbol = symbol;
    }
  }

  // The decoded base sequence at the section follows the base law:
  // 3-block frequencies close to the chain's in total variation.
  std::vector<int> decoded;
  for (size_t i = 0; i < span.size(); ++i)
    if (span[i] % tower.max_roof() == 0)
      decoded.push_back(span[i] / tower.max_roof());
  std::map<std::tuple<int, int, int>, int64_t> freq;
  for (size_t i = 0; i + 2 < decoded.size(); ++i)
    ++freq[{decoded[i], decoded[i + 1], decoded[i + 2]}];
  const int64_t n3 = static_cast<int64_t>(decoded.size()) - 2;
  double tv = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const double expect = chain.stationary()[static_cast<size_t>(a)] *
                              chain.matrix()[static_cast<size_t>(a)][static_cast<size_t>(b)] *
                              chain.matrix()[static_cast<size_t>(b)][static_cast<size_t>(c)];
        const double got =
            static_cast<double>(freq[{a, b, c}]) / static_cast<double>(n3);
        tv += std::abs(expect - got);
      }
  CHECK(tv / 2 < 0.02);
}
