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

#include "xsec/tiling.hpp"

using namespace xsec;

namespace {

ElementSet interval(Coord a, Coord b) {
  return ElementSet::interval(GroupModel::lattice(1), a, b);
}

TilingInstance z_instance(const ElementSet& A, const ElementSet& B,
                          std::vector<ElementSet> scales) {
  const GroupModel z = GroupModel::lattice(1);
  TilingInstance inst;
  inst.group = z;
  inst.A = A;
  inst.B = B;
  inst.scales = std::move(scales);
  inst.U = ElementSet::identity_set(z);
  inst.V = inst.U;
  inst.c = 1;
  return inst;
}

// Random density-rho subset of a window, with B filtered by the selection
// lemma's density hypothesis so select_tile_centers accepts it.
struct RandomPair {
  ElementSet A, B;
};

RandomPair random_lattice_pair(const GroupModel& g, Coord scale, double rho,
                               const ElementSet& F, uint64_t seed) {
  Rng rng(seed, 77);
  std::vector<Element> a;
  for (const Element& e : folner_set(g, scale))
    if (rng.next_bernoulli(rho)) a.push_back(e);
  ElementSet A(g, a);
  std::vector<Element> b;
  for (const Element& cand : A) {
    int64_t cnt = 0;
    for (const Element& f : F)
      if (A.contains(g.mul(f, cand))) ++cnt;
    if (2 * cnt > static_cast<int64_t>(F.size())) b.push_back(cand);
  }
  return {A, ElementSet(g, b)};
}

}  // namespace

TEST_CASE("eps-disjointness") {
  const GroupModel z = GroupModel::lattice(1);
  CHECK(is_eps_disjoint({interval(0, 4), interval(10, 14)}, 0.01));
  CHECK_FALSE(is_eps_disjoint({interval(0, 4), interval(0, 4)}, 0.5));
  CHECK(is_eps_disjoint({interval(0, 3), interval(3, 6)}, 0.3));  // 1 < 1.2
  CHECK_FALSE(is_eps_disjoint({interval(0, 3), interval(3, 6)}, 0.25));
  CHECK_THROWS_AS(is_eps_disjoint({interval(0, 3), ElementSet(z, {})}, 0.3),
                  std::invalid_argument);
  CHECK_THROWS_AS(is_eps_disjoint({interval(0, 3)}, 0.0), std::invalid_argument);
}

TEST_CASE("parameter formulas") {
  const TilingParams p = params_for(0.1, 1);
  CHECK(p.n_scales == 184);  // ceil(ln 0.1 / ln 0.9875)
  CHECK(p.eps == Catch::Approx(0.0058));
  CHECK(detail::eps_inequality_holds(0.1, p.eps));
  CHECK_FALSE(detail::eps_inequality_holds(0.1, p.eps + 0.0001));

  // Long-double route for N, independently of params_for's loop.
  const long double ratio = std::log(0.1L) / std::log(1.0L - 0.1L / 8.0L);
  CHECK(static_cast<int>(std::ceil(static_cast<double>(ratio))) == 184);

  const TilingParams q = params_for(0.05, 1);
  const long double r2 = std::log(0.05L) / std::log(1.0L - 0.05L / 8.0L);
  CHECK(q.n_scales == static_cast<int>(std::ceil(static_cast<double>(r2))));
  CHECK(q.n_scales > p.n_scales);

  CHECK_THROWS_AS(params_for(0.2, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_for(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_for(0.1, 0), std::invalid_argument);
  CHECK_THROWS_WITH(params_for(0.02, 1),
                    Catch::Matchers::ContainsSubstring("cap"));

  TilingParams bad = p;
  bad.n_scales = 100;
  CHECK_THROWS_AS(validate_params(bad), std::invalid_argument);
  bad = p;
  bad.eps = 0.01;
  CHECK_THROWS_AS(validate_params(bad), std::invalid_argument);
}

TEST_CASE("greedy selection: base cases") {
  const GroupModel z = GroupModel::lattice(1);
  const ElementSet F = interval(0, 10);
  const ElementSet A = interval(0, 20);

  // Singleton B satisfying the hypotheses is always selected.
  const auto single = select_tile_centers(z, A, ElementSet(z, {{5, 0, 0, 0}}), F,
                                          0.1, trivial_context(z));
  REQUIRE(single.centers.size() == 1);
  CHECK(single.centers[0] == Element{5, 0, 0, 0});

  // Empty B is vacuously fine.
  const auto none =
      select_tile_centers(z, A, ElementSet(z, {}), F, 0.1, trivial_context(z));
  CHECK(none.centers.empty());
  CHECK(none.covered == 0);
}

TEST_CASE("greedy selection: named hypothesis failures") {
  const GroupModel z = GroupModel::lattice(1);
  const ElementSet F = interval(0, 10);
  const ElementSet A = interval(0, 40);

  // B not inside A.
  CHECK_THROWS_WITH(
      select_tile_centers(z, A, ElementSet(z, {{99, 0, 0, 0}}), F, 0.1,
                          trivial_context(z)),
      Catch::Matchers::ContainsSubstring("subset of A"));

  // |F| > 10 is strict: a 10-element F is rejected.
  CHECK_THROWS_WITH(
      select_tile_centers(z, A, A, interval(0, 9), 0.1, trivial_context(z)),
      Catch::Matchers::ContainsSubstring("|F| > 10"));

  // Density hypothesis |Fb cap A| > |F|/2.
  const ElementSet sparse(z, {{0, 0, 0, 0}, {100, 0, 0, 0}, {200, 0, 0, 0}});
  CHECK_THROWS_WITH(
      select_tile_centers(z, sparse, sparse, F, 0.1, trivial_context(z)),
      Catch::Matchers::ContainsSubstring("|Fb  intersect  A| > |F|/2"));

  // U-separation of A.
  LemmaContext wide = trivial_context(z);
  wide.U = interval(-2, 2);
  wide.V = ElementSet::identity_set(z);
  CHECK_THROWS_WITH(select_tile_centers(z, A, A, F, 0.1, wide),
                    Catch::Matchers::ContainsSubstring("U-separated"));

  // Packing constant too small for the tile.
  LemmaContext bad = trivial_context(z);
  bad.c = 0;
  CHECK_THROWS_WITH(select_tile_centers(z, A, A, F, 0.1, bad),
                    Catch::Matchers::ContainsSubstring("translates"));
}

TEST_CASE("greedy selection: 200 seeded lattice instances") {
  const GroupModel z2 = GroupModel::lattice(2);
  const ElementSet F = default_tile_shape(z2);
  const double delta = 0.1;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const auto [A, B] =
        random_lattice_pair(z2, 14, 0.85 + 0.15 * ((seed % 7) / 6.0), F, seed);
    if (B.empty()) continue;
    const auto sel = select_tile_centers(z2, A, B, F, delta, trivial_context(z2));
    // delta-disjointness in selection order, re-checked by the public op.
    std::vector<ElementSet> tiles;
    for (const auto& t : sel.tiles) tiles.push_back(ElementSet(z2, t));
    if (!tiles.empty()) CHECK(is_eps_disjoint(tiles, delta));
    // Selection-lemma coverage bound |F Btilde cap A| > (delta/4c)|B|.
    CHECK(static_cast<double>(sel.covered) >
          delta / 4.0 * static_cast<double>(B.size()));
  }
}

TEST_CASE("quasi-tile: interval instance tiles completely") {
  const ElementSet A = interval(0, 109);
  TilingInstance inst = z_instance(A, A, {interval(0, 10)});
  const TilingParams params = params_for(0.1, 1);
  const TilingResult result = quasi_tile(inst, params);

  CHECK(result.coverage == 1.0);
  CHECK(result.early_stop_scale == 0);
  const VerifyReport rep = verify_tiling(inst, params, result);
  CHECK(rep.all_pass);

  // Determinism: identical inputs give identical selections.
  const TilingResult again = quasi_tile(inst, params);
  CHECK(again.scales[0].centers == result.scales[0].centers);
  CHECK(again.coverage == result.coverage);
}

TEST_CASE("quasi-tile rejects the 10-element tile shape") {
  const ElementSet A = interval(0, 99);
  TilingInstance inst = z_instance(A, A, {interval(0, 9)});
  CHECK_THROWS_WITH(quasi_tile(inst, params_for(0.1, 1)),
                    Catch::Matchers::ContainsSubstring("condition 3"));
}

TEST_CASE("quasi-tile: two genuine scales with early stop") {
  // Scale geometry is forced by eps = 0.0058: the dilation in condition 6
  // adds |F_1| - 1 = 10 points, so |F_2| must exceed 10/eps, and B must
  // avoid a right collar of that width, which |B| > (1-eps)|A| turns into
  // a window of ~3x10^5 points.
  const Coord L2 = 1725, W = 320000;
  const ElementSet A = interval(0, W - 1);
  const ElementSet B = interval(0, W - L2 - 1);
  TilingInstance inst =
      z_instance(A, B, {interval(0, 10), interval(0, L2 - 1)});
  const TilingParams params = params_for(0.1, 1);

  const InstanceReport pre = check_instance(inst, params, 4000);
  for (const auto& c : pre.conditions) {
    INFO(c.name << " " << c.detail);
    CHECK(c.pass);
  }

  const TilingResult result = quasi_tile(inst, params, 4000);
  CHECK(result.early_stop_scale == 1);  // the small scale was never needed
  CHECK(result.scales[0].tiles.empty());
  CHECK(result.scales[1].tiles.size() > 100);
  CHECK(result.coverage > 0.99);

  const VerifyReport rep = verify_tiling(inst, params, result);
  for (const auto& c : rep.conclusions) {
    INFO(c.name << " " << c.detail);
    CHECK(c.pass);
  }
}

TEST_CASE("verifier rejects corrupted results") {
  const ElementSet A = interval(0, 30);
  TilingInstance inst =
      z_instance(A, A, {interval(0, 10), interval(0, 11)});
  const TilingParams params = params_for(0.1, 1);

  // Hand-built result with overlapping scales fails conclusion 2.
  TilingResult fake;
  fake.scales.resize(2);
  fake.scales[0].centers = {Element{0, 0, 0, 0}};
  fake.scales[0].tiles = {interval(0, 10).elems()};
  fake.scales[1].centers = {Element{5, 0, 0, 0}};
  fake.scales[1].tiles = {interval(5, 16).elems()};
  fake.total = static_cast<int64_t>(A.size());
  const VerifyReport rep = verify_tiling(inst, params, fake);
  CHECK_FALSE(rep.conclusions[1].pass);

  // Empty result on nonempty A fails conclusion 3 (coverage 0).
  TilingResult empty;
  empty.scales.resize(2);
  empty.total = static_cast<int64_t>(A.size());
  const VerifyReport rep2 = verify_tiling(inst, params, empty);
  CHECK(rep2.conclusions[0].pass);
  CHECK(rep2.conclusions[1].pass);
  CHECK_FALSE(rep2.conclusions[2].pass);
  CHECK(rep2.coverage == 0.0);
}

TEST_CASE("make_instance: documented cases") {
  const TilingParams params = params_for(0.1, 1);

  // The spec's sparse example: all six conditions hold (condition 6 is
  // vacuous at one scale), but the selection-lemma density fails broadly.
  const auto sparse = make_instance(GroupModel::lattice(2), 200, 0.3, 42, params);
  CHECK(sparse.report.all_pass);
  CHECK(sparse.report.lemma_density_failures > 0);

  // Density 1 with trivial U: A is the whole window.
  const auto full = make_instance(GroupModel::lattice(2), 30, 1.0, 7, params);
  CHECK(full.instance.A.size() == folner_set(GroupModel::lattice(2), 30).size());

  // A window too small for any |F| > 10 shape names hypothesis 3.
  CHECK_THROWS_WITH(make_instance(GroupModel::lattice(1), 10, 1.0, 7, params),
                    Catch::Matchers::ContainsSubstring("hypothesis 3"));

  CHECK_THROWS_AS(make_instance(GroupModel::lattice(1), 100, 0.0, 7, params),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_instance(GroupModel::lattice(1), 100, 1.5, 7, params),
                  std::invalid_argument);
}

TEST_CASE("generated instances quasi-tile soundly (sample of seeds)") {
  const TilingParams params = params_for(0.1, 1);
  struct Case {
    GroupModel group;
    Coord scale;
  };
  const std::vector<Case> cases = {{GroupModel::lattice(1), 2000},
                                   {GroupModel::lattice(2), 40},
                                   {GroupModel::heisenberg(), 6}};
  for (const auto& c : cases) {
    for (uint64_t seed = 1; seed <= 15; ++seed) {
      const double density = 0.95 + 0.05 * ((seed % 5) / 4.0);
      const auto made = make_instance(c.group, c.scale, density, seed, params);
      REQUIRE(made.report.all_pass);
      const TilingResult result = quasi_tile(made.instance, params);
      const VerifyReport rep = verify_tiling(made.instance, params, result);
      INFO(c.group.name() << " seed " << seed << " coverage " << rep.coverage);
      CHECK(rep.all_pass);
    }
  }
}

TEST_CASE("coverage bound stays met as delta grows") {
  const GroupModel z2 = GroupModel::lattice(2);
  bool met_before = false;
  for (double delta : {0.05, 0.08, 0.1}) {
    const TilingParams params = params_for(delta, 1);
    const auto made = make_instance(z2, 40, 0.98, 11, params);
    const TilingResult result = quasi_tile(made.instance, params);
    const bool met =
        static_cast<double>(result.covered) >
        (1.0 - 2.0 * delta) * static_cast<double>(result.total);
    if (met_before) CHECK(met);  // larger delta only weakens the bound
    met_before = met_before || met;
  }
  CHECK(met_before);
}

TEST_CASE("packing constant certification") {
  const GroupModel z2 = GroupModel::lattice(2);
  const ElementSet F = ElementSet::box(z2, {0, 0}, {5, 5});
  CHECK(packing_constant(z2, {F}, ElementSet::identity_set(z2)) == 1);
  CHECK(greedy_packing_count(z2, F, ElementSet::identity_set(z2)) ==
        static_cast<int64_t>(F.size()));

  const ElementSet V = metric_ball(z2, 1);
  const int c = packing_constant(z2, {F}, V);
  CHECK(c >= 1);
  CHECK(certified_packing_bound(z2, F, V) <=
        static_cast<int64_t>(c) * static_cast<int64_t>(F.size()));
}

TEST_CASE("interval fast path matches the generic greedy") {
  const GroupModel z = GroupModel::lattice(1);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 123);
    std::vector<Element> pts;
    for (Coord i = 0; i < 400; ++i)
      if (rng.next_bernoulli(0.8)) pts.push_back(Element{i, 0, 0, 0});
    const ElementSet A(z, pts);
    const ElementSet F = interval(-6, 8);

    detail::BoxIndex box(A.elems());
    std::vector<char> alive(static_cast<size_t>(box.size()), 0);
    for (const Element& e : A) alive[static_cast<size_t>(box.index(e))] = 1;
    std::vector<Element> cands(A.begin(), A.end());

    const auto generic =
        detail::greedy_select(z, A.elems(), alive, box, cands, F, 0.1);
    std::vector<Coord> alive_pos;
    for (const Element& e : A) alive_pos.push_back(e[0]);
    const auto fast =
        detail::greedy_select_interval(alive_pos, -6, 8, cands, 0.1);

    CHECK(generic.centers == fast.centers);
    CHECK(generic.tiles == fast.tiles);
    CHECK(generic.covered == fast.covered);
  }
}
