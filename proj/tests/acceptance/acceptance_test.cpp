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

// End-to-end verification suite.  Each criterion prints one PASS/FAIL line;
// the assertions behind the lines are the gate.

#include <chrono>
#include <cstdio>

#include <boost/multiprecision/cpp_int.hpp>
#include <catch2/catch_amalgamated.hpp>

#include "xsec/cli.hpp"
#include "xsec/entropy.hpp"
#include "xsec/mixing.hpp"
#include "xsec/section.hpp"
#include "xsec/serialize.hpp"
#include "xsec/systems.hpp"
#include "xsec/tiling.hpp"

using namespace xsec;

namespace {

const GroupModel kZ = GroupModel::lattice(1);

void criterion(int n, bool pass, const std::string& what) {
  std::printf("[criterion %2d] %s - %s\n", n, pass ? "PASS" : "FAIL",
              what.c_str());
  std::fflush(stdout);
}

SectionSample labeled_orbits(const std::vector<std::vector<int>>& orbit_labels,
                             int alphabet = 2) {
  const size_t w = orbit_labels.front().size();
  std::vector<Element> addr;
  std::vector<int32_t> cls;
  std::vector<int> lab;
  for (size_t o = 0; o < orbit_labels.size(); ++o)
    for (size_t i = 0; i < w; ++i) {
      addr.push_back(Element{static_cast<Coord>(i), 0, 0, 0});
      cls.push_back(static_cast<int32_t>(o));
      lab.push_back(orbit_labels[o][i]);
    }
  return SectionSample(kZ, addr, cls, lab,
                       ElementSet::interval(kZ, 0, static_cast<Coord>(w) - 1),
                       alphabet);
}

double rls_oracle(const SectionSample& s, const FiberPartition& fibers,
                  const std::vector<int32_t>& A,
                  const std::vector<std::vector<int32_t>>& cover) {
  double bits = 0;
  for (int32_t x : A) {
    int64_t n = 0;
    for (const auto& c : cover) {
      bool meets = false;
      for (int32_t y : c)
        if (fibers.fiber[static_cast<size_t>(y)] ==
            fibers.fiber[static_cast<size_t>(x)]) {
          meets = true;
          break;
        }
      if (meets) ++n;
    }
    if (n > 1) bits += s.weight(x) * std::log2(static_cast<double>(n));
  }
  return bits;
}

SectionSample bernoulli_orbits(int n_orbits, Coord w, uint64_t seed) {
  const SymbolicSystem sys = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  auto built = from_orbit_window(sys, ElementSet::interval(kZ, 0, w - 1),
                                 SectionRule::always(), n_orbits, seed);
  return *built.sample;
}

}  // namespace

TEST_CASE("criterion 1: tiling soundness on 100 seeded instances per group") {
  const TilingParams params = params_for(0.1, 1);
  struct Case {
    GroupModel group;
    Coord scale;
  };
  // Window sizes close to 10^5 points per group.
  const std::vector<Case> cases = {{GroupModel::lattice(1), 50000},
                                   {GroupModel::lattice(2), 158},
                                   {GroupModel::heisenberg(), 10}};
  const auto t0 = std::chrono::steady_clock::now();
  int passed = 0, total = 0;
  for (const auto& c : cases) {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
      const double density = 0.95 + 0.05 * ((seed % 6) / 5.0);
      const auto made = make_instance(c.group, c.scale, density, seed, params);
      REQUIRE(made.report.all_pass);
      const TilingResult result = quasi_tile(made.instance, params);
      const VerifyReport rep = verify_tiling(made.instance, params, result);
      ++total;
      if (rep.all_pass) ++passed;
      INFO(c.group.name() << " seed " << seed << " coverage " << rep.coverage);
      CHECK(rep.all_pass);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  CHECK(passed == total);
  CHECK(total == 300);
  CHECK(secs < 60.0);
  criterion(1, passed == total && secs < 60.0,
            "quasi-tiling sound on " + std::to_string(passed) + "/" +
                std::to_string(total) + " instances in " +
                std::to_string(secs) + " s");
}

TEST_CASE("criterion 2: parameter formulas verified exactly") {
  const TilingParams p = params_for(0.1, 1);

  // N = ceil(ln 0.1 / ln 0.9875) = 184, certified with exact integers:
  // the ratio exceeds 183 iff (79/80)^183 > 1/10, and is at most 184 iff
  // (79/80)^184 <= 1/10.
  using boost::multiprecision::cpp_int;
  const cpp_int p183 = pow(cpp_int(79), 183), q183 = pow(cpp_int(80), 183);
  const cpp_int p184 = pow(cpp_int(79), 184), q184 = pow(cpp_int(80), 184);
  const bool above = 10 * p183 > q183;
  const bool below = 10 * p184 <= q184;
  CHECK(above);
  CHECK(below);
  CHECK(p.n_scales == 184);

  // eps = 0.0058 satisfies the strict inequality and 0.0059 does not,
  // checked in exact rational arithmetic scaled by 10^5:
  // (9/10)(1 - 2 eps) > (8/10)(11/10 + 2 eps).
  auto strict_ok = [](int64_t k /* eps = k/10^4 */) {
    return 9 * (10000 - 2 * k) > 8 * (11000 + 2 * k);
  };
  CHECK(strict_ok(58));
  CHECK_FALSE(strict_ok(59));
  CHECK(p.eps == Catch::Approx(0.0058).margin(1e-15));

  criterion(2, above && below && p.n_scales == 184 && strict_ok(58) &&
                   !strict_ok(59),
            "N = 184 and eps = 0.0058 certified by exact arithmetic");
}

TEST_CASE("criterion 3: block entropy matches analytic oracles within 2%") {
  const ElementSet F10 = ElementSet::interval(kZ, 0, 9);
  struct Case {
    SymbolicSystem sys;
    double target;
    std::string name;
  };
  const double h03 = -(0.3 * std::log2(0.3) + 0.7 * std::log2(0.7));
  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  const std::vector<Case> cases = {
      {SymbolicSystem::bernoulli(kZ, {0.5, 0.5}), 1.0, "bernoulli(0.5)"},
      {SymbolicSystem::bernoulli(kZ, {0.3, 0.7}), h03, "bernoulli(0.3)"},
      {chain, analytic_entropy(chain), "markov(stay=0.9)"}};
  bool all = true;
  for (const auto& c : cases) {
    const BlockEntropyEstimate est = block_entropy(c.sys, F10, 1000000, 17);
    const double rel = std::abs(est.rate_bits - c.target) / c.target;
    const bool in_band = std::abs(est.rate_bits - c.target) <
                         3 * est.stderr_rate + 1e-12;
    INFO(c.name << ": " << est.rate_bits << " vs " << c.target << " (rel "
                << rel << ", stderr " << est.stderr_rate << ")");
    CHECK(rel < 0.02);
    CHECK(in_band);
    all = all && rel < 0.02 && in_band;
  }
  criterion(3, all, "bernoulli(0.5), bernoulli(0.3), markov(0.9) within 2% "
                    "and 3 stderr at 10^6 samples");
}

TEST_CASE("criterion 4: Abramov ratio within 5% on induced maps") {
  const SymbolicSystem fair = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  const AbramovReport rb = abramov_check(fair, Cylinder::single(0, 0), 1000000, 23);
  const AbramovReport rm = abramov_check(chain, Cylinder::single(0, 0), 1000000, 29);
  INFO("bernoulli ratio " << rb.ratio << ", markov ratio " << rm.ratio);
  CHECK(rb.target_bits == Catch::Approx(2.0));
  CHECK(rm.target_bits == Catch::Approx(2 * analytic_entropy(chain)));
  const bool ok = rb.ratio > 0.95 && rb.ratio < 1.05 && rm.ratio > 0.95 &&
                  rm.ratio < 1.05;
  CHECK(rb.ratio > 0.95);
  CHECK(rb.ratio < 1.05);
  CHECK(rm.ratio > 0.95);
  CHECK(rm.ratio < 1.05);
  criterion(4, ok, "induced entropy / (h/mu(A)) in [0.95, 1.05] for both "
                   "systems at 10^6 words");
}

TEST_CASE("criterion 5: Kac identity within 3 stderr") {
  const SymbolicSystem fair = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  const KacReport kb =
      kac_check(SymbolicSystem::induce(fair, Cylinder::single(0, 0)), 1000000, 31);
  const KacReport km =
      kac_check(SymbolicSystem::induce(chain, Cylinder::single(0, 0)), 1000000, 37);
  INFO("bernoulli " << kb.mean_return << " +/- " << kb.stderr_mean
                    << ", markov " << km.mean_return << " +/- "
                    << km.stderr_mean);
  CHECK(kb.pass);
  CHECK(km.pass);
  criterion(5, kb.pass && km.pass,
            "mean return time within 3 stderr of 1/nu(A) on both systems");
}

TEST_CASE("criterion 6: ball and rls oracle equivalence") {
  bool all = true;

  // Exhaustive family: 1 or 2 geometry fibers, base <= 6, towers <= 5,
  // 2-letter partitions, every labeling up to the product cap, seeded
  // samples beyond it.
  int64_t instances = 0, equalities = 0;
  auto run_family = [&](int orbits, Coord window, int64_t tower_len) {
    const int cells = static_cast<int>(window) * orbits;
    std::vector<std::vector<int>> labels(
        static_cast<size_t>(orbits),
        std::vector<int>(static_cast<size_t>(window), 0));
    const bool exhaustive = cells <= 12;
    const int64_t variants = exhaustive ? (int64_t{1} << cells) : 50;
    Rng rng(static_cast<uint64_t>(cells) * 977 + static_cast<uint64_t>(tower_len),
            5);
    for (int64_t v = 0; v < variants; ++v) {
      for (int bit = 0; bit < cells; ++bit) {
        const int val = exhaustive ? static_cast<int>((v >> bit) & 1)
                                   : static_cast<int>(rng.next_below(2));
        labels[static_cast<size_t>(bit / window)]
              [static_cast<size_t>(bit % window)] = val;
      }
      const SectionSample s = labeled_orbits(labels);
      const FiberPartition fibers = FiberPartition::geometry(s);
      const Partition P = Partition::from_labels(s);
      const Castle c = castle_rank_intervals(s, tower_len);
      for (double eps : {0.0, 0.2}) {
        const double up = castle_entropy_upper(s, c, P, fibers, eps).bits;
        const double ex = castle_entropy_exact(s, c, P, fibers, eps).bits;
        if (!(up >= ex - 1e-12)) all = false;
        if (eps == 0.0) {
          ++instances;
          if (std::abs(up - ex) < 1e-12) ++equalities;
          if (std::abs(up - ex) >= 1e-12) all = false;
        }
      }
    }
  };
  // Single fiber: one tower per orbit.
  for (int orbits = 1; orbits <= 6; ++orbits)
    for (Coord w = 1; w <= 5; ++w) run_family(orbits, w, w);
  // Two fibers: two towers per orbit (base = 2 * orbits <= 6).
  for (int orbits = 1; orbits <= 3; ++orbits)
    for (Coord m = 1; m <= 5; ++m) run_family(orbits, 2 * m, m);
  CHECK(all);
  CHECK(instances == equalities);

  // rls agrees with the independent reimplementation on 1000 random covers.
  const SectionSample s = labeled_orbits({{0, 1, 0}, {1, 1, 0}});
  const FiberPartition fibers = FiberPartition::geometry(s);
  const std::vector<int32_t> A = {0, 1, 2, 3, 4, 5};
  Rng rng(2026, 0);
  bool rls_ok = true;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::vector<int32_t>> cover(1 + rng.next_below(5));
    for (auto& c : cover)
      for (int32_t x : A)
        if (rng.next_bernoulli(0.4)) c.push_back(x);
    std::vector<std::vector<int32_t>> nonempty;
    for (auto& c : cover)
      if (!c.empty()) nonempty.push_back(c);
    const double a = rls(s, fibers, A, nonempty);
    const double b = rls_oracle(s, fibers, A, nonempty);
    if (std::abs(a - b) > 1e-12) rls_ok = false;
  }
  CHECK(rls_ok);
  criterion(6, all && rls_ok,
            "upper >= exact on " + std::to_string(instances) +
                " instances (equality on the clusterable family); rls matches "
                "the oracle on 1000 covers");
}

TEST_CASE("criterion 7: castle comparison inequality on 30 seeds") {
  int holds = 0;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    const SectionSample s = bernoulli_orbits(25, 1000, seed * 101);
    const ComparisonReport rep = comparison_check(
        s, Partition::from_labels(s), FiberPartition::geometry(s),
        castle_rank_intervals(s, 10), castle_rank_intervals(s, 100), 0.05);
    if (rep.observed) ++holds;
    CHECK(rep.observed);
  }
  criterion(7, holds == 30,
            "h^{4eps}(T') <= h^{eps}(T) + 2eps + eps log|P| observed on " +
                std::to_string(holds) + "/30 seeds");
}

TEST_CASE("criterion 8: transfer between cocycles within 10%") {
  int agree = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const GroupModel z2 = GroupModel::lattice(2);
    const SymbolicSystem field = SymbolicSystem::bernoulli(z2, {0.5, 0.5});
    const auto built =
        from_orbit_window(field, ElementSet::box(z2, {0, 0}, {19, 19}),
                          SectionRule::always(), 25, seed * 7);
    const SectionSample& s = *built.sample;  // 10^4 section points
    REQUIRE(s.size() == 10000);
    const TransferReport rep =
        transfer_check(s, Partition::from_labels(s),
                       FiberPartition::geometry(s), 2, 0.10, 0.05);
    INFO("seed " << seed << ": alpha " << rep.h_alpha << " beta " << rep.h_beta
                 << " rel gap " << rep.rel_gap);
    if (rep.pass) ++agree;
    CHECK(rep.pass);
  }
  criterion(8, agree == 10,
            "Z^2-cocycle vs rank-cocycle entropies agree within 10% on " +
                std::to_string(agree) + "/10 seeds");
}

TEST_CASE("criterion 9: uniform mixing with oracle control") {
  bool ok = true;

  // Bernoulli field on Z^2: defect indistinguishable from zero at all scales.
  const GroupModel z2 = GroupModel::lattice(2);
  const SymbolicSystem field = SymbolicSystem::bernoulli(z2, {0.5, 0.5});
  const auto bern = mixing_scan(field, SymbolPartition::identity(2), {1, 2, 3},
                                4, 200000, 41);
  for (const auto& r : bern) {
    INFO(r.k_description << " defect " << r.defect << " stderr "
                         << r.stderr_defect);
    const bool small = r.defect < 3 * r.stderr_defect;
    CHECK(small);
    ok = ok && small;
  }

  // Markov(stay 0.9): empirical defect tracks the exact matrix-power oracle
  // at gaps 1..30.
  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);
  std::vector<int64_t> gaps;
  for (int64_t g = 1; g <= 30; ++g) gaps.push_back(g);
  const auto scan = markov_gap_scan(chain, SymbolPartition::identity(2), gaps,
                                    100000, 43);
  for (const auto& r : scan) {
    REQUIRE(r.oracle_defect.has_value());
    const bool match =
        std::abs(r.defect - *r.oracle_defect) < 3 * r.stderr_defect;
    INFO(r.k_description << ": " << r.defect << " vs oracle "
                         << *r.oracle_defect << " stderr " << r.stderr_defect);
    CHECK(match);
    ok = ok && match;
  }

  // The oracle predicts the scale where the defect drops below 0.01 bits.
  int64_t g_star = -1;
  for (int64_t g = 1; g <= 60 && g_star < 0; ++g)
    if (markov_gap_defect_exact(chain.matrix(), chain.stationary(), g) < 0.01)
      g_star = g;
  REQUIRE(g_star > 0);
  const auto at_star = markov_gap_scan(chain, SymbolPartition::identity(2),
                                       {g_star}, 1000000, 47);
  INFO("g* = " << g_star << ", empirical defect " << at_star[0].defect);
  CHECK(at_star[0].defect < 0.01);
  ok = ok && at_star[0].defect < 0.01;

  // Periodic negative control stays above 0.05 bits at every gap.
  const SymbolicSystem cycle = SymbolicSystem::periodic_cycle(2);
  for (int64_t g = 1; g <= 30; ++g)
    CHECK(markov_gap_defect_exact(cycle.matrix(), cycle.stationary(), g) >
          0.05);
  const auto control = markov_gap_scan(cycle, SymbolPartition::identity(2),
                                       {1, 3, 7, 15, 30}, 20000, 53);
  for (const auto& r : control) {
    CHECK(r.defect > 0.05);
    ok = ok && r.defect > 0.05;
  }
  criterion(9, ok,
            "bernoulli defect ~ 0; markov matches the exact oracle at gaps "
            "1..30 and drops below 0.01 at g* = " +
                std::to_string(g_star) + "; periodic control stays above 0.05");
}

TEST_CASE("criterion 10: ergodic theorem trends across Folner scales") {
  const SymbolicSystem fair = SymbolicSystem::bernoulli(kZ, {0.5, 0.5});
  const ElementSet w = ElementSet::interval(kZ, 0, 99999);
  const TilingParams params = params_for(0.1, 1);
  const std::vector<Coord> scales = {10, 100, 1000, 10000};

  int dev_improves = 0, castle_improves = 0, castle_pass_large = 0;
  const int seeds = 30;
  for (uint64_t seed = 1; seed <= seeds; ++seed) {
    const auto built = from_orbit_window(fair, w, SectionRule::always(), 1,
                                         seed * 997);
    const SectionSample& s = *built.sample;
    std::vector<double> h(s.size());
    for (size_t i = 0; i < s.size(); ++i)
      h[i] = s.label(static_cast<int32_t>(i)) == 0 ? 1.0 : 0.0;

    std::vector<double> dev, mass;
    for (Coord n : scales) {
      dev.push_back(ergodic_deviation(s, h, folner_set(kZ, n), 0.02)
                        .deviation_mass);
      const Castle c = castle_from_quasi_tiling(s, n, params);
      const CastleErgodicReport rep = castle_ergodic_check(s, c, h, 0.1);
      mass.push_back(rep.best_mass_fraction);
      if (n == scales.back() && rep.pass) ++castle_pass_large;
    }
    if (dev.back() < dev.front()) ++dev_improves;
    if (mass.back() > mass.front()) ++castle_improves;
  }
  // One-sided sign test at 30 seeds: >= 20 successes rejects "no trend"
  // at the 95% level.
  INFO("deviation improves on " << dev_improves << "/30, castle mass on "
                                << castle_improves << "/30, castle passes at "
                                << castle_pass_large << "/30");
  CHECK(dev_improves >= 20);
  CHECK(castle_improves >= 20);
  CHECK(castle_pass_large >= 28);
  criterion(10, dev_improves >= 20 && castle_improves >= 20,
            "mean-ergodic deviation and castle mass improve from scale 10 to "
            "10^4 on " +
                std::to_string(dev_improves) + "/30 and " +
                std::to_string(castle_improves) + "/30 seeds (sign test, 95%)");
}

TEST_CASE("criterion 11: byte-identical reruns across thread counts") {
  ExperimentConfig tile;
  tile.command = "tile";
  tile.group = "z2";
  tile.scale = 40;
  tile.density = 0.97;
  tile.seed = 7;
  tile.has_seed = true;
  tile.stable_output = true;
  const std::string t1 = run(tile).record.dump();
  const std::string t2 = run(tile).record.dump();
  CHECK(t1 == t2);

  ExperimentConfig mix;
  mix.command = "mixing";
  mix.system = "markov:0.9";
  mix.gaps = {1, 4};
  mix.samples = 20000;
  mix.seed = 11;
  mix.has_seed = true;
  mix.stable_output = true;
  mix.threads = 1;
  const std::string m1 = run(mix).record.dump();
  mix.threads = 4;
  const std::string m4 = run(mix).record.dump();
  CHECK(m1 == m4);

  ExperimentConfig ent;
  ent.command = "entropy";
  ent.system = "bernoulli:0.5";
  ent.window = 10;
  ent.samples = 20000;
  ent.seed = 3;
  ent.has_seed = true;
  ent.stable_output = true;
  const std::string e1 = run(ent).record.dump();
  const std::string e2 = run(ent).record.dump();
  CHECK(e1 == e2);

  criterion(11, t1 == t2 && m1 == m4 && e1 == e2,
            "tile, mixing (1 vs 4 threads) and entropy records byte-identical");
}
