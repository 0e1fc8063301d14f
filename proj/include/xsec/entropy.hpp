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

#ifndef XSEC_ENTROPY_HPP_
#define XSEC_ENTROPY_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "xsec/section.hpp"
#include "xsec/systems.hpp"

namespace xsec {

inline double log2_plus(double x) { return x > 1.0 ? std::log2(x) : 0.0; }

// Non-strict coverage test |phi(x,E)| >= (1-eps)|T_x|.  The continuous
// statement is strict, but with integer sizes the strict form would outlaw
// even a full-coverage ball at eps = 0; every worked example expects that
// case to be valid.
inline bool coverage_ok(int64_t kept, double eps, int64_t tower_size) {
  return static_cast<double>(kept) >=
         (1.0 - eps) * static_cast<double>(tower_size) - 1e-9;
}

// ---------------------------------------------------------------------------
// Partitions and fibers

struct Partition {
  std::vector<int> labels;  // one label per section point
  int k = 1;

  static Partition from_labels(const SectionSample& s) {
    Partition p;
    p.labels.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i)
      p.labels.push_back(s.label(static_cast<int32_t>(i)));
    p.k = std::max(1, s.alphabet());
    return p;
  }

  static Partition constant(const SectionSample& s) {
    Partition p;
    p.labels.assign(s.size(), 0);
    p.k = 1;
    return p;
  }
};

// Finite stand-in for a sub-sigma-algebra that keeps the cocycle measurable:
// atoms ("fibers") must consist of points with identical address spectra
// { alpha(x,y) : y in class(x) }.
struct FiberPartition {
  std::vector<int32_t> fiber;  // fiber id per point
  int32_t n_fibers = 0;

  // Every point its own fiber (the full sigma-algebra; always valid).
  static FiberPartition singletons(const SectionSample& s) {
    FiberPartition f;
    f.fiber.resize(s.size());
    for (size_t i = 0; i < s.size(); ++i) f.fiber[i] = static_cast<int32_t>(i);
    f.n_fibers = static_cast<int32_t>(s.size());
    return f;
  }

  // One fiber for all points; valid only when all spectra coincide.
  static FiberPartition trivial(const SectionSample& s) {
    FiberPartition f;
    f.fiber.assign(s.size(), 0);
    f.n_fibers = 1;
    return f;
  }

  // Geometry fibers: points are identified when their class shapes (address
  // sets normalized by right translation) and relative positions agree.
  // Equal keys imply equal spectra, so the result is always a valid fiber
  // partition, coarsest on sections whose classes are congruent windows.
  static FiberPartition geometry(const SectionSample& s) {
    const GroupModel& g = s.group();
    FiberPartition f;
    f.fiber.assign(s.size(), -1);
    // Class shapes are interned by hash with a stored representative, so a
    // hash collision is detected instead of silently merging shapes.
    std::map<uint64_t, std::vector<Element>> shape_reps;
    std::map<std::pair<uint64_t, Element>, int32_t> ids;
    for (size_t c = 0; c < s.n_classes(); ++c) {
      const auto& cls = s.class_members(static_cast<int32_t>(c));
      const Element anchor_inv = g.inv(s.address(cls.front()));
      std::vector<Element> shape;
      shape.reserve(cls.size());
      for (int32_t pid : cls) shape.push_back(g.mul(s.address(pid), anchor_inv));
      std::sort(shape.begin(), shape.end());
      uint64_t shape_hash = 0x9E3779B97F4A7C15ull;
      ElementHash eh;
      for (const Element& e : shape)
        shape_hash = shape_hash * 0x100000001B3ull + eh(e);
      auto [rep, fresh_shape] = shape_reps.try_emplace(shape_hash, shape);
      if (!fresh_shape && rep->second != shape)
        throw std::runtime_error("geometry fibers: shape hash collision");
      for (int32_t pid : cls) {
        const Element rel = g.mul(s.address(pid), anchor_inv);
        auto [it, fresh] = ids.try_emplace({shape_hash, rel}, f.n_fibers);
        if (fresh) ++f.n_fibers;
        f.fiber[static_cast<size_t>(pid)] = it->second;
      }
    }
    return f;
  }
};

// Checks that fiber-mates have identical address spectra.  Exhaustive for
// small classes; spectra of large classes are compared through their sorted
// vectors up to a budget.
inline bool validate_fibers(const SectionSample& s, const FiberPartition& f,
                            std::string* diag = nullptr) {
  const GroupModel& g = s.group();
  std::unordered_map<int32_t, std::vector<Element>> rep_spectrum;
  auto spectrum = [&](int32_t x) {
    const auto& cls = s.class_members(s.class_of(x));
    std::vector<Element> spec;
    spec.reserve(cls.size());
    for (int32_t y : cls)
      spec.push_back(g.mul(s.address(x), g.inv(s.address(y))));
    std::sort(spec.begin(), spec.end());
    return spec;
  };
  int64_t budget = 200000;
  for (size_t x = 0; x < s.size(); ++x) {
    const int32_t fid = f.fiber[x];
    const auto& cls = s.class_members(s.class_of(static_cast<int32_t>(x)));
    if (budget - static_cast<int64_t>(cls.size()) < 0) break;
    budget -= static_cast<int64_t>(cls.size());
    auto it = rep_spectrum.find(fid);
    if (it == rep_spectrum.end()) {
      rep_spectrum.emplace(fid, spectrum(static_cast<int32_t>(x)));
      continue;
    }
    if (it->second != spectrum(static_cast<int32_t>(x))) {
      if (diag)
        *diag = "fiber " + std::to_string(fid) +
                " has members with different address spectra";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Relative logarithmic size

// rls_A(C | G) = sum_x in A  mu(x) log2+ #{ i : C_i meets fiber(x) }.
inline double rls(const SectionSample& s, const FiberPartition& fibers,
                  const std::vector<int32_t>& A,
                  const std::vector<std::vector<int32_t>>& cover) {
  std::vector<char> inA(s.size(), 0);
  for (int32_t x : A) inA[static_cast<size_t>(x)] = 1;
  std::unordered_map<int32_t, int64_t> touch_count;
  std::unordered_map<int32_t, std::vector<char>> touched;  // fiber -> per-set flag
  for (size_t i = 0; i < cover.size(); ++i) {
    for (int32_t x : cover[i]) {
      if (!inA[static_cast<size_t>(x)])
        throw std::invalid_argument("rls: cover set " + std::to_string(i) +
                                    " is not contained in A");
      auto& flags = touched[fibers.fiber[static_cast<size_t>(x)]];
      if (flags.empty()) flags.assign(cover.size(), 0);
      if (!flags[i]) {
        flags[i] = 1;
        ++touch_count[fibers.fiber[static_cast<size_t>(x)]];
      }
    }
  }
  double bits = 0;
  for (int32_t x : A) {
    auto it = touch_count.find(fibers.fiber[static_cast<size_t>(x)]);
    const int64_t n = it == touch_count.end() ? 0 : it->second;
    bits += s.weight(x) * log2_plus(static_cast<double>(n));
  }
  return bits;
}

// ---------------------------------------------------------------------------
// Balls

// A (P, T, eps, G)-ball: members B of the castle base, an abstract address
// alphabet E, and a fiber-measurable address map a(fiber, e) resolved
// through the cocycle: phi(x, e) is the class member at alpha-address
// a(fiber(x), e).
struct Ball {
  std::vector<int32_t> members;
  int n_addresses = 0;
  std::unordered_map<int32_t, std::vector<Element>> fiber_addresses;
};

struct BallCheck {
  bool valid = false;
  std::string violation;
};

inline BallCheck validate_ball(const SectionSample& s, const Castle& castle,
                               const Partition& P, const FiberPartition& fibers,
                               double eps, const Ball& ball) {
  std::unordered_map<int32_t, size_t> base_index;
  for (size_t i = 0; i < castle.base.size(); ++i) base_index[castle.base[i]] = i;

  std::vector<std::vector<int>> names;  // member -> labels along E
  std::vector<char> seen(s.size(), 0);
  for (int32_t x : ball.members) {
    auto bit = base_index.find(x);
    if (bit == base_index.end())
      return {false, "B is not a subset of the castle base"};
    const auto& tower = castle.towers[bit->second];
    std::vector<char> in_tower(s.size(), 0);
    for (int32_t t : tower) in_tower[static_cast<size_t>(t)] = 1;

    auto ait = ball.fiber_addresses.find(fibers.fiber[static_cast<size_t>(x)]);
    if (ait == ball.fiber_addresses.end() ||
        static_cast<int>(ait->second.size()) != ball.n_addresses)
      return {false, "missing or misshapen address row for a member fiber"};

    std::vector<int> name;
    std::unordered_map<Element, int, ElementHash> distinct;
    for (const Element& a : ait->second) {
      if (++distinct[a] > 1) return {false, "phi is not injective (repeated address)"};
      const auto y = s.resolve(x, a);
      if (!y || !in_tower[static_cast<size_t>(*y)])
        return {false, "condition 1: phi(x,e) must lie in the tower over x"};
      if (seen[static_cast<size_t>(*y)])
        return {false, "phi is not injective across members"};
      seen[static_cast<size_t>(*y)] = 1;
      name.push_back(P.labels[static_cast<size_t>(*y)]);
    }
    if (!coverage_ok(ball.n_addresses, eps, static_cast<int64_t>(tower.size())))
      return {false, "condition 2: |phi(x,E)| covers less than (1-eps) of the tower"};
    names.push_back(std::move(name));
  }
  for (size_t m = 1; m < names.size(); ++m)
    if (names[m] != names[0])
      return {false, "condition 3: P-name differs across members"};
  return {true, ""};
}

// ---------------------------------------------------------------------------
// Castle entropy: greedy upper bound and exact infimum

namespace detail {

struct TowerView {
  int32_t fiber = 0;
  std::vector<Element> addresses;  // alpha(x, T_x), sorted
  std::vector<int> labels;         // aligned with addresses
  int64_t size = 0;
};

inline std::vector<TowerView> tower_views(const SectionSample& s,
                                          const Castle& castle,
                                          const Partition& P,
                                          const FiberPartition& fibers) {
  const GroupModel& g = s.group();
  std::vector<TowerView> views(castle.base.size());
  for (size_t i = 0; i < castle.base.size(); ++i) {
    TowerView& v = views[i];
    const int32_t x = castle.base[i];
    v.fiber = fibers.fiber[static_cast<size_t>(x)];
    std::vector<std::pair<Element, int>> rel;
    for (int32_t t : castle.towers[i])
      rel.push_back({g.mul(s.address(x), g.inv(s.address(t))),
                     P.labels[static_cast<size_t>(t)]});
    std::sort(rel.begin(), rel.end());
    for (auto& [a, lab] : rel) {
      v.addresses.push_back(a);
      v.labels.push_back(lab);
    }
    v.size = static_cast<int64_t>(rel.size());
  }
  return views;
}

}  // namespace detail

struct CastleEntropy {
  double bits = 0;          // rls of the chosen ball cover, mu-weighted
  double normalized = 0;    // bits / mu_T(A)
  std::vector<Ball> cover;
};

// Greedy upper bound for the ball-cover infimum: base points are grouped by
// (fiber, tower address set); within a group, addresses are dropped in
// order of decreasing cross-tower disagreement while the (1-eps) coverage
// budget allows, and the group is clustered by the surviving P-name.
// Always >= the exact infimum.
inline CastleEntropy castle_entropy_upper(const SectionSample& s,
                                          const Castle& castle,
                                          const Partition& P,
                                          const FiberPartition& fibers,
                                          double eps) {
  validate_castle(s, castle);
  const auto views = detail::tower_views(s, castle, P, fibers);

  // Exact grouping by (fiber, tower address set); the address vectors are
  // the keys, so no hashing can conflate distinct geometries.
  std::map<std::pair<int32_t, std::vector<Element>>, std::vector<size_t>> groups;
  for (size_t i = 0; i < views.size(); ++i)
    groups[{views[i].fiber, views[i].addresses}].push_back(i);

  CastleEntropy out;
  for (auto& [key, idxs] : groups) {
    const auto& first = views[idxs.front()];
    const int64_t m = first.size;
    // Largest drop budget still meeting the coverage condition.
    int64_t budget = 0;
    while (budget < m - 1 && coverage_ok(m - (budget + 1), eps, m)) ++budget;

    // Disagreement = members not matching the majority label at an address.
    std::vector<std::pair<int64_t, size_t>> ranked;  // (-disagreement, addr idx)
    for (size_t a = 0; a < first.addresses.size(); ++a) {
      std::map<int, int64_t> freq;
      for (size_t i : idxs) ++freq[views[i].labels[a]];
      int64_t top = 0;
      for (auto& [lab, cnt] : freq) top = std::max(top, cnt);
      ranked.push_back({-(static_cast<int64_t>(idxs.size()) - top), a});
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<char> dropped(first.addresses.size(), 0);
    int64_t used = 0;
    for (auto& [neg, a] : ranked) {
      if (neg == 0 || used >= budget) break;
      dropped[a] = 1;
      ++used;
    }
    std::vector<size_t> kept;
    for (size_t a = 0; a < first.addresses.size(); ++a)
      if (!dropped[a]) kept.push_back(a);

    std::map<std::vector<int>, std::vector<size_t>> clusters;
    for (size_t i : idxs) {
      std::vector<int> name;
      name.reserve(kept.size());
      for (size_t a : kept) name.push_back(views[i].labels[a]);
      clusters[std::move(name)].push_back(i);
    }
    for (auto& [name, members] : clusters) {
      Ball b;
      b.n_addresses = static_cast<int>(kept.size());
      std::vector<Element> addrs;
      for (size_t a : kept) addrs.push_back(first.addresses[a]);
      for (size_t i : members) b.members.push_back(castle.base[i]);
      b.fiber_addresses[key.first] = addrs;
      out.cover.push_back(std::move(b));
    }
  }

  std::vector<std::vector<int32_t>> cover_sets;
  for (const Ball& b : out.cover) cover_sets.push_back(b.members);
  out.bits = rls(s, fibers, castle.base, cover_sets);
  const double mt = mu_T(s, castle);
  out.normalized = mt > 0 ? out.bits / mt : 0;
  return out;
}

namespace detail {

// Runs fn(assignment, n_blocks) for every set partition of {0..n-1},
// enumerated through restricted growth strings.
template <typename Fn>
inline void for_each_set_partition(int n, Fn fn) {
  std::vector<int> a(static_cast<size_t>(n), 0);
  std::vector<int> maxval(static_cast<size_t>(n), 0);
  for (;;) {
    int blocks = 0;
    for (int v : a) blocks = std::max(blocks, v + 1);
    fn(a, blocks);
    int i = n - 1;
    while (i > 0 && a[static_cast<size_t>(i)] >= maxval[static_cast<size_t>(i)] + 1)
      --i;
    if (i == 0) break;
    ++a[static_cast<size_t>(i)];
    for (int j = i + 1; j < n; ++j) {
      a[static_cast<size_t>(j)] = 0;
      maxval[static_cast<size_t>(j)] =
          std::max(maxval[static_cast<size_t>(j - 1)],
                   a[static_cast<size_t>(j - 1)]);
    }
    maxval[static_cast<size_t>(i)] =
        std::max(maxval[static_cast<size_t>(i - 1)], a[static_cast<size_t>(i - 1)]);
  }
}

// Does a block of base points admit a valid (E, address map)?  Per fiber,
// usable addresses are the common ones on which same-fiber members agree;
// a shared label template exists exactly when the per-label minima across
// fibers add up to enough addresses.
inline bool block_feasible(const std::vector<TowerView>& views,
                           const std::vector<size_t>& block, double eps) {
  std::map<int32_t, std::vector<size_t>> by_fiber;
  for (size_t i : block) by_fiber[views[i].fiber].push_back(i);

  std::map<int, int64_t> label_min;
  bool first_fiber = true;
  for (auto& [fid, members] : by_fiber) {
    // Common addresses with agreeing labels across the fiber's members.
    std::map<Element, int> usable;  // address -> label
    const auto& head = views[members.front()];
    for (size_t a = 0; a < head.addresses.size(); ++a) {
      const Element& addr = head.addresses[a];
      int label = head.labels[a];
      bool ok = true;
      for (size_t mi = 1; mi < members.size() && ok; ++mi) {
        const auto& v = views[members[mi]];
        auto it = std::lower_bound(v.addresses.begin(), v.addresses.end(), addr);
        if (it == v.addresses.end() || *it != addr) {
          ok = false;
          break;
        }
        const size_t pos = static_cast<size_t>(it - v.addresses.begin());
        if (v.labels[pos] != label) ok = false;
      }
      if (ok) usable[addr] = label;
    }
    std::map<int, int64_t> counts;
    for (auto& [addr, label] : usable) ++counts[label];
    if (first_fiber) {
      label_min = std::move(counts);
      first_fiber = false;
    } else {
      for (auto it = label_min.begin(); it != label_min.end();) {
        auto jt = counts.find(it->first);
        if (jt == counts.end()) {
          it = label_min.erase(it);
        } else {
          it->second = std::min(it->second, jt->second);
          ++it;
        }
      }
    }
  }
  int64_t l_star = 0;
  for (auto& [label, cnt] : label_min) l_star += cnt;
  for (size_t i : block)
    if (!coverage_ok(l_star, eps, views[i].size)) return false;
  return true;
}

}  // namespace detail

// Exact infimum of rls over ball covers, by brute force over set partitions
// of the base.  Overlapping covers never beat partitions (disjointifying a
// cover only shrinks the touch counts), so partitions suffice.
inline CastleEntropy castle_entropy_exact(const SectionSample& s,
                                          const Castle& castle,
                                          const Partition& P,
                                          const FiberPartition& fibers,
                                          double eps, int cap = 8) {
  validate_castle(s, castle);
  const int b = static_cast<int>(castle.base.size());
  if (b > cap)
    throw std::invalid_argument("castle_entropy_exact: base size " +
                                std::to_string(b) + " exceeds the cap " +
                                std::to_string(cap));
  const auto views = detail::tower_views(s, castle, P, fibers);

  double best = -1;
  detail::for_each_set_partition(b, [&](const std::vector<int>& assign,
                                        int n_blocks) {
    std::vector<std::vector<size_t>> blocks(static_cast<size_t>(n_blocks));
    for (int i = 0; i < b; ++i)
      blocks[static_cast<size_t>(assign[static_cast<size_t>(i)])].push_back(
          static_cast<size_t>(i));
    for (const auto& block : blocks)
      if (!detail::block_feasible(views, block, eps)) return;
    std::vector<std::vector<int32_t>> cover;
    for (const auto& block : blocks) {
      std::vector<int32_t> ids;
      for (size_t i : block) ids.push_back(castle.base[i]);
      cover.push_back(std::move(ids));
    }
    const double bits = rls(s, fibers, castle.base, cover);
    if (best < 0 || bits < best) best = bits;
  });

  CastleEntropy out;
  out.bits = best;
  const double mt = mu_T(s, castle);
  out.normalized = mt > 0 ? best / mt : 0;
  return out;
}

// The limiting relative entropy is only ever reported as a table over
// (eps, castle scale): a single extrapolated number would overstate what a
// finite sample can certify.  The stability flag records whether the last
// two scale steps moved the value by less than `stability_tol` at every eps
// (a Richardson-style plateau test), which is evidence, not a limit claim.
struct EntropyTableRow {
  double eps = 0;
  int64_t scale = 0;
  double bits = 0;
  double normalized = 0;
};

struct EntropyTable {
  std::vector<EntropyTableRow> rows;
  bool extrapolation_stable = false;
};

inline EntropyTable entropy_table(const SectionSample& s, const Partition& P,
                                  const FiberPartition& fibers,
                                  const std::vector<double>& eps_list,
                                  const std::vector<int64_t>& scales,
                                  double stability_tol = 0.05) {
  EntropyTable table;
  table.extrapolation_stable = scales.size() >= 3;
  for (double eps : eps_list) {
    std::vector<double> values;
    for (int64_t scale : scales) {
      const Castle c = castle_rank_intervals(s, scale);
      const CastleEntropy e = castle_entropy_upper(s, c, P, fibers, eps);
      table.rows.push_back({eps, scale, e.bits, e.normalized});
      values.push_back(e.normalized);
    }
    if (values.size() >= 3) {
      const size_t n = values.size();
      const double d1 = std::abs(values[n - 2] - values[n - 3]);
      const double d2 = std::abs(values[n - 1] - values[n - 2]);
      if (!(d2 <= stability_tol && d2 <= d1 + stability_tol))
        table.extrapolation_stable = false;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Castle comparison (the two-castle inequality)

struct ComparisonReport {
  double lhs = 0;  // h^{4 eps} of the more invariant castle
  double rhs = 0;  // h^{eps} of the reference castle + 2 eps + eps log2 |P|
  bool observed = false;
  std::string mode;  // "exact" or "greedy-bound"
};

inline ComparisonReport comparison_check(const SectionSample& s,
                                         const Partition& P,
                                         const FiberPartition& fibers,
                                         const Castle& castle_ref,
                                         const Castle& castle_inv, double eps,
                                         int exact_cap = 8) {
  for (const Castle* c : {&castle_ref, &castle_inv})
    if (castle_range_mass(s, *c) <= 1.0 - eps)
      throw std::invalid_argument(
          "comparison_check: both castles must cover more than 1-eps of S");
  ComparisonReport rep;
  const bool exact = static_cast<int>(castle_ref.base.size()) <= exact_cap &&
                     static_cast<int>(castle_inv.base.size()) <= exact_cap;
  rep.mode = exact ? "exact" : "greedy-bound";
  const auto eval = [&](const Castle& c, double e) {
    return exact ? castle_entropy_exact(s, c, P, fibers, e, exact_cap).bits
                 : castle_entropy_upper(s, c, P, fibers, e).bits;
  };
  rep.lhs = eval(castle_inv, 4 * eps);
  rep.rhs = eval(castle_ref, eps) + 2 * eps + eps * std::log2(static_cast<double>(P.k));
  rep.observed = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

// ---------------------------------------------------------------------------
// U-fattening

// Copies the section labels to U-translates inside the window; everything
// else gets the extra label |P|.  Throws when U-translates of S overlap.
inline std::vector<int> fatten(const GroupModel& g, const ElementSet& window,
                               const std::vector<Element>& section_addresses,
                               const std::vector<int>& section_labels, int k,
                               const ElementSet& U) {
  if (section_addresses.size() != section_labels.size())
    throw std::invalid_argument("fatten: address/label size mismatch");
  std::vector<int> out(window.size(), k);
  std::unordered_map<Element, size_t, ElementHash> pos;
  const auto& elems = window.elems();
  for (size_t i = 0; i < elems.size(); ++i) pos[elems[i]] = i;
  std::vector<char> claimed(window.size(), 0);
  for (size_t i = 0; i < section_addresses.size(); ++i)
    for (const Element& u : U) {
      const Element t = g.mul(u, section_addresses[i]);
      auto it = pos.find(t);
      if (it == pos.end()) continue;  // truncated at the window edge
      if (claimed[it->second])
        throw std::invalid_argument("fatten: U-translates of S overlap");
      claimed[it->second] = 1;
      out[it->second] = section_labels[i];
    }
  return out;
}

// ---------------------------------------------------------------------------
// Block entropy estimation

struct BlockEntropyEstimate {
  double rate_bits = 0;     // conditional estimator H(F) - H(F minus last)
  double naive_bits = 0;    // H(F)/|F|
  double joint_bits = 0;    // Miller-Madow corrected H(F)
  double stderr_rate = 0;   // seed-split standard error of rate_bits
  int64_t observed_patterns = 0;
  int64_t samples = 0;
};

namespace detail {

struct CountedEntropy {
  double plugin = 0;
  double mm = 0;
  int64_t distinct = 0;
};

template <typename Map>
inline CountedEntropy entropy_of_counts(const Map& counts, int64_t n) {
  CountedEntropy out;
  double acc = 0;
  for (const auto& [key, c] : counts) {
    acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
    ++out.distinct;
  }
  out.plugin = std::log2(static_cast<double>(n)) - acc / static_cast<double>(n);
  out.mm = out.plugin + static_cast<double>(out.distinct - 1) /
                            (2.0 * static_cast<double>(n) * std::log(2.0));
  return out;
}

// Samples one pattern over the sorted positions.  Z systems sample the
// contiguous span and project; Bernoulli fields draw per position.
inline void sample_pattern(const SymbolicSystem& sys,
                           const std::vector<Element>& positions, Rng& rng,
                           std::vector<int>& out) {
  out.clear();
  if (sys.kind() == SymbolicSystem::Kind::Bernoulli) {
    for (size_t i = 0; i < positions.size(); ++i)
      out.push_back(rng.next_discrete(sys.probs()));
    return;
  }
  const Coord lo = positions.front()[0];
  const Coord hi = positions.back()[0];
  const std::vector<int> span = sample_span(sys, hi - lo + 1, rng);
  for (const Element& e : positions)
    out.push_back(span[static_cast<size_t>(e[0] - lo)]);
}

}  // namespace detail

// Empirical block entropy over the window F.  The primary output is the
// conditional (difference) estimator H(F) - H(F \ {last position}), which
// telescopes away the boundary excess that the plain H(F)/|F| form carries
// on non-i.i.d. processes; both are reported with Miller-Madow correction.
inline BlockEntropyEstimate block_entropy(const SymbolicSystem& sys,
                                          const ElementSet& F,
                                          int64_t sample_size, uint64_t seed) {
  if (sample_size < 10000)
    throw std::invalid_argument("block_entropy: sample_size must be >= 10^4");
  if (F.empty()) throw std::invalid_argument("block_entropy: empty window");
  const double guard = static_cast<double>(F.size()) *
                       std::log2(std::max(2, sys.alphabet()));
  if (guard > 40.0)
    throw std::invalid_argument(
        "block_entropy: |F| log2|alphabet| exceeds the pattern-space guard 40");

  const std::vector<Element>& positions = F.elems();
  const uint64_t base = static_cast<uint64_t>(std::max(2, sys.alphabet()));

  auto run = [&](Rng rng, int64_t n) {
    std::unordered_map<uint64_t, int64_t> joint, sub;
    std::vector<int> pattern;
    for (int64_t i = 0; i < n; ++i) {
      detail::sample_pattern(sys, positions, rng, pattern);
      uint64_t cj = 0, cs = 0;
      for (size_t p = 0; p < pattern.size(); ++p) {
        cj = cj * base + static_cast<uint64_t>(pattern[p]);
        if (p + 1 < pattern.size())
          cs = cs * base + static_cast<uint64_t>(pattern[p]);
      }
      ++joint[cj];
      if (pattern.size() > 1) ++sub[cs];
    }
    const auto ej = detail::entropy_of_counts(joint, n);
    double rate = ej.mm;
    if (positions.size() > 1) {
      const auto es = detail::entropy_of_counts(sub, n);
      rate = ej.mm - es.mm;
    }
    return std::tuple<double, double, int64_t>{rate, ej.mm, ej.distinct};
  };

  Rng point_rng(seed, 0xB10CDull);
  auto [rate, joint_bits, distinct] = run(point_rng, sample_size);

  const int shards = 10;
  std::vector<double> shard_rates;
  for (int j = 0; j < shards; ++j) {
    Rng shard_rng = Rng(seed, 0xB10CDull).derived(static_cast<uint64_t>(j) + 1);
    auto [r, jb, d] = run(shard_rng, sample_size / shards);
    shard_rates.push_back(r);
  }
  double mean = 0;
  for (double r : shard_rates) mean += r;
  mean /= shards;
  double var = 0;
  for (double r : shard_rates) var += (r - mean) * (r - mean);
  var /= (shards - 1);

  BlockEntropyEstimate est;
  est.rate_bits = rate;
  est.joint_bits = joint_bits;
  est.naive_bits = joint_bits / static_cast<double>(F.size());
  est.stderr_rate = std::sqrt(var / shards);
  est.observed_patterns = distinct;
  est.samples = sample_size;
  return est;
}

// ---------------------------------------------------------------------------
// Abramov checks

struct AbramovReport {
  double estimate_bits = 0;  // entropy per induced step (or per tower step)
  double target_bits = 0;    // h/mu(A) for induced; h/E[roof] for towers
  double ratio = 0;
  double stderr_bits = 0;
  KacReport kac;
  std::string mode;
};

// Induced form: the first-return system on a cylinder has entropy
// h(base)/nu(A).  The estimate is the pair-difference entropy of the
// return-word process, H(W1 W2) - H(W1), whose words are i.i.d. for the
// supported bases.
inline AbramovReport abramov_check(const SymbolicSystem& base,
                                   const Cylinder& cylinder, int64_t n_words,
                                   uint64_t seed) {
  if (n_words < 10000)
    throw std::invalid_argument("abramov_check: need at least 10^4 words");
  const SymbolicSystem induced = SymbolicSystem::induce(base, cylinder);

  auto run = [&](uint64_t s, int64_t n) {
    InducedProcess proc(induced, s);
    std::map<std::vector<int>, int32_t> dict;
    std::unordered_map<uint64_t, int64_t> uni, pair;
    int32_t prev = -1;
    double len_sum = 0, len_sq = 0;
    for (int64_t i = 0; i < n; ++i) {
      const std::vector<int> w = proc.next_word();
      len_sum += static_cast<double>(w.size());
      len_sq += static_cast<double>(w.size()) * static_cast<double>(w.size());
      auto [it, fresh] = dict.try_emplace(w, static_cast<int32_t>(dict.size()));
      const int32_t id = it->second;
      ++uni[static_cast<uint64_t>(id)];
      if (prev >= 0)
        ++pair[(static_cast<uint64_t>(prev) << 32) | static_cast<uint64_t>(id)];
      prev = id;
    }
    const auto e1 = detail::entropy_of_counts(uni, n);
    const auto e2 = detail::entropy_of_counts(pair, n - 1);
    return std::tuple<double, double, double>{e2.mm - e1.mm, len_sum / n,
                                              len_sq / n};
  };

  auto [est, mean_len, len_sq] = run(Rng::mix64(seed) ^ 0xAB12u, n_words);

  const int shards = 10;
  std::vector<double> shard_est;
  for (int j = 0; j < shards; ++j) {
    auto [e, ml, l2] = run(Rng::mix64(seed + 1000003ull * (j + 1)) ^ 0xAB12u,
                           n_words / shards);
    shard_est.push_back(e);
  }
  double mean = 0;
  for (double e : shard_est) mean += e;
  mean /= shards;
  double var = 0;
  for (double e : shard_est) var += (e - mean) * (e - mean);
  var /= (shards - 1);

  AbramovReport rep;
  rep.mode = "induced";
  rep.estimate_bits = est;
  rep.target_bits =
      analytic_entropy(base) / base.cylinder_probability(cylinder);
  rep.ratio = rep.estimate_bits / rep.target_bits;
  rep.stderr_bits = std::sqrt(var / shards);
  rep.kac.mean_return = mean_len;
  rep.kac.expected = 1.0 / base.cylinder_probability(cylinder);
  rep.kac.stderr_mean = std::sqrt(
      std::max(0.0, len_sq - mean_len * mean_len) / static_cast<double>(n_words));
  rep.kac.pass =
      std::abs(rep.kac.mean_return - rep.kac.expected) < 3 * rep.kac.stderr_mean;
  return rep;
}

// Suspension form: h(base) = h(tower) * E[roof].
inline AbramovReport abramov_suspension_check(const SymbolicSystem& base,
                                              const std::vector<int>& roof,
                                              int64_t sample_size,
                                              uint64_t seed) {
  const SymbolicSystem tower = SymbolicSystem::suspend(base, roof);
  const ElementSet F = ElementSet::interval(GroupModel::lattice(1), 0, 9);
  const BlockEntropyEstimate est = block_entropy(tower, F, sample_size, seed);
  AbramovReport rep;
  rep.mode = "suspension";
  rep.estimate_bits = est.rate_bits;
  rep.target_bits = analytic_entropy(base) / expected_roof(tower);
  rep.ratio = rep.estimate_bits / rep.target_bits;
  rep.stderr_bits = est.stderr_rate;
  return rep;
}

// ---------------------------------------------------------------------------
// Transfer check

struct TransferReport {
  double h_alpha = 0;
  double h_beta = 0;
  double gap = 0;
  double rel_gap = 0;
  bool pass = false;
};

// Builds the rank cocycle's section: same points, classes, labels and
// weights, but addresses replaced by the canonical in-class rank on Z.
inline SectionSample rank_section(const SectionSample& s) {
  std::vector<Element> addresses(s.size());
  std::vector<int32_t> class_ids(s.size());
  std::vector<int> labels(s.size());
  size_t max_class = 1;
  for (size_t c = 0; c < s.n_classes(); ++c) {
    const auto& cls = s.class_members(static_cast<int32_t>(c));
    max_class = std::max(max_class, cls.size());
    for (size_t r = 0; r < cls.size(); ++r) {
      addresses[static_cast<size_t>(cls[r])] = Element{static_cast<Coord>(r), 0, 0, 0};
      class_ids[static_cast<size_t>(cls[r])] = static_cast<int32_t>(c);
      labels[static_cast<size_t>(cls[r])] = s.label(cls[r]);
    }
  }
  const GroupModel z = GroupModel::lattice(1);
  return SectionSample(z, std::move(addresses), std::move(class_ids),
                       std::move(labels),
                       ElementSet::interval(z, 0, static_cast<Coord>(max_class) - 1),
                       s.alphabet());
}

// Entropy of the same relation computed along two cocycles: the native
// (position) cocycle with box castles, and the Z-valued rank cocycle with
// interval castles of matching tower size.  The ball machinery never sees
// the cocycle directly, so the two estimates should agree.
inline TransferReport transfer_check(const SectionSample& s, const Partition& P,
                                     const FiberPartition& fibers,
                                     Coord tower_side, double tol_rel,
                                     double eps) {
  const ElementSet u1 = ElementSet::identity_set(s.group());
  if (!validate(s, u1).all_pass)
    throw std::invalid_argument("transfer_check: alpha cocycle fails validation");
  const SectionSample beta = rank_section(s);
  if (!validate(beta, ElementSet::identity_set(beta.group())).all_pass)
    throw std::invalid_argument("transfer_check: beta cocycle fails validation");
  std::string diag;
  if (!validate_fibers(s, fibers, &diag) || !validate_fibers(beta, fibers, &diag))
    throw std::invalid_argument("transfer_check: fiber partition invalid: " + diag);

  int64_t tower_cells = 1;
  for (int i = 0; i < s.group().dim(); ++i) tower_cells *= tower_side;

  const Castle castle_a = castle_boxes(s, tower_side);
  const Castle castle_b = castle_rank_intervals(beta, tower_cells);

  TransferReport rep;
  rep.h_alpha = castle_entropy_upper(s, castle_a, P, fibers, eps).bits;
  rep.h_beta = castle_entropy_upper(beta, castle_b, P, fibers, eps).bits;
  rep.gap = std::abs(rep.h_alpha - rep.h_beta);
  const double scale = std::max({rep.h_alpha, rep.h_beta, 1e-12});
  rep.rel_gap = rep.gap / scale;
  rep.pass = rep.rel_gap <= tol_rel;
  return rep;
}

}  // namespace xsec

#endif  // XSEC_ENTROPY_HPP_
