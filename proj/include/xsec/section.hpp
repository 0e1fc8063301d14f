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

#ifndef XSEC_SECTION_HPP_
#define XSEC_SECTION_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "xsec/group.hpp"
#include "xsec/systems.hpp"
#include "xsec/tiling.hpp"

namespace xsec {

// ---------------------------------------------------------------------------
// SectionSample: the finite model of (S, B, mu, R, alpha)

// Each point carries a group address g_x inside its class's window; the
// cocycle is alpha(x,y) = g_x * g_y^{-1}, so the cocycle identity holds by
// construction and alpha(x,-) is injective exactly when addresses within a
// class are distinct.  Tests can plant explicit overrides to exercise the
// validator's failure paths.
class SectionSample {
 public:
  SectionSample(GroupModel group, std::vector<Element> addresses,
                std::vector<int32_t> class_ids, std::vector<int> labels,
                ElementSet window, int alphabet)
      : group_(group),
        addresses_(std::move(addresses)),
        class_ids_(std::move(class_ids)),
        labels_(std::move(labels)),
        window_(std::move(window)),
        alphabet_(alphabet) {
    const size_t n = addresses_.size();
    if (class_ids_.size() != n || labels_.size() != n)
      throw std::invalid_argument("SectionSample: field size mismatch");
    if (n == 0) throw std::invalid_argument("SectionSample: empty section");
    weights_.assign(n, 1.0 / static_cast<double>(n));
    int32_t n_classes = 0;
    for (int32_t c : class_ids_) n_classes = std::max(n_classes, c + 1);
    classes_.resize(static_cast<size_t>(n_classes));
    for (size_t i = 0; i < n; ++i)
      classes_[static_cast<size_t>(class_ids_[i])].push_back(
          static_cast<int32_t>(i));
    // Canonical order within classes: sort members by address.
    for (auto& cls : classes_)
      std::sort(cls.begin(), cls.end(), [&](int32_t a, int32_t b) {
        return addresses_[static_cast<size_t>(a)] < addresses_[static_cast<size_t>(b)];
      });
    index_.resize(classes_.size());
    for (size_t c = 0; c < classes_.size(); ++c)
      for (int32_t pid : classes_[c])
        index_[c][addresses_[static_cast<size_t>(pid)]] = pid;
  }

  const GroupModel& group() const { return group_; }
  size_t size() const { return addresses_.size(); }
  const Element& address(int32_t x) const { return addresses_[static_cast<size_t>(x)]; }
  int32_t class_of(int32_t x) const { return class_ids_[static_cast<size_t>(x)]; }
  int label(int32_t x) const { return labels_[static_cast<size_t>(x)]; }
  int alphabet() const { return alphabet_; }
  double weight(int32_t x) const { return weights_[static_cast<size_t>(x)]; }
  const std::vector<double>& weights() const { return weights_; }
  size_t n_classes() const { return classes_.size(); }
  const std::vector<int32_t>& class_members(int32_t c) const {
    return classes_[static_cast<size_t>(c)];
  }
  const ElementSet& window() const { return window_; }

  // alpha(x, y) for same-class points, honoring planted overrides.
  Element alpha(int32_t x, int32_t y) const {
    if (class_of(x) != class_of(y))
      throw std::invalid_argument("alpha: points lie in different classes");
    if (!overrides_.empty()) {
      auto it = overrides_.find({x, y});
      if (it != overrides_.end()) return it->second;
    }
    return group_.mul(address(x), group_.inv(address(y)));
  }

  // The unique y in class(x) with alpha(x,y) = a, when it exists.
  std::optional<int32_t> resolve(int32_t x, const Element& a) const {
    const Element target = group_.mul(group_.inv(a), address(x));
    const auto& idx = index_[static_cast<size_t>(class_of(x))];
    auto it = idx.find(target);
    if (it == idx.end()) return std::nullopt;
    return it->second;
  }

  void plant_alpha_override(int32_t x, int32_t y, const Element& value) {
    overrides_[{x, y}] = value;
  }

  double intensity() const { return intensity_; }
  void set_intensity(double v) { intensity_ = v; }

 private:
  GroupModel group_;
  std::vector<Element> addresses_;
  std::vector<int32_t> class_ids_;
  std::vector<int> labels_;
  ElementSet window_;
  int alphabet_ = 0;
  std::vector<double> weights_;
  std::vector<std::vector<int32_t>> classes_;
  std::vector<std::unordered_map<Element, int32_t, ElementHash>> index_;
  std::map<std::pair<int32_t, int32_t>, Element> overrides_;
  double intensity_ = 0;
};

// ---------------------------------------------------------------------------
// Validation

struct SectionValidation {
  std::vector<ConditionCheck> checks;
  bool all_pass = false;
};

// Checks the quintuple invariants: cocycle identity on sampled triples,
// alpha(x,x) = 1 and inverse symmetry, freeness (addresses distinct within a
// class), U-discreteness, and the weight normalization.
inline SectionValidation validate(const SectionSample& s, const ElementSet& U) {
  SectionValidation out;
  const GroupModel& g = s.group();

  bool identity_ok = true, inverse_ok = true, triple_ok = true;
  bool free_ok = true, discrete_ok = true;
  Rng rng(0x5EC710Au, 1);
  for (size_t c = 0; c < s.n_classes(); ++c) {
    const auto& cls = s.class_members(static_cast<int32_t>(c));
    const size_t m = cls.size();
    std::unordered_map<Element, int, ElementHash> seen;
    for (int32_t x : cls) {
      if (s.alpha(x, x) != g.identity()) identity_ok = false;
      if (++seen[s.address(x)] > 1) free_ok = false;
    }
    const size_t pair_budget = 4000;
    auto pick = [&](size_t) { return cls[rng.next_below(m)]; };
    const size_t pairs = std::min(pair_budget, m * m);
    for (size_t t = 0; t < pairs; ++t) {
      const int32_t x = pick(t), y = pick(t);
      const Element axy = s.alpha(x, y);
      if (s.alpha(y, x) != g.inv(axy)) inverse_ok = false;
      if (x != y && U.contains(axy)) discrete_ok = false;
    }
    const size_t triples = std::min(pair_budget, m * m * m);
    for (size_t t = 0; t < triples; ++t) {
      const int32_t x = pick(t), y = pick(t), z = pick(t);
      if (g.mul(s.alpha(x, y), s.alpha(y, z)) != s.alpha(x, z)) triple_ok = false;
    }
  }

  double wsum = 0;
  for (double w : s.weights()) wsum += w;
  const bool weights_ok = std::abs(wsum - 1.0) < 1e-9;

  out.checks.push_back({"cocycle identity alpha(x,y)alpha(y,z)=alpha(x,z)",
                        triple_ok, ""});
  out.checks.push_back({"alpha(x,x)=1 and alpha(y,x)=alpha(x,y)^{-1}",
                        identity_ok && inverse_ok, ""});
  out.checks.push_back({"freeness: alpha(x,-) injective on classes", free_ok, ""});
  out.checks.push_back({"U-discreteness", discrete_ok, ""});
  out.checks.push_back({"weights sum to 1", weights_ok, ""});
  out.all_pass = triple_ok && identity_ok && inverse_ok && free_ok &&
                 discrete_ok && weights_ok;
  return out;
}

// ---------------------------------------------------------------------------
// Building a section from orbit windows

struct SectionRule {
  enum class Kind { Always, LabelEquals, AtOrigin };
  Kind kind = Kind::Always;
  int label = 0;

  static SectionRule always() { return {Kind::Always, 0}; }
  static SectionRule label_equals(int v) { return {Kind::LabelEquals, v}; }
  static SectionRule at_origin() { return {Kind::AtOrigin, 0}; }

  bool fires(const Element& pos, int label_at, const Element& identity) const {
    switch (kind) {
      case Kind::Always:
        return true;
      case Kind::LabelEquals:
        return label_at == label;
      case Kind::AtOrigin:
        return pos == identity;
    }
    return false;
  }
};

struct FromOrbitResult {
  std::optional<SectionSample> sample;
  int orbits_dropped = 0;
  double intensity = 0;  // mean |S hits| / |window|
};

// Samples n_orbits independent orbit windows and keeps the points where the
// rule fires: one equivalence class per orbit, addresses are window
// positions.  Orbits where the rule never fires are dropped and counted.
inline FromOrbitResult from_orbit_window(const SymbolicSystem& system,
                                         const ElementSet& window,
                                         const SectionRule& rule, int n_orbits,
                                         uint64_t seed) {
  FromOrbitResult out;
  std::vector<Element> addresses;
  std::vector<int32_t> class_ids;
  std::vector<int> labels;
  int32_t next_class = 0;
  double hit_sum = 0;
  for (int orbit = 0; orbit < n_orbits; ++orbit) {
    const LabeledWindow w =
        sample_window(system, window, Rng::mix64(seed) ^ static_cast<uint64_t>(orbit));
    size_t hits = 0;
    const auto& elems = w.window.elems();
    for (size_t i = 0; i < elems.size(); ++i)
      if (rule.fires(elems[i], w.labels[i], system.group().identity())) ++hits;
    if (hits == 0) {
      ++out.orbits_dropped;
      continue;
    }
    for (size_t i = 0; i < elems.size(); ++i) {
      if (!rule.fires(elems[i], w.labels[i], system.group().identity())) continue;
      addresses.push_back(elems[i]);
      class_ids.push_back(next_class);
      labels.push_back(w.labels[i]);
    }
    hit_sum += static_cast<double>(hits) / static_cast<double>(window.size());
    ++next_class;
  }
  if (next_class == 0) return out;
  SectionSample s(system.group(), std::move(addresses), std::move(class_ids),
                  std::move(labels), window, system.alphabet());
  out.intensity = hit_sum / static_cast<double>(next_class);
  s.set_intensity(out.intensity);
  out.sample = std::move(s);
  return out;
}

// ---------------------------------------------------------------------------
// Ergodic averages (mean ergodic theorem, finite form)

// h_F(x) = average of h(y) over the class neighbors with alpha(x,y) in F;
// zero when the neighbor set is empty.
inline std::vector<double> ergodic_average(const SectionSample& s,
                                           const std::vector<double>& h,
                                           const ElementSet& F) {
  if (h.size() != s.size())
    throw std::invalid_argument("ergodic_average: h must be defined on all of S");
  const GroupModel& g = s.group();
  std::vector<double> out(s.size(), 0.0);

  // Fast path: Z with an interval F reduces to prefix sums over addresses.
  const bool interval_f =
      g.kind() == GroupKind::Lattice && g.dim() == 1 && !F.empty() &&
      static_cast<Coord>(F.size()) ==
          F.elems().back()[0] - (*F.begin())[0] + 1;
  if (interval_f) {
    const Coord flo = (*F.begin())[0], fhi = F.elems().back()[0];
    for (size_t c = 0; c < s.n_classes(); ++c) {
      const auto& cls = s.class_members(static_cast<int32_t>(c));
      std::vector<Coord> pos(cls.size());
      std::vector<double> pre(cls.size() + 1, 0.0);
      for (size_t i = 0; i < cls.size(); ++i) {
        pos[i] = s.address(cls[i])[0];
        pre[i + 1] = pre[i] + h[static_cast<size_t>(cls[i])];
      }
      for (size_t i = 0; i < cls.size(); ++i) {
        // alpha(x,y) = x - y in F  <=>  y in [x - fhi, x - flo].
        const Coord xlo = pos[i] - fhi, xhi = pos[i] - flo;
        const auto lo = std::lower_bound(pos.begin(), pos.end(), xlo) - pos.begin();
        const auto hi = std::upper_bound(pos.begin(), pos.end(), xhi) - pos.begin();
        if (hi > lo)
          out[static_cast<size_t>(cls[i])] =
              (pre[static_cast<size_t>(hi)] - pre[static_cast<size_t>(lo)]) /
              static_cast<double>(hi - lo);
      }
    }
    return out;
  }

  for (size_t x = 0; x < s.size(); ++x) {
    double sum = 0;
    int64_t count = 0;
    for (const Element& f : F) {
      const auto y = s.resolve(static_cast<int32_t>(x), f);
      if (!y) continue;
      sum += h[static_cast<size_t>(*y)];
      ++count;
    }
    if (count > 0) out[x] = sum / static_cast<double>(count);
  }
  return out;
}

struct DeviationReport {
  double deviation_mass = 0;   // mu{ x : |h_F(x) - mean| > tol }, collar excluded
  double collar_fraction = 0;  // mu-mass of the excluded window collar
  double mean = 0;             // integral of h over S
};

// Companion statistic for the mean ergodic theorem.  Points whose
// F-neighborhood would leave the sampling window are excluded (finite-window
// truncation would otherwise bias the averages).
inline DeviationReport ergodic_deviation(const SectionSample& s,
                                         const std::vector<double>& h,
                                         const ElementSet& F, double tol) {
  const GroupModel& g = s.group();
  DeviationReport rep;
  for (size_t x = 0; x < s.size(); ++x)
    rep.mean += s.weight(static_cast<int32_t>(x)) * h[x];

  const std::vector<double> hf = ergodic_average(s, h, F);
  const ElementSet& W = s.window();
  // Interval bounds make the collar test cheap on Z; otherwise test each
  // neighbor address for window membership.
  for (size_t x = 0; x < s.size(); ++x) {
    bool inside = true;
    if (g.kind() == GroupKind::Lattice && g.dim() == 1 && !W.empty()) {
      const Coord wlo = (*W.begin())[0], whi = W.elems().back()[0];
      const Coord flo = (*F.begin())[0], fhi = F.elems().back()[0];
      const Coord a = s.address(static_cast<int32_t>(x))[0];
      inside = (a - fhi >= wlo) && (a - flo <= whi);
    } else {
      for (const Element& f : F) {
        const Element y = g.mul(g.inv(f), s.address(static_cast<int32_t>(x)));
        if (!W.contains(y)) {
          inside = false;
          break;
        }
      }
    }
    if (!inside) {
      rep.collar_fraction += s.weight(static_cast<int32_t>(x));
      continue;
    }
    if (std::abs(hf[x] - rep.mean) > tol)
      rep.deviation_mass += s.weight(static_cast<int32_t>(x));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Castles

struct Castle {
  std::vector<int32_t> base;                 // base point ids
  std::vector<std::vector<int32_t>> towers;  // towers[i] over base[i]; sorted ids
};

// Conditions of the castle definition: the base point belongs to its tower,
// towers stay within one class, and towers over distinct base points are
// pairwise disjoint.
inline void validate_castle(const SectionSample& s, const Castle& c) {
  if (c.base.size() != c.towers.size())
    throw std::invalid_argument("castle: base/towers size mismatch");
  std::vector<char> used(s.size(), 0);
  for (size_t i = 0; i < c.base.size(); ++i) {
    const int32_t x = c.base[i];
    bool has_base = false;
    for (int32_t t : c.towers[i]) {
      if (s.class_of(t) != s.class_of(x))
        throw std::invalid_argument("castle: tower member outside the base class");
      if (used[static_cast<size_t>(t)])
        throw std::invalid_argument("castle: towers are not disjoint");
      used[static_cast<size_t>(t)] = 1;
      if (t == x) has_base = true;
    }
    if (!has_base)
      throw std::invalid_argument("castle: base point missing from its tower");
  }
}

// mu_T(B) = sum over base points in B of |T_x| mu(x).
inline double mu_T(const SectionSample& s, const Castle& c,
                   const std::vector<char>& base_mask) {
  double m = 0;
  for (size_t i = 0; i < c.base.size(); ++i)
    if (base_mask.empty() || base_mask[i])
      m += static_cast<double>(c.towers[i].size()) * s.weight(c.base[i]);
  return m;
}

inline double mu_T(const SectionSample& s, const Castle& c) {
  return mu_T(s, c, {});
}

inline double castle_range_mass(const SectionSample& s, const Castle& c) {
  double m = 0;
  for (const auto& tower : c.towers)
    for (int32_t t : tower) m += s.weight(t);
  return m;
}

// K-interior of the tower over base index i: members t whose K-neighbors
// (via alpha) all stay inside the tower.
inline std::vector<int32_t> castle_interior(const SectionSample& s,
                                            const Castle& c, size_t base_index,
                                            const ElementSet& K) {
  if (base_index >= c.base.size())
    throw std::invalid_argument("castle_interior: base index out of range");
  const auto& tower = c.towers[base_index];
  std::vector<char> in_tower(s.size(), 0);
  for (int32_t t : tower) in_tower[static_cast<size_t>(t)] = 1;
  std::vector<int32_t> interior;
  for (int32_t t : tower) {
    bool ok = true;
    for (const Element& k : K) {
      // r with alpha(t, r) = k.
      const auto r = s.resolve(t, k);
      if (r && !in_tower[static_cast<size_t>(*r)]) {
        ok = false;
        break;
      }
    }
    if (ok) interior.push_back(t);
  }
  return interior;
}

inline std::vector<int32_t> castle_boundary(const SectionSample& s,
                                            const Castle& c, size_t base_index,
                                            const ElementSet& K) {
  const auto interior = castle_interior(s, c, base_index, K);
  std::vector<char> is_int(s.size(), 0);
  for (int32_t t : interior) is_int[static_cast<size_t>(t)] = 1;
  std::vector<int32_t> bd;
  for (int32_t t : c.towers[base_index])
    if (!is_int[static_cast<size_t>(t)]) bd.push_back(t);
  return bd;
}

struct CastleInvariance {
  bool invariant = false;
  double offending_mass = 0;  // mu_T of bases with boundary ratio > eps
};

// (K, eps)-invariance: the mu_T-mass of bases whose towers have a K-boundary
// fraction above eps must stay below eps * mu_T(A).
inline CastleInvariance is_castle_invariant(const SectionSample& s,
                                            const Castle& c, const ElementSet& K,
                                            double eps) {
  if (eps <= 0)
    throw std::invalid_argument("is_castle_invariant: eps must be positive");
  if (c.base.empty())
    throw std::invalid_argument("is_castle_invariant: empty base");
  CastleInvariance out;
  for (size_t i = 0; i < c.base.size(); ++i) {
    const auto interior = castle_interior(s, c, i, K);
    const double m = static_cast<double>(c.towers[i].size());
    const double bd = m - static_cast<double>(interior.size());
    if (bd / m > eps)
      out.offending_mass +=
          static_cast<double>(c.towers[i].size()) * s.weight(c.base[i]);
  }
  out.invariant = out.offending_mass < eps * mu_T(s, c);
  return out;
}

struct CastleErgodicReport {
  bool pass = false;
  double best_mass_fraction = 0;  // mu_T(B*) / mu_T(A)
  double mean = 0;
};

// Ergodic theorem for castles, finite form: is there B inside the base with
// mu_T(B) > (1-delta) mu_T(A) whose towers average h to within delta of the
// space mean?  The maximal candidate B* is computed directly.
inline CastleErgodicReport castle_ergodic_check(const SectionSample& s,
                                                const Castle& c,
                                                const std::vector<double>& h,
                                                double delta) {
  if (castle_range_mass(s, c) <= delta)
    throw std::invalid_argument(
        "castle_ergodic_check: castle range must have mass above delta");
  CastleErgodicReport rep;
  for (size_t x = 0; x < s.size(); ++x)
    rep.mean += s.weight(static_cast<int32_t>(x)) * h[x];
  const double total = mu_T(s, c);
  double good = 0;
  for (size_t i = 0; i < c.base.size(); ++i) {
    double avg = 0;
    for (int32_t t : c.towers[i]) avg += h[static_cast<size_t>(t)];
    avg /= static_cast<double>(c.towers[i].size());
    if (std::abs(avg - rep.mean) < delta)
      good += static_cast<double>(c.towers[i].size()) * s.weight(c.base[i]);
  }
  rep.best_mass_fraction = total > 0 ? good / total : 0;
  rep.pass = good > (1.0 - delta) * total;
  return rep;
}

// ---------------------------------------------------------------------------
// Castle constructors

// Partitions every class by congruent address blocks: members whose address
// lies in the same block share a tower, based at the lex-least member.
// `block_of` maps an address to a canonical block key.
template <typename BlockKeyFn>
inline Castle castle_from_blocks(const SectionSample& s, BlockKeyFn block_of) {
  Castle c;
  for (size_t cls = 0; cls < s.n_classes(); ++cls) {
    std::map<Element, std::vector<int32_t>> blocks;
    for (int32_t pid : s.class_members(static_cast<int32_t>(cls)))
      blocks[block_of(s.address(pid))].push_back(pid);
    for (auto& [key, members] : blocks) {
      c.base.push_back(members.front());  // members sorted by address already
      c.towers.push_back(members);
    }
  }
  validate_castle(s, c);
  return c;
}

// Grid castle over a lattice group: towers are side-length-`side` boxes.
inline Castle castle_boxes(const SectionSample& s, Coord side) {
  if (side < 1) throw std::invalid_argument("castle_boxes: side must be >= 1");
  if (s.group().kind() != GroupKind::Lattice)
    throw std::invalid_argument("castle_boxes: lattice groups only");
  const int d = s.group().dim();
  return castle_from_blocks(s, [side, d](const Element& a) {
    Element key{0, 0, 0, 0};
    for (int i = 0; i < d; ++i) {
      Coord q = a[i] >= 0 ? a[i] / side : -((-a[i] + side - 1) / side);
      key[i] = q;
    }
    return key;
  });
}

// Castle whose towers are consecutive runs of `len` members in the canonical
// class order (the rank cocycle's interval castle).
inline Castle castle_rank_intervals(const SectionSample& s, int64_t len) {
  if (len < 1) throw std::invalid_argument("castle_rank_intervals: len >= 1");
  Castle c;
  for (size_t cls = 0; cls < s.n_classes(); ++cls) {
    const auto& members = s.class_members(static_cast<int32_t>(cls));
    for (size_t start = 0; start < members.size();
         start += static_cast<size_t>(len)) {
      const size_t end = std::min(members.size(), start + static_cast<size_t>(len));
      std::vector<int32_t> tower(members.begin() + static_cast<int64_t>(start),
                                 members.begin() + static_cast<int64_t>(end));
      c.base.push_back(tower.front());
      c.towers.push_back(std::move(tower));
    }
  }
  validate_castle(s, c);
  return c;
}

// Builds a castle by quasi-tiling each class's address set with the group's
// Folner set at the given scale.  Tiles overlap up to delta; towers are
// disjointified in selection order, so a tower is the part of its tile not
// claimed earlier.  Tiles whose base address was claimed are dropped.
inline Castle castle_from_quasi_tiling(const SectionSample& s, Coord scale,
                                       const TilingParams& params) {
  const GroupModel& g = s.group();
  const ElementSet F = folner_set(g, scale);
  Castle c;
  for (size_t cls = 0; cls < s.n_classes(); ++cls) {
    const auto& members = s.class_members(static_cast<int32_t>(cls));
    std::vector<Element> addrs;
    addrs.reserve(members.size());
    for (int32_t pid : members) addrs.push_back(s.address(pid));
    TilingInstance inst;
    inst.group = g;
    inst.A = ElementSet(g, addrs);
    inst.B = inst.A;
    inst.scales = {F};
    inst.U = ElementSet::identity_set(g);
    inst.V = inst.U;
    inst.c = packing_constant(g, inst.scales, inst.V);
    const TilingResult tiles = quasi_tile(inst, params);

    std::vector<char> claimed(s.size(), 0);
    const auto& idx_members = members;
    std::unordered_map<Element, int32_t, ElementHash> addr_to_pid;
    for (int32_t pid : idx_members) addr_to_pid[s.address(pid)] = pid;
    for (const auto& sc : tiles.scales)
      for (size_t t = 0; t < sc.tiles.size(); ++t) {
        std::vector<int32_t> tower;
        for (const Element& p : sc.tiles[t]) {
          const int32_t pid = addr_to_pid.at(p);
          if (!claimed[static_cast<size_t>(pid)]) tower.push_back(pid);
        }
        const int32_t base_pid = addr_to_pid.at(sc.centers[t]);
        bool base_free = false;
        for (int32_t pid : tower) base_free = base_free || pid == base_pid;
        if (!base_free || tower.empty()) continue;
        for (int32_t pid : tower) claimed[static_cast<size_t>(pid)] = 1;
        std::sort(tower.begin(), tower.end());
        c.base.push_back(base_pid);
        c.towers.push_back(std::move(tower));
      }
  }
  validate_castle(s, c);
  return c;
}

}  // namespace xsec

#endif  // XSEC_SECTION_HPP_
