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

#ifndef XSEC_GROUP_HPP_
#define XSEC_GROUP_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xsec {

using Coord = int64_t;

// Elements of all supported groups are encoded as integer tuples with at
// most kMaxDim coordinates; unused coordinates stay zero so that the
// built-in lexicographic array order is the canonical element order.
inline constexpr int kMaxDim = 4;
using Element = std::array<Coord, kMaxDim>;

struct ElementHash {
  size_t operator()(const Element& e) const {
    uint64_t h = 0x243F6A8885A308D3ull;
    for (Coord c : e) {
      h ^= static_cast<uint64_t>(c) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
      h *= 0xFF51AFD7ED558CCDull;
    }
    return static_cast<size_t>(h ^ (h >> 33));
  }
};

enum class GroupKind { Lattice, Heisenberg };

// A finitely generated discrete unimodular amenable group with counting
// Haar measure: Z^d (componentwise addition) or the discrete Heisenberg
// group H3(Z) with (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b').
class GroupModel {
 public:
  static GroupModel lattice(int dim) {
    if (dim < 1 || dim > kMaxDim)
      throw std::invalid_argument("GroupModel: lattice dimension must be in [1," +
                                  std::to_string(kMaxDim) + "]");
    return GroupModel(GroupKind::Lattice, dim);
  }

  static GroupModel heisenberg() { return GroupModel(GroupKind::Heisenberg, 3); }

  // Parses "z", "z2", "z3", "z4", "h3".
  static GroupModel parse(const std::string& name) {
    if (name == "z" || name == "z1") return lattice(1);
    if (name == "z2") return lattice(2);
    if (name == "z3") return lattice(3);
    if (name == "z4") return lattice(4);
    if (name == "h3") return heisenberg();
    throw std::invalid_argument("GroupModel: unknown group '" + name + "'");
  }

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }

  std::string name() const {
    if (kind_ == GroupKind::Heisenberg) return "h3";
    return dim_ == 1 ? "z" : "z" + std::to_string(dim_);
  }

  Element identity() const { return Element{0, 0, 0, 0}; }

  Element mul(const Element& g, const Element& h) const {
    Element r{0, 0, 0, 0};
    if (kind_ == GroupKind::Lattice) {
      for (int i = 0; i < dim_; ++i) r[i] = g[i] + h[i];
    } else {
      r[0] = g[0] + h[0];
      r[1] = g[1] + h[1];
      r[2] = g[2] + h[2] + g[0] * h[1];
    }
    return r;
  }

  Element inv(const Element& g) const {
    Element r{0, 0, 0, 0};
    if (kind_ == GroupKind::Lattice) {
      for (int i = 0; i < dim_; ++i) r[i] = -g[i];
    } else {
      r[0] = -g[0];
      r[1] = -g[1];
      r[2] = -g[2] + g[0] * g[1];
    }
    return r;
  }

  bool operator==(const GroupModel& o) const {
    return kind_ == o.kind_ && dim_ == o.dim_;
  }
  bool operator!=(const GroupModel& o) const { return !(*this == o); }

  // Standard generators (with inverses): +-e_i for Z^d, +-x and +-y for H3.
  std::vector<Element> generators() const {
    std::vector<Element> g;
    const int n = kind_ == GroupKind::Heisenberg ? 2 : dim_;
    for (int i = 0; i < n; ++i) {
      Element e{0, 0, 0, 0};
      e[i] = 1;
      g.push_back(e);
      e[i] = -1;
      g.push_back(e);
    }
    return g;
  }

 private:
  GroupModel(GroupKind k, int d) : kind_(k), dim_(d) {}
  GroupKind kind_;
  int dim_;
};

// A finite, deduplicated set of group elements held in canonical
// (lexicographic) order.  Iteration order is total and deterministic, so
// every greedy pass downstream is reproducible.
class ElementSet {
 public:
  ElementSet() = default;

  ElementSet(const GroupModel& group, std::vector<Element> elems)
      : kind_(group.kind()), dim_(group.dim()), elems_(std::move(elems)) {
    std::sort(elems_.begin(), elems_.end());
    elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
  }

  static ElementSet singleton(const GroupModel& group, const Element& e) {
    return ElementSet(group, {e});
  }

  static ElementSet identity_set(const GroupModel& group) {
    return singleton(group, group.identity());
  }

  // Axis-aligned box [lo_i, hi_i] on the first dim() coordinates.
  static ElementSet box(const GroupModel& group, const std::vector<Coord>& lo,
                        const std::vector<Coord>& hi) {
    const int d = group.dim();
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
      throw std::invalid_argument("ElementSet::box: dimension mismatch");
    for (int i = 0; i < d; ++i)
      if (lo[i] > hi[i]) throw std::invalid_argument("ElementSet::box: lo > hi");
    std::vector<Element> out;
    Element cur{0, 0, 0, 0};
    std::function<void(int)> rec = [&](int i) {
      if (i == d) {
        out.push_back(cur);
        return;
      }
      for (Coord v = lo[i]; v <= hi[i]; ++v) {
        cur[i] = v;
        rec(i + 1);
      }
    };
    rec(0);
    return ElementSet(group, std::move(out));
  }

  // Z-interval [a, b].
  static ElementSet interval(const GroupModel& group, Coord a, Coord b) {
    if (group.kind() != GroupKind::Lattice || group.dim() != 1)
      throw std::invalid_argument("ElementSet::interval: group must be Z");
    return box(group, {a}, {b});
  }

  bool contains(const Element& e) const {
    return std::binary_search(elems_.begin(), elems_.end(), e);
  }

  size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const std::vector<Element>& elems() const { return elems_; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }

  bool operator==(const ElementSet& o) const { return elems_ == o.elems_; }

  bool same_encoding(const GroupModel& g) const {
    return kind_ == g.kind() && dim_ == g.dim();
  }

 private:
  GroupKind kind_ = GroupKind::Lattice;
  int dim_ = 1;
  std::vector<Element> elems_;
};

namespace detail {

inline void require_same_encoding(const GroupModel& g, const ElementSet& s,
                                  const char* where) {
  if (!s.same_encoding(g))
    throw std::invalid_argument(std::string(where) +
                                ": element set does not match the group encoding");
}

}  // namespace detail

// {k*f : k in K, f in F}, deduplicated.
inline ElementSet product_set(const GroupModel& group, const ElementSet& K,
                              const ElementSet& F) {
  detail::require_same_encoding(group, K, "product_set");
  detail::require_same_encoding(group, F, "product_set");
  std::vector<Element> out;
  out.reserve(K.size() * F.size());
  for (const Element& k : K)
    for (const Element& f : F) out.push_back(group.mul(k, f));
  return ElementSet(group, std::move(out));
}

// K F K, the three-factor product from the invariance definition.
inline ElementSet product_kfk(const GroupModel& group, const ElementSet& K,
                              const ElementSet& F) {
  return product_set(group, product_set(group, K, F), K);
}

inline ElementSet set_union(const GroupModel& group, const ElementSet& a,
                            const ElementSet& b) {
  std::vector<Element> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return ElementSet(group, std::move(out));
}

inline ElementSet set_difference(const GroupModel& group, const ElementSet& a,
                                 const ElementSet& b) {
  std::vector<Element> out;
  for (const Element& e : a)
    if (!b.contains(e)) out.push_back(e);
  return ElementSet(group, std::move(out));
}

inline ElementSet inverse_set(const GroupModel& group, const ElementSet& s) {
  std::vector<Element> out;
  out.reserve(s.size());
  for (const Element& e : s) out.push_back(group.inv(e));
  return ElementSet(group, std::move(out));
}

// |K'FK'| < (1+eps)|F| with K' = K adjoined the identity, so F is always a
// subset of K'FK' and the ratio is meaningful.
inline bool is_invariant(const GroupModel& group, const ElementSet& F,
                         const ElementSet& K, double eps) {
  if (eps <= 0) throw std::invalid_argument("is_invariant: eps must be positive");
  if (F.empty())
    throw std::invalid_argument("is_invariant: undefined for the empty set");
  ElementSet k1 = set_union(group, K, ElementSet::identity_set(group));
  const ElementSet kfk = product_kfk(group, k1, F);
  return static_cast<double>(kfk.size()) <
         (1.0 + eps) * static_cast<double>(F.size());
}

// True iff g*h^{-1} lies outside K for all distinct g, h in A.
inline bool is_separated(const GroupModel& group, const ElementSet& A,
                         const ElementSet& K) {
  detail::require_same_encoding(group, A, "is_separated");
  if (A.size() < 2) return true;
  // g h^{-1} in K  <=>  g = k h for some k in K.
  for (const Element& h : A) {
    for (const Element& k : K) {
      if (k == group.identity()) continue;
      if (A.contains(group.mul(k, h))) return false;
    }
  }
  return true;
}

// K-interior of T inside an ambient set: members t such that every ambient
// point r with r*t^{-1} in K already lies in T.
inline ElementSet interior(const GroupModel& group, const ElementSet& T,
                           const ElementSet& ambient, const ElementSet& K) {
  for (const Element& t : T)
    if (!ambient.contains(t))
      throw std::invalid_argument("interior: T must be a subset of the ambient set");
  std::vector<Element> in;
  for (const Element& t : T) {
    bool ok = true;
    for (const Element& k : K) {
      const Element r = group.mul(k, t);  // r t^{-1} = k
      if (ambient.contains(r) && !T.contains(r)) {
        ok = false;
        break;
      }
    }
    if (ok) in.push_back(t);
  }
  return ElementSet(group, std::move(in));
}

inline ElementSet boundary(const GroupModel& group, const ElementSet& T,
                           const ElementSet& ambient, const ElementSet& K) {
  return set_difference(group, T, interior(group, T, ambient, K));
}

// Folner family: boxes [-n,n]^d for Z^d; the standard (n, n, n^2) boxes for
// H3(Z).  Word balls would behave the same but are expensive to enumerate.
inline ElementSet folner_set(const GroupModel& group, Coord n) {
  if (n < 0) throw std::invalid_argument("folner_set: scale must be nonnegative");
  if (group.kind() == GroupKind::Lattice) {
    std::vector<Coord> lo(group.dim(), -n), hi(group.dim(), n);
    return ElementSet::box(group, lo, hi);
  }
  return ElementSet::box(group, {-n, -n, -n * n}, {n, n, n * n});
}

// Exact word-metric ball of radius r via breadth-first search over the
// generator set.  Only sensible for small radii.
inline ElementSet metric_ball(const GroupModel& group, int r) {
  if (r < 0) throw std::invalid_argument("metric_ball: radius must be nonnegative");
  std::vector<Element> frontier = {group.identity()};
  std::vector<Element> all = frontier;
  const auto gens = group.generators();
  for (int step = 0; step < r; ++step) {
    ElementSet seen(group, all);
    std::vector<Element> next;
    for (const Element& e : frontier)
      for (const Element& g : gens) {
        Element n = group.mul(g, e);
        if (!seen.contains(n)) next.push_back(n);
      }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return ElementSet(group, std::move(all));
}

}  // namespace xsec

#endif  // XSEC_GROUP_HPP_
