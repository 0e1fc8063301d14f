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

#ifndef XSEC_MIXING_HPP_
#define XSEC_MIXING_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xsec/entropy.hpp"
#include "xsec/group.hpp"
#include "xsec/systems.hpp"

namespace xsec {

// Coarse-graining of the symbol alphabet (the partition P in the uniform
// mixing statement).
struct SymbolPartition {
  std::vector<int> map;  // symbol -> P label
  int k = 1;

  static SymbolPartition identity(int alphabet) {
    SymbolPartition p;
    p.map.resize(static_cast<size_t>(alphabet));
    for (int i = 0; i < alphabet; ++i) p.map[static_cast<size_t>(i)] = i;
    p.k = alphabet;
    return p;
  }
};

// ---------------------------------------------------------------------------
// Separated families

// Greedy random K-separated subset of the window with exactly `size`
// points.  Throws when the window cannot host that many.
inline ElementSet separated_family(const GroupModel& group, const ElementSet& K,
                                   int size, const ElementSet& window,
                                   uint64_t seed) {
  if (size < 1) throw std::invalid_argument("separated_family: size must be >= 1");
  Rng rng(seed, 0xFA111u);
  std::vector<Element> pool(window.begin(), window.end());
  // Seeded Fisher-Yates pass.
  for (size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[rng.next_below(i)]);
  std::vector<Element> picked;
  for (const Element& cand : pool) {
    bool ok = true;
    for (const Element& p : picked) {
      const Element d1 = group.mul(cand, group.inv(p));
      const Element d2 = group.mul(p, group.inv(cand));
      if ((K.contains(d1) && d1 != group.identity()) ||
          (K.contains(d2) && d2 != group.identity())) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    picked.push_back(cand);
    if (static_cast<int>(picked.size()) == size) break;
  }
  if (static_cast<int>(picked.size()) < size)
    throw std::runtime_error(
        "separated_family: window cannot host " + std::to_string(size) +
        " K-separated points; enlarge the window");
  return ElementSet(group, std::move(picked));
}

// ---------------------------------------------------------------------------
// Joint entropy

struct JointEntropyEstimate {
  double joint_bits = 0;       // H of the family pattern, Miller-Madow
  double per_element_bits = 0; // joint / |F|
  double stderr_joint = 0;
};

// Plug-in + Miller-Madow estimate of H(P(g x) : g in F).
inline JointEntropyEstimate joint_entropy_empirical(const SymbolicSystem& sys,
                                                    const SymbolPartition& P,
                                                    const ElementSet& F,
                                                    int64_t sample_size,
                                                    uint64_t seed) {
  if (sample_size < 10000)
    throw std::invalid_argument("joint_entropy_empirical: sample_size >= 10^4");
  if (F.empty()) throw std::invalid_argument("joint_entropy_empirical: empty family");
  if (static_cast<double>(F.size()) * std::log2(std::max(2, P.k)) > 40.0)
    throw std::invalid_argument(
        "joint_entropy_empirical: |F| log2|P| exceeds the guard 40");

  const std::vector<Element>& positions = F.elems();
  const uint64_t base = static_cast<uint64_t>(std::max(2, P.k));

  auto run = [&](Rng rng, int64_t n) {
    std::unordered_map<uint64_t, int64_t> counts;
    std::vector<int> pattern;
    for (int64_t i = 0; i < n; ++i) {
      detail::sample_pattern(sys, positions, rng, pattern);
      uint64_t code = 0;
      for (int sym : pattern)
        code = code * base + static_cast<uint64_t>(P.map[static_cast<size_t>(sym)]);
      ++counts[code];
    }
    return detail::entropy_of_counts(counts, n).mm;
  };

  JointEntropyEstimate est;
  est.joint_bits = run(Rng(seed, 0x301D7u), sample_size);
  est.per_element_bits = est.joint_bits / static_cast<double>(F.size());
  const int shards = 10;
  std::vector<double> sh;
  for (int j = 0; j < shards; ++j)
    sh.push_back(run(Rng(seed, 0x301D7u).derived(static_cast<uint64_t>(j) + 1),
                     sample_size / shards));
  double mean = 0;
  for (double v : sh) mean += v;
  mean /= shards;
  double var = 0;
  for (double v : sh) var += (v - mean) * (v - mean);
  var /= (shards - 1);
  est.stderr_joint = std::sqrt(var / shards);
  return est;
}

// ---------------------------------------------------------------------------
// Exact Markov oracle

// Joint entropy of (X_0, X_{n1}, X_{n1+n2}, ...) in bits via the chain rule:
// H(pi) + sum_i sum_a pi(a) H(P^{n_i}(a, .)).  Stationarity and the Markov
// property are all that is needed, so periodic (permutation) chains are
// fine; reducible ones are rejected.
inline double markov_joint_entropy_exact(const Matrix& matrix,
                                         const std::vector<double>& stationary,
                                         const std::vector<int64_t>& gaps) {
  if (!matrix_irreducible(matrix))
    throw std::invalid_argument("markov_joint_entropy_exact: reducible matrix");
  for (int64_t g : gaps)
    if (g < 1)
      throw std::invalid_argument("markov_joint_entropy_exact: gaps must be >= 1");
  double h = entropy_bits(stationary);
  for (int64_t g : gaps) {
    const Matrix pg = mat_pow(matrix, static_cast<uint64_t>(g));
    for (size_t a = 0; a < matrix.size(); ++a)
      h += stationary[a] * entropy_bits(pg[a]);
  }
  return h;
}

// Exact per-element defect for the two-point family {0, g} of a stationary
// chain under the identity partition.
inline double markov_gap_defect_exact(const Matrix& matrix,
                                      const std::vector<double>& stationary,
                                      int64_t gap) {
  const double joint = markov_joint_entropy_exact(matrix, stationary, {gap});
  return std::abs(joint / 2.0 - entropy_bits(stationary));
}

// Exact defect of a deterministic p-cycle for a family of given size: the
// first coordinate pins the whole pattern.
inline double periodic_defect_exact(int period, int family_size) {
  return std::log2(static_cast<double>(period)) *
         (1.0 - 1.0 / static_cast<double>(family_size));
}

// ---------------------------------------------------------------------------
// Scans

struct MixingReport {
  std::string k_description;
  ElementSet family;
  double per_element_bits = 0;
  double h_p_bits = 0;
  double defect = 0;         // |per_element - H(P)|
  double signed_defect = 0;  // H(P) - per_element; >= -3 stderr by subadditivity
  double stderr_defect = 0;
  std::optional<double> oracle_defect;
};

namespace detail {

inline MixingReport mixing_report_for_family(const SymbolicSystem& sys,
                                             const SymbolPartition& P,
                                             const ElementSet& family,
                                             int64_t sample_size, uint64_t seed,
                                             const std::string& k_desc) {
  MixingReport rep;
  rep.k_description = k_desc;
  rep.family = family;

  const std::vector<Element>& positions = family.elems();
  const uint64_t base = static_cast<uint64_t>(std::max(2, P.k));
  auto run = [&](Rng rng, int64_t n) {
    std::unordered_map<uint64_t, int64_t> joint;
    std::unordered_map<uint64_t, int64_t> single;
    std::vector<int> pattern;
    for (int64_t i = 0; i < n; ++i) {
      sample_pattern(sys, positions, rng, pattern);
      uint64_t code = 0;
      for (int sym : pattern)
        code = code * base + static_cast<uint64_t>(P.map[static_cast<size_t>(sym)]);
      ++joint[code];
      ++single[static_cast<uint64_t>(
          P.map[static_cast<size_t>(pattern.front())])];
    }
    const double hj = entropy_of_counts(joint, n).mm;
    const double hp = entropy_of_counts(single, n).mm;
    return std::pair<double, double>{
        hj / static_cast<double>(positions.size()), hp};
  };

  Rng point(seed, 0x111Au);
  auto [per_elem, hp] = run(point, sample_size);
  rep.per_element_bits = per_elem;
  rep.h_p_bits = hp;
  rep.signed_defect = hp - per_elem;
  rep.defect = std::abs(rep.signed_defect);

  const int shards = 10;
  std::vector<double> sh;
  for (int j = 0; j < shards; ++j) {
    auto [pe, h1] = run(Rng(seed, 0x111Au).derived(static_cast<uint64_t>(j) + 1),
                        sample_size / shards);
    sh.push_back(h1 - pe);
  }
  double mean = 0;
  for (double v : sh) mean += v;
  mean /= shards;
  double var = 0;
  for (double v : sh) var += (v - mean) * (v - mean);
  var /= (shards - 1);
  rep.stderr_defect = std::sqrt(var / shards);
  return rep;
}

}  // namespace detail

// Scan over word-metric balls K of growing radius: per scale, a random
// K-separated family of the requested size, its per-element joint entropy,
// and the defect against H(P).
inline std::vector<MixingReport> mixing_scan(const SymbolicSystem& sys,
                                             const SymbolPartition& P,
                                             const std::vector<int>& k_radii,
                                             int family_size,
                                             int64_t sample_size, uint64_t seed) {
  std::vector<MixingReport> out;
  const GroupModel& g = sys.group();
  for (size_t i = 0; i < k_radii.size(); ++i) {
    const int r = k_radii[i];
    const ElementSet K = metric_ball(g, r);
    // Grow the window until the family fits.
    ElementSet family(g, {});
    Coord scale = static_cast<Coord>((r + 1)) *
                  static_cast<Coord>(std::max(2, family_size));
    for (int attempt = 0;; ++attempt) {
      try {
        family = separated_family(g, K, family_size, folner_set(g, scale),
                                  seed + 7919 * i);
        break;
      } catch (const std::runtime_error&) {
        if (attempt >= 3) throw;
        scale *= 2;
      }
    }
    MixingReport rep = detail::mixing_report_for_family(
        sys, P, family, sample_size, seed + 104729 * i,
        "word-metric ball radius " + std::to_string(r));
    out.push_back(std::move(rep));
  }
  return out;
}

// Gap scan for Z chains: families {0, g} with the exact matrix-power oracle
// attached when the system is Markov.
inline std::vector<MixingReport> markov_gap_scan(const SymbolicSystem& sys,
                                                 const SymbolPartition& P,
                                                 const std::vector<int64_t>& gaps,
                                                 int64_t sample_size,
                                                 uint64_t seed) {
  std::vector<MixingReport> out;
  const GroupModel z = GroupModel::lattice(1);
  for (size_t i = 0; i < gaps.size(); ++i) {
    const ElementSet family(z, {Element{0, 0, 0, 0},
                                Element{gaps[i], 0, 0, 0}});
    MixingReport rep = detail::mixing_report_for_family(
        sys, P, family, sample_size, seed + 15485863 * i,
        "gap " + std::to_string(gaps[i]));
    if (sys.kind() == SymbolicSystem::Kind::Markov &&
        P.k == sys.alphabet())
      rep.oracle_defect =
          markov_gap_defect_exact(sys.matrix(), sys.stationary(), gaps[i]);
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace xsec

#endif  // XSEC_MIXING_HPP_
