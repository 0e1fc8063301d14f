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

#ifndef XSEC_SYSTEMS_HPP_
#define XSEC_SYSTEMS_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "xsec/group.hpp"
#include "xsec/rng.hpp"

namespace xsec {

inline double log2_safe(double x) { return std::log2(x); }

inline double entropy_bits(const std::vector<double>& p) {
  double h = 0;
  for (double v : p)
    if (v > 0) h -= v * std::log2(v);
  return h;
}

// ---------------------------------------------------------------------------
// Matrix helpers (small dense stochastic matrices)

using Matrix = std::vector<std::vector<double>>;

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  const size_t n = a.size();
  Matrix r(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k) {
      const double aik = a[i][k];
      if (aik == 0) continue;
      for (size_t j = 0; j < n; ++j) r[i][j] += aik * b[k][j];
    }
  return r;
}

inline Matrix mat_pow(Matrix p, uint64_t n) {
  const size_t d = p.size();
  Matrix r(d, std::vector<double>(d, 0.0));
  for (size_t i = 0; i < d; ++i) r[i][i] = 1.0;
  while (n > 0) {
    if (n & 1) r = mat_mul(r, p);
    p = mat_mul(p, p);
    n >>= 1;
  }
  return r;
}

inline bool matrix_irreducible(const Matrix& p) {
  const size_t n = p.size();
  // Reachability closure over the support graph.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) reach[i][j] = p[i][j] > 0 || i == j;
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (!reach[i][j]) return false;
  return true;
}

inline std::vector<double> solve_stationary(const Matrix& p) {
  const size_t n = p.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 200000; ++iter) {
    std::vector<double> next(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) next[j] += pi[i] * p[i][j];
    double diff = 0;
    for (size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
    pi = std::move(next);
    if (diff < 1e-16) break;
  }
  return pi;
}

// ---------------------------------------------------------------------------
// Systems

// A finite set of pinned symbols: offset (on the acting copy of Z) -> label.
struct Cylinder {
  std::vector<std::pair<Coord, int>> constraints;  // kept sorted by offset

  static Cylinder single(Coord offset, int symbol) {
    return Cylinder{{{offset, symbol}}};
  }
};

// Symbolic systems with analytically known entropy: Bernoulli fields over
// any supported group, Markov chains over Z, discrete towers (suspensions)
// and induced (first-return) systems over Z.
class SymbolicSystem {
 public:
  enum class Kind { Bernoulli, Markov, Tower, Induced };

  static SymbolicSystem bernoulli(const GroupModel& group,
                                  std::vector<double> probs) {
    check_prob_vector(probs);
    SymbolicSystem s(Kind::Bernoulli, group, static_cast<int>(probs.size()));
    s.probs_ = std::move(probs);
    return s;
  }

  static SymbolicSystem markov(Matrix matrix) {
    check_stochastic(matrix);
    std::vector<double> pi = solve_stationary(matrix);
    return markov_with_stationary(std::move(matrix), std::move(pi));
  }

  static SymbolicSystem markov_with_stationary(Matrix matrix,
                                               std::vector<double> stationary) {
    check_stochastic(matrix);
    if (stationary.size() != matrix.size())
      throw std::invalid_argument("markov: stationary size mismatch");
    double sum = 0;
    for (double v : stationary) sum += v;
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("markov: stationary vector must sum to 1");
    // pi P = pi, checked to 1e-12.
    for (size_t j = 0; j < matrix.size(); ++j) {
      double v = 0;
      for (size_t i = 0; i < matrix.size(); ++i) v += stationary[i] * matrix[i][j];
      if (std::abs(v - stationary[j]) > 1e-12)
        throw std::invalid_argument("markov: stationary vector fails pi P = pi");
    }
    SymbolicSystem s(Kind::Markov, GroupModel::lattice(1),
                     static_cast<int>(matrix.size()));
    s.matrix_ = std::move(matrix);
    s.stationary_ = std::move(stationary);
    return s;
  }

  // Two-state chain with stay probability p on both states.
  static SymbolicSystem two_state(double stay) {
    if (!(stay > 0 && stay < 1))
      throw std::invalid_argument("two_state: stay must be in (0,1)");
    return markov_with_stationary({{stay, 1 - stay}, {1 - stay, stay}},
                                  {0.5, 0.5});
  }

  // Deterministic p-cycle as a permutation Markov chain; entropy zero.
  static SymbolicSystem periodic_cycle(int p) {
    if (p < 2) throw std::invalid_argument("periodic_cycle: need period >= 2");
    Matrix m(static_cast<size_t>(p), std::vector<double>(static_cast<size_t>(p), 0));
    for (int i = 0; i < p; ++i) m[static_cast<size_t>(i)][static_cast<size_t>((i + 1) % p)] = 1.0;
    std::vector<double> pi(static_cast<size_t>(p), 1.0 / p);
    return markov_with_stationary(std::move(m), std::move(pi));
  }

  // Discrete tower over `base` with roof r(y) >= 1 given per base symbol.
  // Tower symbols encode (base symbol, level) as symbol * max_roof + level.
  static SymbolicSystem suspend(SymbolicSystem base, std::vector<int> roof) {
    if (base.kind_ == Kind::Tower || base.kind_ == Kind::Induced)
      throw std::invalid_argument("suspend: nested compositions are not supported");
    if (base.group().kind() != GroupKind::Lattice || base.group().dim() != 1)
      throw std::invalid_argument("suspend: base must act on Z");
    if (static_cast<int>(roof.size()) != base.alphabet_)
      throw std::invalid_argument("suspend: roof must assign every base symbol");
    for (int r : roof)
      if (r < 1) throw std::invalid_argument("suspend: roof must be >= 1 pointwise");
    SymbolicSystem s(Kind::Tower, GroupModel::lattice(1), 0);
    s.base_ = std::make_shared<SymbolicSystem>(std::move(base));
    s.roof_ = std::move(roof);
    s.max_roof_ = *std::max_element(s.roof_.begin(), s.roof_.end());
    s.alphabet_ = s.base_->alphabet_ * s.max_roof_;
    return s;
  }

  // First-return system on a cylinder of positive probability.
  static SymbolicSystem induce(SymbolicSystem base, Cylinder cylinder) {
    if (base.kind_ == Kind::Tower || base.kind_ == Kind::Induced)
      throw std::invalid_argument("induce: nested compositions are not supported");
    if (base.group().kind() != GroupKind::Lattice || base.group().dim() != 1)
      throw std::invalid_argument("induce: base must act on Z");
    if (cylinder.constraints.empty())
      throw std::invalid_argument("induce: empty cylinder");
    std::sort(cylinder.constraints.begin(), cylinder.constraints.end());
    if (base.kind_ == Kind::Markov && cylinder.constraints.size() > 1)
      throw std::invalid_argument(
          "induce: Markov bases support single-position cylinders only");
    if (base.cylinder_probability(cylinder) <= 0)
      throw std::invalid_argument("induce: cylinder has probability zero");
    SymbolicSystem s(Kind::Induced, GroupModel::lattice(1), base.alphabet_);
    s.base_ = std::make_shared<SymbolicSystem>(std::move(base));
    s.cylinder_ = std::move(cylinder);
    return s;
  }

  Kind kind() const { return kind_; }
  const GroupModel& group() const { return group_; }
  int alphabet() const { return alphabet_; }
  const std::vector<double>& probs() const { return probs_; }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<double>& stationary() const { return stationary_; }
  const SymbolicSystem& base() const { return *base_; }
  const std::vector<int>& roof() const { return roof_; }
  int max_roof() const { return max_roof_; }
  const Cylinder& cylinder() const { return cylinder_; }

  // Marginal law of a single symbol.
  std::vector<double> marginal() const {
    switch (kind_) {
      case Kind::Bernoulli:
        return probs_;
      case Kind::Markov:
        return stationary_;
      default:
        throw std::invalid_argument("marginal: unsupported system kind");
    }
  }

  // Exact probability of a cylinder under this (Bernoulli or Markov) law.
  double cylinder_probability(const Cylinder& cyl) const {
    if (cyl.constraints.empty()) return 1.0;
    auto cs = cyl.constraints;
    std::sort(cs.begin(), cs.end());
    for (auto& [off, sym] : cs)
      if (sym < 0 || sym >= alphabet_)
        throw std::invalid_argument("cylinder: symbol outside the alphabet");
    if (kind_ == Kind::Bernoulli) {
      double p = 1;
      for (auto& [off, sym] : cs) p *= probs_[static_cast<size_t>(sym)];
      return p;
    }
    if (kind_ == Kind::Markov) {
      double p = stationary_[static_cast<size_t>(cs[0].second)];
      for (size_t i = 1; i < cs.size(); ++i) {
        const uint64_t gap = static_cast<uint64_t>(cs[i].first - cs[i - 1].first);
        if (gap == 0)
          return cs[i].second == cs[i - 1].second ? p : 0.0;
        const Matrix pg = mat_pow(matrix_, gap);
        p *= pg[static_cast<size_t>(cs[i - 1].second)]
               [static_cast<size_t>(cs[i].second)];
      }
      return p;
    }
    throw std::invalid_argument("cylinder_probability: unsupported system kind");
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Bernoulli: {
        std::string s = "bernoulli[";
        for (size_t i = 0; i < probs_.size(); ++i)
          s += (i ? "," : "") + std::to_string(probs_[i]);
        return s + "]";
      }
      case Kind::Markov:
        return "markov[" + std::to_string(alphabet_) + " states]";
      case Kind::Tower:
        return "tower(" + base_->describe() + ")";
      case Kind::Induced:
        return "induced(" + base_->describe() + ")";
    }
    return "?";
  }

 private:
  SymbolicSystem(Kind k, GroupModel g, int a) : kind_(k), group_(g), alphabet_(a) {}

  static void check_prob_vector(const std::vector<double>& p) {
    if (p.empty()) throw std::invalid_argument("probability vector is empty");
    double sum = 0;
    for (double v : p) {
      if (v < 0) throw std::invalid_argument("negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("probability vector must sum to 1");
  }

  static void check_stochastic(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("empty transition matrix");
    for (const auto& row : m) {
      if (row.size() != m.size())
        throw std::invalid_argument("transition matrix must be square");
      check_prob_vector(row);
    }
  }

  Kind kind_;
  GroupModel group_;
  int alphabet_;
  std::vector<double> probs_;
  Matrix matrix_;
  std::vector<double> stationary_;
  std::shared_ptr<const SymbolicSystem> base_;
  std::vector<int> roof_;
  int max_roof_ = 1;
  Cylinder cylinder_;
};

// ---------------------------------------------------------------------------
// Analytic entropy oracle (bits)

inline double analytic_entropy(const SymbolicSystem& s) {
  switch (s.kind()) {
    case SymbolicSystem::Kind::Bernoulli:
      return entropy_bits(s.probs());
    case SymbolicSystem::Kind::Markov: {
      double h = 0;
      for (size_t i = 0; i < s.matrix().size(); ++i)
        h += s.stationary()[i] * entropy_bits(s.matrix()[i]);
      return h;
    }
    case SymbolicSystem::Kind::Tower: {
      const auto& base = s.base();
      const auto pi = base.marginal();
      double mean_roof = 0;
      for (size_t i = 0; i < pi.size(); ++i) mean_roof += pi[i] * s.roof()[i];
      return analytic_entropy(base) / mean_roof;
    }
    case SymbolicSystem::Kind::Induced: {
      const auto& base = s.base();
      return analytic_entropy(base) / base.cylinder_probability(s.cylinder());
    }
  }
  throw std::invalid_argument("analytic_entropy: no closed form for this system");
}

inline double expected_roof(const SymbolicSystem& tower) {
  if (tower.kind() != SymbolicSystem::Kind::Tower)
    throw std::invalid_argument("expected_roof: not a tower system");
  const auto pi = tower.base().marginal();
  double m = 0;
  for (size_t i = 0; i < pi.size(); ++i) m += pi[i] * tower.roof()[i];
  return m;
}

// ---------------------------------------------------------------------------
// Sampling

struct LabeledWindow {
  ElementSet window;
  std::vector<int> labels;  // aligned with window.elems()
  int alphabet = 0;
};

// Stationary contiguous path of the given length (Z systems).
inline std::vector<int> sample_span(const SymbolicSystem& s, int64_t len,
                                    Rng& rng) {
  if (len <= 0) return {};
  std::vector<int> out;
  out.reserve(static_cast<size_t>(len));
  switch (s.kind()) {
    case SymbolicSystem::Kind::Bernoulli: {
      for (int64_t i = 0; i < len; ++i) out.push_back(rng.next_discrete(s.probs()));
      return out;
    }
    case SymbolicSystem::Kind::Markov: {
      int state = rng.next_discrete(s.stationary());
      out.push_back(state);
      for (int64_t i = 1; i < len; ++i) {
        state = rng.next_discrete(s.matrix()[static_cast<size_t>(state)]);
        out.push_back(state);
      }
      return out;
    }
    case SymbolicSystem::Kind::Tower: {
      const auto& base = s.base();
      const auto pi = base.marginal();
      // Stationary start: P(y, i) proportional to pi(y) for each level i.
      std::vector<double> sized(pi.size());
      for (size_t i = 0; i < pi.size(); ++i)
        sized[i] = pi[i] * s.roof()[i];
      int y = rng.next_discrete(sized);
      int level = static_cast<int>(
          rng.next_below(static_cast<uint64_t>(s.roof()[static_cast<size_t>(y)])));
      for (int64_t i = 0; i < len; ++i) {
        out.push_back(y * s.max_roof() + level);
        ++level;
        if (level >= s.roof()[static_cast<size_t>(y)]) {
          level = 0;
          if (base.kind() == SymbolicSystem::Kind::Bernoulli)
            y = rng.next_discrete(base.probs());
          else
            y = rng.next_discrete(base.matrix()[static_cast<size_t>(y)]);
        }
      }
      return out;
    }
    case SymbolicSystem::Kind::Induced:
      throw std::invalid_argument(
          "sample_span: induced systems sample via InducedProcess");
  }
  return out;
}

// Exact sample of the process restricted to a finite window.  Bernoulli
// fields work over every supported group and key each draw by coordinate,
// so sub-window sharding cannot change the result.  Z systems sample a
// contiguous span and restrict.
inline LabeledWindow sample_window(const SymbolicSystem& s,
                                   const ElementSet& window, uint64_t seed) {
  LabeledWindow out;
  out.window = window;
  out.alphabet = s.alphabet();
  out.labels.reserve(window.size());
  if (s.kind() == SymbolicSystem::Kind::Bernoulli) {
    // Per-coordinate keyed draws: iid and order-independent.
    std::vector<double> cdf(s.probs().size());
    double acc = 0;
    for (size_t i = 0; i < s.probs().size(); ++i) {
      acc += s.probs()[i];
      cdf[i] = acc;
    }
    for (const Element& e : window) {
      const double u = Rng::field_u01(seed, 0xF1E1Du, e[0], e[1], e[2] + (e[3] << 21));
      int sym = 0;
      while (sym + 1 < static_cast<int>(cdf.size()) &&
             u >= cdf[static_cast<size_t>(sym)])
        ++sym;
      out.labels.push_back(sym);
    }
    return out;
  }
  if (s.group().kind() != GroupKind::Lattice || s.group().dim() != 1 ||
      window.kind() != GroupKind::Lattice || window.dim() != 1)
    throw std::invalid_argument(
        "sample_window: only Bernoulli systems support groups other than Z");
  const Coord lo = (*window.begin())[0];
  const Coord hi = window.elems().back()[0];
  Rng rng(seed, 0x5A17u);
  const std::vector<int> span = sample_span(s, hi - lo + 1, rng);
  for (const Element& e : window)
    out.labels.push_back(span[static_cast<size_t>(e[0] - lo)]);
  return out;
}

// First-return word stream for an induced system: each word runs from one
// visit (inclusive) to the next (exclusive), so its length is the return
// time.  Successive words are i.i.d. for the supported bases.
class InducedProcess {
 public:
  InducedProcess(const SymbolicSystem& induced, uint64_t seed)
      : sys_(induced), rng_(seed, 0x1D06u) {
    if (induced.kind() != SymbolicSystem::Kind::Induced)
      throw std::invalid_argument("InducedProcess: system is not induced");
    const auto& cs = sys_.cylinder().constraints;
    pattern_.reserve(cs.size());
    Coord base_off = cs.front().first;
    for (auto& [off, sym] : cs) {
      if (off != base_off + static_cast<Coord>(pattern_.size()))
        throw std::invalid_argument(
            "InducedProcess: cylinder offsets must be consecutive");
      pattern_.push_back(sym);
    }
    // Start conditioned on a visit: the buffer holds the matched pattern.
    buffer_ = pattern_;
  }

  // The word starting at the current visit; advances to the next visit.
  std::vector<int> next_word() {
    std::vector<int> word;
    word.push_back(buffer_.front());
    advance();
    while (!at_visit()) {
      word.push_back(buffer_.front());
      advance();
    }
    return word;
  }

 private:
  bool at_visit() const {
    if (buffer_.size() < pattern_.size()) return false;
    for (size_t i = 0; i < pattern_.size(); ++i)
      if (buffer_[i] != pattern_[i]) return false;
    return true;
  }

  void advance() {
    const auto& base = sys_.base();
    int next;
    if (base.kind() == SymbolicSystem::Kind::Bernoulli) {
      next = rng_.next_discrete(base.probs());
    } else {
      next = rng_.next_discrete(base.matrix()[static_cast<size_t>(buffer_.back())]);
    }
    buffer_.erase(buffer_.begin());
    buffer_.push_back(next);
  }

  const SymbolicSystem& sys_;
  Rng rng_;
  std::vector<int> pattern_;
  std::vector<int> buffer_;
};

struct KacReport {
  double mean_return = 0;
  double expected = 0;  // 1 / nu(A)
  double stderr_mean = 0;
  bool pass = false;    // |mean - expected| < 3 stderr
};

// Empirical Kac check: the mean first-return time against 1/nu(A).
inline KacReport kac_check(const SymbolicSystem& induced, int64_t n_returns,
                           uint64_t seed) {
  if (induced.kind() != SymbolicSystem::Kind::Induced)
    throw std::invalid_argument("kac_check: system is not induced");
  InducedProcess proc(induced, seed);
  double sum = 0, sumsq = 0;
  for (int64_t i = 0; i < n_returns; ++i) {
    const double r = static_cast<double>(proc.next_word().size());
    sum += r;
    sumsq += r * r;
  }
  KacReport rep;
  rep.mean_return = sum / static_cast<double>(n_returns);
  const double var =
      std::max(0.0, sumsq / static_cast<double>(n_returns) -
                        rep.mean_return * rep.mean_return);
  rep.stderr_mean = std::sqrt(var / static_cast<double>(n_returns));
  rep.expected =
      1.0 / induced.base().cylinder_probability(induced.cylinder());
  rep.pass = std::abs(rep.mean_return - rep.expected) < 3 * rep.stderr_mean;
  return rep;
}

}  // namespace xsec

#endif  // XSEC_SYSTEMS_HPP_
