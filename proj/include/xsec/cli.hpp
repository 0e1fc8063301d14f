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

#ifndef XSEC_CLI_HPP_
#define XSEC_CLI_HPP_

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xsec/serialize.hpp"

namespace xsec {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string command;
  std::string group = "z";
  std::string system = "bernoulli:0.5";
  double delta = 0.1;
  Coord scale = 0;  // tiling window scale; 0 = group default
  double density = 1.0;
  int64_t samples = 1000000;
  Coord window = 10;  // estimator window length on Z
  std::string cylinder = "x0=0";
  std::string mode = "induced";  // abramov: induced | suspension
  int roof = 2;
  std::vector<int64_t> gaps;
  std::vector<int> radii;
  int family_size = 2;
  int orbits = 8;
  Coord tower_side = 2;
  double tol = 0.1;
  double eps = 0.05;
  uint64_t seed = 0;
  bool has_seed = false;
  std::string out_path;
  std::string csv_path;
  bool stable_output = false;
  int threads = 1;

  json to_json() const {
    json j{{"command", command},   {"group", group},
           {"system", system},     {"delta", delta},
           {"scale", scale},       {"density", density},
           {"samples", samples},   {"window", window},
           {"cylinder", cylinder}, {"mode", mode},
           {"roof", roof},         {"gaps", gaps},
           {"radii", radii},       {"family_size", family_size},
           {"orbits", orbits},     {"tower_side", tower_side},
           {"tol", tol},           {"eps", eps},
           {"stable_output", stable_output}};
    if (has_seed) j["seed"] = seed;
    return j;
  }
};

inline SymbolicSystem parse_system(const std::string& spec,
                                   const GroupModel& group);

// Structured form: {"kind":"bernoulli","probs":[..]},
// {"kind":"markov","matrix":[[..],..]}, {"kind":"periodic","period":p}.
inline SymbolicSystem parse_system_object(const json& j,
                                          const GroupModel& group) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bernoulli")
    return SymbolicSystem::bernoulli(group, j.at("probs").get<std::vector<double>>());
  if (kind == "markov") {
    Matrix m = j.at("matrix").get<Matrix>();
    if (j.contains("stationary"))
      return SymbolicSystem::markov_with_stationary(
          std::move(m), j.at("stationary").get<std::vector<double>>());
    return SymbolicSystem::markov(std::move(m));
  }
  if (kind == "periodic")
    return SymbolicSystem::periodic_cycle(j.at("period").get<int>());
  throw std::invalid_argument("unknown system kind '" + kind + "'");
}

inline SymbolicSystem parse_system(const std::string& spec,
                                   const GroupModel& group) {
  if (!spec.empty() && spec.front() == '{')
    return parse_system_object(json::parse(spec), group);
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto split_doubles = [](const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
  };
  if (kind == "bernoulli") {
    std::vector<double> p = split_doubles(args);
    if (p.size() == 1) p = {p[0], 1.0 - p[0]};
    return SymbolicSystem::bernoulli(group, p);
  }
  if (kind == "markov") {
    const std::vector<double> v = split_doubles(args);
    if (v.size() == 1) return SymbolicSystem::two_state(v[0]);
    const size_t n = static_cast<size_t>(std::llround(std::sqrt(double(v.size()))));
    if (n * n != v.size())
      throw std::invalid_argument("markov: need a stay probability or a flat "
                                  "row-major square matrix");
    Matrix m(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) m[i][j] = v[i * n + j];
    return SymbolicSystem::markov(m);
  }
  if (kind == "periodic") return SymbolicSystem::periodic_cycle(std::stoi(args));
  throw std::invalid_argument("unknown system '" + spec + "'");
}

inline Cylinder parse_cylinder(const std::string& spec) {
  Cylinder c;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto eq = tok.find('=');
    if (tok.empty() || tok[0] != 'x' || eq == std::string::npos)
      throw std::invalid_argument("cylinder: expected entries like x0=0");
    c.constraints.push_back({std::stoll(tok.substr(1, eq - 1)),
                             std::stoi(tok.substr(eq + 1))});
  }
  if (c.constraints.empty())
    throw std::invalid_argument("cylinder: no constraints parsed");
  return c;
}

struct ConfigValidation {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
};

// Parses and validates a JSON config text, collecting every violation
// rather than stopping at the first.
inline ConfigValidation validate_config(const std::string& text) {
  ConfigValidation out;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    out.errors.push_back(std::string("malformed JSON: ") + e.what());
    return out;
  }
  ExperimentConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].template get<std::decay_t<decltype(field)>>();
  };
  get("command", c.command);
  get("group", c.group);
  if (j.contains("system"))
    c.system = j["system"].is_object() ? j["system"].dump()
                                       : j["system"].get<std::string>();
  get("delta", c.delta);
  get("scale", c.scale);
  get("density", c.density);
  get("samples", c.samples);
  get("window", c.window);
  get("cylinder", c.cylinder);
  get("mode", c.mode);
  get("roof", c.roof);
  get("gaps", c.gaps);
  get("radii", c.radii);
  get("family_size", c.family_size);
  get("orbits", c.orbits);
  get("tower_side", c.tower_side);
  get("tol", c.tol);
  get("eps", c.eps);
  get("out", c.out_path);
  get("csv", c.csv_path);
  get("stable_output", c.stable_output);

  static const std::vector<std::string> commands = {
      "tile", "entropy", "abramov", "mixing", "castle-check", "transfer"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    out.errors.push_back("unknown command '" + c.command + "'");
  if (j.contains("seed")) {
    c.seed = j["seed"].get<uint64_t>();
    c.has_seed = true;
  } else {
    out.errors.push_back("seed is mandatory");
  }
  if (!(c.delta > 0.0 && c.delta <= 0.1))
    out.errors.push_back(
        "delta must lie in (0,0.1): tiling lemma range (the boundary 0.1 is "
        "accepted)");
  if (!(c.density > 0.0 && c.density <= 1.0))
    out.errors.push_back("density must lie in (0,1]");
  if ((c.command == "entropy" || c.command == "abramov" ||
       c.command == "mixing") &&
      c.samples < 10000)
    out.errors.push_back("samples must be >= 10^4 for estimator commands");
  try {
    GroupModel g = GroupModel::parse(c.group);
    (void)parse_system(c.system, g);
  } catch (const std::exception& e) {
    out.errors.push_back(e.what());
  }
  if (c.command == "abramov" && c.mode == "induced") {
    try {
      (void)parse_cylinder(c.cylinder);
    } catch (const std::exception& e) {
      out.errors.push_back(e.what());
    }
  }
  if (out.errors.empty()) out.config = std::move(c);
  return out;
}

// ---------------------------------------------------------------------------
// Runner

struct RunOutcome {
  json record;
  int exit_code = 0;  // 0 pass, 1 checker failure, 2 config error
};

inline int env_threads() {
  const char* v = std::getenv("XSEC_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

// Runs fn(i) for i in [0,n) on up to `threads` async workers and returns the
// results in index order, so the merge is scheduling-independent.
template <typename T, typename Fn>
inline std::vector<T> ordered_parallel_map(int n, int threads, Fn fn) {
  std::vector<T> out(static_cast<size_t>(n));
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = fn(i);
    return out;
  }
  std::vector<std::future<T>> futures;
  futures.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    futures.push_back(std::async(std::launch::async, fn, i));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = futures[static_cast<size_t>(i)].get();
  return out;
}

inline Coord default_tile_scale(const GroupModel& g) {
  if (g.kind() == GroupKind::Heisenberg) return 10;
  switch (g.dim()) {
    case 1:
      return 50000;
    case 2:
      return 158;
    case 3:
      return 23;
    default:
      return 8;
  }
}

inline RunOutcome finish(RunOutcome out, const ExperimentConfig& cfg) {
  if (!cfg.out_path.empty()) {
    std::ofstream f(cfg.out_path);
    f << out.record.dump(2) << "\n";
  }
  return out;
}

inline RunOutcome run(const ExperimentConfig& cfg) {
  RunOutcome out;
  json& rec = out.record;
  rec["config"] = cfg.to_json();
  rec["provenance"] = json{{"seed", cfg.seed},
                           {"version", kVersion},
                           {"rng", std::string(Rng::kName)}};
  if (!cfg.stable_output) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    rec["provenance"]["timestamp"] =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();
  }

  const int threads = cfg.threads > 0 ? cfg.threads : env_threads();
  try {
    const GroupModel group = GroupModel::parse(cfg.group);

    if (cfg.command == "tile") {
      const TilingParams params = params_for(cfg.delta, 1);
      const Coord scale = cfg.scale > 0 ? cfg.scale : default_tile_scale(group);
      auto made = make_instance(group, scale, cfg.density, cfg.seed, params);
      const TilingResult result = quasi_tile(made.instance, params);
      const VerifyReport verify = verify_tiling(made.instance, params, result);
      rec["params"] = params_json(params);
      rec["instance"] = json{{"A_size", made.instance.A.size()},
                             {"B_size", made.instance.B.size()},
                             {"scales", made.instance.scales.size()},
                             {"c", made.instance.c},
                             {"window_scale", scale}};
      rec["preconditions"] = instance_report_json(made.report);
      rec["result"] = tiling_result_json(result, group.dim());
      rec["verify"] = verify_report_json(verify);
      out.exit_code = verify.all_pass ? 0 : 1;
      return finish(out, cfg);
    }

    if (cfg.command == "entropy") {
      const SymbolicSystem sys = parse_system(cfg.system, group);
      ElementSet F =
          group.dim() == 1
              ? ElementSet::interval(group, 0, cfg.window - 1)
              : ElementSet::box(group, std::vector<Coord>(group.dim(), 0),
                                std::vector<Coord>(group.dim(), cfg.window - 1));
      const BlockEntropyEstimate est =
          block_entropy(sys, F, cfg.samples, cfg.seed);
      rec["estimate"] = block_entropy_json(est);
      try {
        rec["analytic_bits"] = analytic_entropy(sys);
      } catch (const std::exception&) {
      }
      if (!cfg.csv_path.empty()) {
        // Pattern-count table for the same stream as the point estimate.
        Rng rng(cfg.seed, 0xB10CDull);
        std::map<uint64_t, int64_t> counts;
        std::vector<int> pattern;
        const uint64_t base = static_cast<uint64_t>(std::max(2, sys.alphabet()));
        for (int64_t i = 0; i < cfg.samples; ++i) {
          detail::sample_pattern(sys, F.elems(), rng, pattern);
          uint64_t code = 0;
          for (int v : pattern) code = code * base + static_cast<uint64_t>(v);
          ++counts[code];
        }
        std::ofstream f(cfg.csv_path);
        f << "pattern,count\n";
        for (const auto& [code, cnt] : counts) f << code << "," << cnt << "\n";
      }
      out.exit_code = 0;
      return finish(out, cfg);
    }

    if (cfg.command == "abramov") {
      const SymbolicSystem sys = parse_system(cfg.system, group);
      AbramovReport rep;
      if (cfg.mode == "suspension") {
        rep = abramov_suspension_check(
            sys, std::vector<int>(static_cast<size_t>(sys.alphabet()), cfg.roof),
            cfg.samples, cfg.seed);
      } else {
        rep = abramov_check(sys, parse_cylinder(cfg.cylinder), cfg.samples,
                            cfg.seed);
      }
      rec["abramov"] = abramov_json(rep);
      const bool ratio_ok = std::abs(rep.ratio - 1.0) <= cfg.tol;
      rec["verdict"] = json{{"ratio_ok", ratio_ok},
                            {"kac_ok", cfg.mode == "suspension" || rep.kac.pass}};
      out.exit_code = ratio_ok && (cfg.mode == "suspension" || rep.kac.pass) ? 0 : 1;
      return finish(out, cfg);
    }

    if (cfg.command == "mixing") {
      const SymbolicSystem sys = parse_system(cfg.system, group);
      const SymbolPartition P = SymbolPartition::identity(sys.alphabet());
      std::vector<MixingReport> reports;
      if (!cfg.gaps.empty()) {
        reports = ordered_parallel_map<MixingReport>(
            static_cast<int>(cfg.gaps.size()), threads, [&](int i) {
              return markov_gap_scan(sys, P, {cfg.gaps[static_cast<size_t>(i)]},
                                     cfg.samples, cfg.seed)[0];
            });
      } else {
        std::vector<int> radii = cfg.radii;
        if (radii.empty()) radii = {1, 2, 3};
        reports = ordered_parallel_map<MixingReport>(
            static_cast<int>(radii.size()), threads, [&](int i) {
              return mixing_scan(sys, P, {radii[static_cast<size_t>(i)]},
                                 cfg.family_size, cfg.samples, cfg.seed)[0];
            });
      }
      json arr = json::array();
      bool subadditive = true;
      for (const auto& r : reports) {
        arr.push_back(mixing_report_json(r));
        subadditive =
            subadditive && r.signed_defect >= -3.0 * r.stderr_defect - 1e-12;
      }
      rec["mixing"] = arr;
      rec["verdict"] = json{{"subadditivity_ok", subadditive}};
      if (!cfg.csv_path.empty()) {
        std::ofstream f(cfg.csv_path);
        f << mixing_csv(reports);
      }
      out.exit_code = subadditive ? 0 : 1;
      return finish(out, cfg);
    }

    if (cfg.command == "castle-check") {
      const SymbolicSystem sys = parse_system(cfg.system, group);
      const ElementSet W = ElementSet::interval(group, 0, cfg.window - 1);
      auto built = from_orbit_window(sys, W, SectionRule::always(), cfg.orbits,
                                     cfg.seed);
      if (!built.sample) throw std::runtime_error("castle-check: empty section");
      const SectionSample& s = *built.sample;
      std::vector<double> h(s.size());
      for (size_t i = 0; i < s.size(); ++i)
        h[i] = s.label(static_cast<int32_t>(i)) == 0 ? 1.0 : 0.0;
      const Coord scale = cfg.scale > 0 ? cfg.scale : 100;
      const TilingParams params = params_for(cfg.delta, 1);
      const Castle castle = castle_from_quasi_tiling(s, scale, params);
      const CastleErgodicReport cer = castle_ergodic_check(s, castle, h, cfg.tol);
      const DeviationReport dev =
          ergodic_deviation(s, h, folner_set(group, scale), cfg.tol);
      rec["castle"] = json{{"towers", castle.base.size()},
                           {"mu_T", mu_T(s, castle)},
                           {"pass", cer.pass},
                           {"best_mass_fraction", cer.best_mass_fraction},
                           {"mean", cer.mean}};
      rec["mean_ergodic"] = json{{"deviation_mass", dev.deviation_mass},
                                 {"collar_fraction", dev.collar_fraction},
                                 {"mean", dev.mean}};
      out.exit_code = cer.pass ? 0 : 1;
      return finish(out, cfg);
    }

    if (cfg.command == "transfer") {
      const SymbolicSystem sys = parse_system(cfg.system, group);
      if (group.dim() < 2)
        throw std::invalid_argument("transfer: use a lattice of dimension >= 2");
      const ElementSet W =
          ElementSet::box(group, std::vector<Coord>(group.dim(), 0),
                          std::vector<Coord>(group.dim(), cfg.window - 1));
      auto built = from_orbit_window(sys, W, SectionRule::always(), cfg.orbits,
                                     cfg.seed);
      if (!built.sample) throw std::runtime_error("transfer: empty section");
      const SectionSample& s = *built.sample;
      const Partition P = Partition::from_labels(s);
      const FiberPartition fibers = FiberPartition::geometry(s);
      const TransferReport rep =
          transfer_check(s, P, fibers, cfg.tower_side, cfg.tol, cfg.eps);
      rec["transfer"] = transfer_json(rep);
      out.exit_code = rep.pass ? 0 : 1;
      return finish(out, cfg);
    }

    out.record["error"] = "unknown command '" + cfg.command + "'";
    out.exit_code = 2;
    return finish(out, cfg);
  } catch (const std::invalid_argument& e) {
    out.record["error"] = e.what();
    out.exit_code = 2;
    return finish(out, cfg);
  } catch (const std::exception& e) {
    out.record["error"] = e.what();
    out.exit_code = 2;
    return finish(out, cfg);
  }
}

}  // namespace xsec

#endif  // XSEC_CLI_HPP_
