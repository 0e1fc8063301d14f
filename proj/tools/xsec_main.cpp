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

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "xsec/cli.hpp"

namespace {

std::vector<int64_t> parse_gap_spec(const std::string& spec) {
  // "1-30" or "1,2,5,30"
  std::vector<int64_t> out;
  const auto dash = spec.find('-');
  if (dash != std::string::npos && spec.find(',') == std::string::npos) {
    const int64_t lo = std::stoll(spec.substr(0, dash));
    const int64_t hi = std::stoll(spec.substr(dash + 1));
    for (int64_t g = lo; g <= hi; ++g) out.push_back(g);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xsec: quasi-tilings, cross-sections and entropy estimation "
               "over discrete amenable groups"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (overrides flags)");

  xsec::ExperimentConfig cfg;
  cfg.threads = 0;  // resolve from XSEC_THREADS at run time
  std::string gap_spec;
  std::string radii_spec;
  bool seed_set = false;
  uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--group", cfg.group, "z | z2 | z3 | h3");
    sub->add_option("--seed", seed_value, "RNG seed (mandatory)")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", cfg.out_path, "write the JSON record here");
    sub->add_flag("--stable-output", cfg.stable_output,
                  "omit the timestamp for byte-stable records");
  };

  CLI::App* tile = app.add_subcommand("tile", "quasi-tile a generated instance");
  tile->add_option("--delta", cfg.delta, "tiling parameter, 0 < delta <= 0.1");
  tile->add_option("--scale", cfg.scale, "window scale (0 = group default)");
  tile->add_option("--density", cfg.density, "density of A in the window");
  add_common(tile);

  CLI::App* entropy = app.add_subcommand("entropy", "block entropy estimate");
  entropy->add_option("--system", cfg.system, "bernoulli:p | markov:stay | periodic:p");
  entropy->add_option("--window", cfg.window, "window length (Z) or box side");
  entropy->add_option("--samples", cfg.samples, "sample count (>= 10^4)");
  add_common(entropy);

  CLI::App* abramov = app.add_subcommand("abramov", "induced-map entropy check");
  abramov->add_option("--system", cfg.system, "base system");
  abramov->add_option("--cylinder", cfg.cylinder, "e.g. x0=0");
  abramov->add_option("--mode", cfg.mode, "induced | suspension");
  abramov->add_option("--roof", cfg.roof, "constant roof (suspension mode)");
  abramov->add_option("--samples", cfg.samples, "return words to sample");
  abramov->add_option("--tol", cfg.tol, "verdict tolerance on the ratio");
  add_common(abramov);

  CLI::App* mixing = app.add_subcommand("mixing", "uniform-mixing defect scan");
  mixing->add_option("--system", cfg.system, "system under test");
  mixing->add_option("--gaps", gap_spec, "Z gap list, e.g. 1-30 or 1,2,5");
  mixing->add_option("--radii", radii_spec, "K-ball radii, e.g. 1,2,3");
  mixing->add_option("--family-size", cfg.family_size, "separated family size");
  mixing->add_option("--samples", cfg.samples, "sample count per scale");
  mixing->add_option("--csv", cfg.csv_path, "write scale,defect,stderr,oracle CSV");
  add_common(mixing);

  CLI::App* castle = app.add_subcommand("castle-check", "castle ergodic theorem check");
  castle->add_option("--system", cfg.system, "Z system");
  castle->add_option("--window", cfg.window, "orbit window length");
  castle->add_option("--orbits", cfg.orbits, "number of orbits");
  castle->add_option("--scale", cfg.scale, "castle tower scale");
  castle->add_option("--delta", cfg.delta, "tiling delta");
  castle->add_option("--tol", cfg.tol, "ergodic tolerance");
  add_common(castle);

  CLI::App* transfer = app.add_subcommand("transfer", "two-cocycle entropy agreement");
  transfer->add_option("--system", cfg.system, "field on the lattice");
  transfer->add_option("--window", cfg.window, "window side");
  transfer->add_option("--orbits", cfg.orbits, "number of orbits");
  transfer->add_option("--tower-side", cfg.tower_side, "castle tower side");
  transfer->add_option("--tol", cfg.tol, "relative agreement tolerance");
  transfer->add_option("--eps", cfg.eps, "ball coverage epsilon");
  add_common(transfer);

  CLI11_PARSE(app, argc, argv);

  xsec::ConfigValidation validated;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "cannot open config file " << config_path << "\n";
      return 2;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    validated = xsec::validate_config(buf.str());
  } else {
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
      std::cerr << app.help();
      return 2;
    }
    cfg.command = subs[0]->get_name();
    if (!gap_spec.empty()) cfg.gaps = parse_gap_spec(gap_spec);
    if (!radii_spec.empty()) {
      for (int64_t v : parse_gap_spec(radii_spec))
        cfg.radii.push_back(static_cast<int>(v));
    }
    if (seed_set) {
      cfg.seed = seed_value;
      cfg.has_seed = true;
    }
    validated = xsec::validate_config(cfg.to_json().dump());
    if (validated.config) {
      validated.config->out_path = cfg.out_path;
      validated.config->csv_path = cfg.csv_path;
      validated.config->threads = cfg.threads;
    }
  }

  if (!validated.config) {
    for (const auto& e : validated.errors) std::cerr << "config error: " << e << "\n";
    return 2;
  }

  const xsec::RunOutcome outcome = xsec::run(*validated.config);
  if (validated.config->out_path.empty())
    std::cout << outcome.record.dump(2) << "\n";
  if (outcome.record.contains("error"))
    std::cerr << "error: " << outcome.record["error"].get<std::string>() << "\n";
  return outcome.exit_code;
}
