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

#ifndef XSEC_SERIALIZE_HPP_
#define XSEC_SERIALIZE_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "xsec/entropy.hpp"
#include "xsec/group.hpp"
#include "xsec/mixing.hpp"
#include "xsec/section.hpp"
#include "xsec/systems.hpp"
#include "xsec/tiling.hpp"

namespace xsec {

using json = nlohmann::json;

inline json element_json(const Element& e, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(e[i]);
  return a;
}

inline json set_json(const ElementSet& s) {
  json a = json::array();
  for (const Element& e : s) a.push_back(element_json(e, s.dim()));
  return a;
}

inline json params_json(const TilingParams& p) {
  return json{{"delta", p.delta}, {"c", p.c}, {"n_scales", p.n_scales},
              {"eps", p.eps}};
}

inline json condition_json(const ConditionCheck& c) {
  json j{{"name", c.name}, {"pass", c.pass}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

inline json instance_report_json(const InstanceReport& r) {
  json conds = json::array();
  for (const auto& c : r.conditions) conds.push_back(condition_json(c));
  return json{{"conditions", conds},
              {"all_pass", r.all_pass},
              {"lemma_density_failures", r.lemma_density_failures},
              {"centers_checked", r.centers_checked}};
}

inline json tiling_result_json(const TilingResult& r, int dim) {
  json scales = json::array();
  for (const auto& sc : r.scales) {
    json centers = json::array();
    for (const Element& c : sc.centers) centers.push_back(element_json(c, dim));
    json tile_sizes = json::array();
    for (const auto& t : sc.tiles) tile_sizes.push_back(t.size());
    scales.push_back(json{{"centers", centers},
                          {"tile_sizes", tile_sizes},
                          {"density_filtered", sc.density_filtered}});
  }
  return json{{"scales", scales},
              {"covered", r.covered},
              {"total", r.total},
              {"coverage", r.coverage},
              {"early_stop_scale", r.early_stop_scale}};
}

inline json verify_report_json(const VerifyReport& r) {
  json conds = json::array();
  for (const auto& c : r.conclusions) conds.push_back(condition_json(c));
  return json{{"conclusions", conds},
              {"all_pass", r.all_pass},
              {"coverage", r.coverage},
              {"worst_disjointness_ratio", r.worst_disjointness_ratio}};
}

inline json section_json(const SectionSample& s) {
  json points = json::array();
  for (size_t i = 0; i < s.size(); ++i)
    points.push_back(json{
        {"address", element_json(s.address(static_cast<int32_t>(i)),
                                 s.group().dim())},
        {"class", s.class_of(static_cast<int32_t>(i))},
        {"label", s.label(static_cast<int32_t>(i))},
        {"weight", s.weight(static_cast<int32_t>(i))}});
  return json{{"group", s.group().name()},
              {"points", points},
              {"intensity", s.intensity()}};
}

inline json castle_json(const SectionSample& s, const Castle& c) {
  json towers = json::object();
  for (size_t i = 0; i < c.base.size(); ++i) {
    json addrs = json::array();
    for (int32_t t : c.towers[i])
      addrs.push_back(element_json(s.address(t), s.group().dim()));
    towers[element_json(s.address(c.base[i]), s.group().dim()).dump()] = addrs;
  }
  return towers;
}

inline json block_entropy_json(const BlockEntropyEstimate& e) {
  return json{{"estimate_bits", e.rate_bits},
              {"estimate_nats", e.rate_bits * std::log(2.0)},
              {"naive_bits", e.naive_bits},
              {"joint_bits", e.joint_bits},
              {"stderr", e.stderr_rate},
              {"observed_patterns", e.observed_patterns},
              {"samples", e.samples}};
}

inline json kac_json(const KacReport& k) {
  return json{{"mean_return", k.mean_return},
              {"expected", k.expected},
              {"stderr", k.stderr_mean},
              {"pass", k.pass}};
}

inline json abramov_json(const AbramovReport& r) {
  return json{{"mode", r.mode},
              {"estimate_bits", r.estimate_bits},
              {"target_bits", r.target_bits},
              {"ratio", r.ratio},
              {"stderr", r.stderr_bits},
              {"kac", kac_json(r.kac)}};
}

inline json mixing_report_json(const MixingReport& r) {
  json j{{"k", r.k_description},
         {"family", set_json(r.family)},
         {"per_element_bits", r.per_element_bits},
         {"h_p_bits", r.h_p_bits},
         {"defect", r.defect},
         {"signed_defect", r.signed_defect},
         {"stderr", r.stderr_defect}};
  if (r.oracle_defect) j["oracle_defect"] = *r.oracle_defect;
  return j;
}

inline json transfer_json(const TransferReport& r) {
  return json{{"h_alpha_bits", r.h_alpha},
              {"h_beta_bits", r.h_beta},
              {"gap", r.gap},
              {"rel_gap", r.rel_gap},
              {"pass", r.pass}};
}

inline json comparison_json(const ComparisonReport& r) {
  return json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"observed", r.observed},
              {"mode", r.mode}};
}

inline std::string mixing_csv(const std::vector<MixingReport>& reports) {
  std::string out = "scale,defect,stderr,oracle_defect\n";
  for (const auto& r : reports) {
    out += r.k_description + "," + std::to_string(r.defect) + "," +
           std::to_string(r.stderr_defect) + ",";
    if (r.oracle_defect) out += std::to_string(*r.oracle_defect);
    out += "\n";
  }
  return out;
}

}  // namespace xsec

#endif  // XSEC_SERIALIZE_HPP_
