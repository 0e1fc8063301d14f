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

// Quasi-tiles a random subset of a box in Z^2 and prints the verifier's
// read-out of the three conclusions.

#include <cstdio>

#include "xsec/tiling.hpp"

int main() {
  using namespace xsec;
  const GroupModel z2 = GroupModel::lattice(2);
  const TilingParams params = params_for(0.1, 1);
  std::printf("params: delta=%.3f N=%d eps=%.4f\n", params.delta,
              params.n_scales, params.eps);

  const auto made = make_instance(z2, 80, 0.98, 42, params);
  std::printf("instance: |A|=%zu |B|=%zu scales=%zu\n", made.instance.A.size(),
              made.instance.B.size(), made.instance.scales.size());

  const TilingResult result = quasi_tile(made.instance, params);
  std::printf("tiles at scale 1: %zu, coverage %.4f\n",
              result.scales[0].tiles.size(), result.coverage);

  const VerifyReport verify = verify_tiling(made.instance, params, result);
  for (const auto& c : verify.conclusions)
    std::printf("  %-40s %s\n", c.name.c_str(), c.pass ? "pass" : "FAIL");
  return verify.all_pass ? 0 : 1;
}
