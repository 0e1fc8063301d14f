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

// Estimates the entropy rate of a two-state Markov chain and compares the
// induced-map entropy on {x0=0} against the Abramov prediction.

#include <cstdio>

#include "xsec/entropy.hpp"

int main() {
  using namespace xsec;
  const GroupModel z = GroupModel::lattice(1);
  const SymbolicSystem chain = SymbolicSystem::two_state(0.9);

  const ElementSet F = ElementSet::interval(z, 0, 9);
  const BlockEntropyEstimate est = block_entropy(chain, F, 200000, 7);
  std::printf("markov(stay=0.9): estimate %.4f bits, analytic %.4f bits\n",
              est.rate_bits, analytic_entropy(chain));

  const AbramovReport rep = abramov_check(chain, Cylinder::single(0, 0), 200000, 7);
  std::printf("induced on {x0=0}: estimate %.4f bits, target %.4f bits, "
              "ratio %.3f\n",
              rep.estimate_bits, rep.target_bits, rep.ratio);
  std::printf("kac: mean return %.4f vs expected %.4f\n", rep.kac.mean_return,
              rep.kac.expected);
  return 0;
}
