// Copyright 2026 The CAPT Toolkit Authors.
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

#include "oracles/fixpoint.h"

#include <set>

namespace capt::oracle {

std::optional<bool> entails(const std::vector<Triple>& facts, const std::string& start_category,
                            const std::string& predicate, bool negated) {
  std::set<std::string> atoms = {"isa:" + start_category};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& f : facts) {
      if (!atoms.contains("isa:" + f.subject)) continue;
      if (atoms.insert(f.relation + ":" + f.object).second) changed = true;
    }
  }
  const bool pos = atoms.contains("isa:" + predicate) || atoms.contains("has:" + predicate);
  const bool neg = atoms.contains("not:" + predicate);
  if (pos == neg) return std::nullopt;
  return pos != negated;
}

}  // namespace capt::oracle
