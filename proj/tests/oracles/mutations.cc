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

#include "oracles/mutations.h"

#include <vector>

#include "capt/rng.h"

namespace capt::oracle {
namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

Mutation mutate(const symbolizer::TransformedExample& tx, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Mutation m{tx, ""};
  auto& t = m.tx;
  t.prompt.sites.clear();
  t.cot.sites.clear();
  const std::size_t k = tx.table.size();
  const auto& victim = tx.table[rng.below(k)];
  switch (rng.below(4)) {
    case 0: {
      // Put the original surface back at one substituted position.
      std::vector<const symbolizer::Site*> named;
      for (const auto& s : tx.prompt.sites) {
        if (!s.original.empty()) named.push_back(&s);
      }
      const auto* site = named[rng.below(named.size())];
      t.prompt.text.replace(site->pos, site->len, site->original);
      m.expected_kind = "residual-event";
      break;
    }
    case 1:
      replace_all(t.prompt.text, victim.placeholder, "it");
      m.expected_kind = "unused-placeholder";
      break;
    case 2:
      t.table.erase(t.table.begin() + static_cast<std::ptrdiff_t>(&victim - tx.table.data()));
      m.expected_kind = "undeclared-placeholder";
      break;
    default: {
      const auto gap = symbolizer::placeholder(static_cast<int>(k) + 2);
      for (auto& e : t.table) {
        if (e.placeholder == victim.placeholder) e.placeholder = gap;
      }
      replace_all(t.prompt.text, victim.placeholder, gap);
      replace_all(t.cot.text, victim.placeholder, gap);
      m.expected_kind = "non-contiguous-numbering";
      break;
    }
  }
  return m;
}

}  // namespace capt::oracle
