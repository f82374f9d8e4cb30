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

#pragma once

#include <string>
#include <vector>

#include "capt/ontology.h"
#include "oracles/fixpoint.h"

namespace capt::test {

using ontology::Phrasing;
using ontology::Query;
using ontology::Relation;
using ontology::Rule;
using ontology::StartFact;

constexpr auto E = Phrasing::kEvery;
constexpr auto H = Phrasing::kEach;
constexpr auto P = Phrasing::kPlural;

inline Rule isa(std::string s, std::string o, Phrasing p) { return {std::move(s), Relation::kIsA, std::move(o), p}; }
inline Rule has(std::string s, std::string o, Phrasing p) { return {std::move(s), Relation::kHas, std::move(o), p}; }
inline Rule lacks(std::string s, std::string o, Phrasing p) {
  return {std::move(s), Relation::kLacks, std::move(o), p};
}

// The three PrOntoQA worked examples shipped as in-context data.
struct Worked {
  std::vector<Rule> facts;
  StartFact start;
  Query query;
  std::vector<Rule> chain;
  Answer answer;
};

inline std::vector<Worked> worked_examples() {
  return {
      {{isa("prime number", "natural number", P), lacks("Mersenne prime", "composite", E),
        lacks("imaginary number", "real", P), isa("real number", "number", E), isa("natural number", "integer", P),
        has("real number", "real", E), isa("Mersenne prime", "prime number", E), has("natural number", "positive", P),
        lacks("prime number", "composite", P), isa("integer", "real number", P)},
       {"127", "Mersenne prime"},
       {"127", "real", true},
       {isa("Mersenne prime", "prime number", E), isa("prime number", "natural number", P),
        isa("natural number", "integer", P), isa("integer", "real number", P), has("real number", "real", E)},
       Answer::kFalse},
      {{isa("carnivore", "mammal", E), has("animal", "multicellular", P), isa("vertebrate", "chordate", E),
        lacks("carnivore", "herbivorous", E), lacks("snake", "furry", H), isa("cat", "feline", E),
        isa("chordate", "bilaterian", P), isa("feline", "carnivore", H), isa("mammal", "vertebrate", P),
        has("mammal", "furry", P), isa("bilaterian", "animal", P), isa("tabby", "cat", E)},
       {"Wren", "tabby"},
       {"Wren", "furry", false},
       {isa("tabby", "cat", E), isa("cat", "feline", E), isa("feline", "carnivore", H), isa("carnivore", "mammal", E),
        has("mammal", "furry", P)},
       Answer::kTrue},
      {{isa("butterfly", "lepidopteran", E), isa("lepidopteran", "insect", P), lacks("insect", "eight-legged", H),
        lacks("nematode", "segmented", P), lacks("animal", "unicellular", P), has("arthropod", "segmented", P),
        isa("arthropod", "invertebrate", H), isa("insect", "arthropod", E), isa("invertebrate", "animal", H)},
       {"Wren", "butterfly"},
       {"Wren", "segmented", true},
       {isa("butterfly", "lepidopteran", E), isa("lepidopteran", "insect", P), isa("insect", "arthropod", E),
        has("arthropod", "segmented", P)},
       Answer::kFalse},
  };
}

inline std::vector<oracle::Triple> to_triples(const std::vector<Rule>& rules) {
  std::vector<oracle::Triple> out;
  for (const auto& r : rules) {
    out.push_back({r.subject,
                   r.relation == Relation::kIsA   ? "isa"
                   : r.relation == Relation::kHas ? "has"
                                                  : "not",
                   r.object});
  }
  return out;
}

}  // namespace capt::test
