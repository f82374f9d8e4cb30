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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capt/reasoning_item.h"

namespace capt::ontology {

enum class Relation { kIsA, kHas, kLacks };
// Surface form of a rule: "Every X ...", "Each X ...", or "Xs are ...".
enum class Phrasing { kEvery, kEach, kPlural };

struct Rule {
  std::string subject;
  Relation relation = Relation::kIsA;
  std::string object;
  Phrasing phrasing = Phrasing::kEvery;

  bool operator==(const Rule&) const = default;
};

struct StartFact {
  std::string entity;
  std::string category;
};

struct Query {
  std::string entity;
  std::string predicate;  // category or property
  bool negated = false;
};

struct ChainSpec {
  int hops = 4;  // is_a steps plus the closing property rule
  int distractors = 4;
  bool negated_query = false;
  std::string entity_name;  // drawn from the domain's name list when empty
};

// True when `word` takes a plain "s" plural ("insect" -> "insects").
bool pluralizable(const std::string& word);

std::string render_fact(const Rule& rule);
std::string render_prompt(const std::vector<Rule>& facts, const StartFact& start, const Query& query);
// `chain` is the gold derivation: is_a rules from the start category
// followed by the closing property rule.
std::string render_chain_trace(const StartFact& start, const std::vector<Rule>& chain, Answer answer);

// Forward chaining from the start fact. Throws kUndecidableQuery when the
// closure neither contains the predicate nor its negation.
Answer derive_answer(const std::vector<Rule>& rules, const StartFact& start, const Query& query);

struct Category {
  std::string name;
  std::string parent;  // empty for roots
  std::vector<std::string> has;
  std::vector<std::string> lacks;
  std::string domain;
};

const std::vector<Category>& taxonomy();
// Every category, property, and entity name the commonsense taxonomy uses.
std::vector<std::string> pool_event_strings();
// All (subject, object) pairs that hold in the commonsense taxonomy,
// including inherited ones.
const std::vector<std::pair<std::string, std::string>>& commonsense_pairs();

struct GeneratedOntology {
  ReasoningItem item;
  std::vector<Rule> facts;  // prompt order
  std::vector<Rule> chain;
  std::vector<Rule> distractors;
  StartFact start;
  Query query;
};

GeneratedOntology generate_prontoqa(std::uint64_t seed, const ChainSpec& spec, Split split);
ReasoningItem generate_prontoqa_item(std::uint64_t seed, const ChainSpec& spec, Split split);

struct BatchOptions {
  int min_hops = 3;
  int max_hops = 5;
  int min_distractors = 3;
  int max_distractors = 8;
};

std::vector<ReasoningItem> generate_prontoqa_batch(std::size_t n, std::uint64_t seed, const std::vector<Split>& splits,
                                                   const BatchOptions& options = {});

}  // namespace capt::ontology
