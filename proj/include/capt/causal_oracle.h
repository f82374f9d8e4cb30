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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capt/reasoning_item.h"
#include "capt/rng.h"

namespace capt::cladder {

enum class GraphTemplate { kChain, kMediation };
enum class QueryType { kAte, kNie, kConditional };
enum class Polarity { kIncrease, kDecrease };

std::string_view to_string(GraphTemplate t);
std::string_view to_string(QueryType q);
GraphTemplate template_from_string(std::string_view s);

// Display name of the query type as it appears in traces.
std::string_view query_type_label(QueryType q);

struct NodeEvent {
  std::string name;
  std::string set_description;
  std::string unset_description;

  bool operator==(const NodeEvent&) const = default;
};

// Nodes are in role order X, V2, Y.
struct CausalStory {
  GraphTemplate graph = GraphTemplate::kMediation;
  std::array<NodeEvent, 3> nodes;
  Split split = Split::kCommonsense;
};

inline constexpr std::string_view kPy1GivenX0 = "P(Y=1|X=0)";
inline constexpr std::string_view kPy1GivenX1 = "P(Y=1|X=1)";

struct CausalQuery {
  QueryType type = QueryType::kAte;
  Polarity polarity = Polarity::kIncrease;
  // ate/nie: both keys. conditional: exactly one key, which fixes the
  // conditioning value of X.
  std::map<std::string, double, std::less<>> given_data;
};

struct Estimand {
  std::string text;  // e.g. "P(Y=1|X=1) - P(Y=1|X=0)"
  double estimate = 0.0;
};

// Throws kMissingDataField when given_data lacks a key the query type needs.
Estimand compute_estimand(const CausalQuery& query);

// Quantity whose sign decides the answer: the estimate itself for effects,
// estimate - 0.5 for conditional probabilities.
double decision_margin(const CausalQuery& query, double estimate);

// Yes iff (increase and margin > 0) or (decrease and margin < 0).
Answer decide_answer(double margin, Polarity polarity);

std::string render_prompt(const CausalStory& story, const CausalQuery& query);
std::string render_causalcot_trace(const CausalStory& story, const CausalQuery& query, const Estimand& estimand);

// [name, set, unset] per node, X first.
std::vector<std::string> story_events(const CausalStory& story);

const std::vector<CausalStory>& commonsense_pool();
// Every name and description in the commonsense pool.
std::vector<std::string> pool_event_strings();
// Fixed prompt/trace vocabulary; nonsense names never collide with it.
const std::vector<std::string>& template_words();

// Lowercase a-z, length 3..6, outside the lexicon and template vocabulary,
// and not in `taken`.
std::string nonsense_name(SplitMix64& rng, const std::vector<std::string>& taken = {});

struct GeneratedCladder {
  ReasoningItem item;
  CausalStory story;
  CausalQuery query;
  Estimand estimand;
};

// Deterministic in (seed, graph, split). Query structure and numbers come
// from `seed` alone so the three splits of one seed share their logic; the
// events come from a stream derived from (seed, split).
GeneratedCladder generate_cladder(std::uint64_t seed, GraphTemplate graph, Split split);
ReasoningItem generate_cladder_item(std::uint64_t seed, GraphTemplate graph, Split split);

// n items per split, ids "cladder-<split>-<index>", ordered by id. The graph
// template alternates with the seed unless `graph` is given.
std::vector<ReasoningItem> generate_cladder_batch(std::size_t n, std::uint64_t seed, const std::vector<Split>& splits,
                                                  std::optional<GraphTemplate> graph = std::nullopt);

}  // namespace capt::cladder
