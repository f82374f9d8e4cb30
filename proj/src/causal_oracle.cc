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

#include "capt/causal_oracle.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "capt/error.h"
#include "capt/resources.h"
#include "capt/text.h"

namespace capt::cladder {
namespace {

constexpr std::string_view kOpening =
    "Imagine a self-contained, hypothetical world with only the following conditions, and without any "
    "unmentioned factors or causal relationships: ";
constexpr std::string_view kDirectEffect = " has a direct effect on ";
constexpr std::string_view kLegend = "Each variable is binary: ";
constexpr std::string_view kDataLine = "For cases where {}, the probability that {} is {}%.";
constexpr std::string_view kAteQuestion = "If we intervene so that {}, does the chance that {} {}?";
constexpr std::string_view kNieQuestion =
    "Considering only the effect mediated by {}, does the chance that {} {} when {}?";
constexpr std::string_view kConditionalQuestion = "Given that {}, is the chance that {} {} 50%?";

constexpr std::string_view kTraceStep5 =
    "Step 5) Deduce the estimand using causal inference: We use causal inference to derive the estimand "
    "implied by the causal graph for the query type";

NodeEvent node(std::string name, std::string set, std::string unset) {
  return {std::move(name), std::move(set), std::move(unset)};
}

std::vector<CausalStory> build_pool() {
  auto story = [](NodeEvent x, NodeEvent v2, NodeEvent y) {
    CausalStory s;
    s.nodes = {std::move(x), std::move(v2), std::move(y)};
    return s;
  };
  return {
      story(node("husband", "husband sets the alarm", "husband does not set the alarm"),
            node("wife", "wife affects the alarm", "wife does not affect the alarm"),
            node("alarm clock", "alarm rings", "alarm does not ring")),
      story(node("smoking", "the person smokes", "the person does not smoke"),
            node("tar deposit", "tar builds up in the lungs", "no tar builds up in the lungs"),
            node("lung cancer", "lung cancer develops", "lung cancer does not develop")),
      story(node("rain", "it rains", "it does not rain"), node("wet road", "the road gets wet", "the road stays dry"),
            node("car crash", "a car crashes", "no car crashes")),
      story(node("vaccination", "the child is vaccinated", "the child is not vaccinated"),
            node("immunity", "antibodies form", "antibodies do not form"),
            node("infection", "the child gets infected", "the child stays healthy")),
      story(node("fertilizer", "the farmer spreads fertilizer", "the farmer spreads no fertilizer"),
            node("plant growth", "the plants grow tall", "the plants stay short"),
            node("harvest", "the harvest is large", "the harvest is small")),
      story(node("studying", "the student studies", "the student does not study"),
            node("exam score", "the exam score is high", "the exam score is low"),
            node("scholarship", "the student wins a scholarship", "the student gets no scholarship")),
      story(node("exercise", "the person exercises", "the person does not exercise"),
            node("heart health", "the heart is strong", "the heart is weak"),
            node("longevity", "the person lives long", "the person dies young")),
      story(node("traffic", "traffic is heavy", "traffic is light"),
            node("commute", "the commute is long", "the commute is short"),
            node("lateness", "the worker arrives late", "the worker arrives on time")),
      story(node("sunshine", "the sun shines", "the sun does not shine"),
            node("temperature", "the air is warm", "the air is cold"),
            node("ice melt", "the ice melts", "the ice stays frozen")),
      story(node("coffee", "the employee drinks coffee", "the employee skips coffee"),
            node("alertness", "the employee feels alert", "the employee feels drowsy"),
            node("productivity", "the work gets done", "the work piles up")),
      story(node("storm", "a storm hits", "no storm hits"),
            node("power outage", "the power goes out", "the power stays on"),
            node("spoiled food", "the food spoils", "the food stays fresh")),
      story(node("advertising", "the shop advertises", "the shop does not advertise"),
            node("shop visit", "customers visit the shop", "customers stay away"),
            node("revenue", "revenue rises", "revenue falls")),
  };
}

double need(const CausalQuery& q, std::string_view key) {
  auto it = q.given_data.find(key);
  if (it == q.given_data.end()) {
    throw Error(ErrorKind::kMissingDataField, fmt::format("given_data lacks {}", key));
  }
  return it->second;
}

// Conditioning value of X for a conditional query.
int conditional_x(const CausalQuery& q) {
  if (q.given_data.size() != 1) {
    throw Error(ErrorKind::kMissingDataField, "conditional query needs exactly one given probability");
  }
  const auto& key = q.given_data.begin()->first;
  if (key == kPy1GivenX0) return 0;
  if (key == kPy1GivenX1) return 1;
  throw Error(ErrorKind::kMissingDataField, fmt::format("unexpected given_data key {}", key));
}

std::string percent(double p) { return fmt::format("{}", static_cast<int>(std::lround(p * 100.0))); }

std::string verb(Polarity p) { return p == Polarity::kIncrease ? "increase" : "decrease"; }

}  // namespace

std::string_view to_string(GraphTemplate t) { return t == GraphTemplate::kChain ? "chain" : "mediation"; }

std::string_view to_string(QueryType q) {
  switch (q) {
    case QueryType::kAte:
      return "ate";
    case QueryType::kNie:
      return "nie";
    case QueryType::kConditional:
      return "conditional";
  }
  return "unknown";
}

GraphTemplate template_from_string(std::string_view s) {
  if (s == "chain") return GraphTemplate::kChain;
  if (s == "mediation") return GraphTemplate::kMediation;
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown graph template '{}'", s));
}

std::string_view query_type_label(QueryType q) {
  switch (q) {
    case QueryType::kAte:
      return "average treatment effect";
    case QueryType::kNie:
      return "natural indirect effect";
    case QueryType::kConditional:
      return "conditional probability";
  }
  return "unknown";
}

Estimand compute_estimand(const CausalQuery& query) {
  if (query.type == QueryType::kConditional) {
    const int x = conditional_x(query);
    return {fmt::format("P(Y=1|X={})", x), query.given_data.begin()->second};
  }
  // ate with exogenous X and nie on a chain share the same estimand.
  const double p1 = need(query, kPy1GivenX1);
  const double p0 = need(query, kPy1GivenX0);
  return {"P(Y=1|X=1) - P(Y=1|X=0)", p1 - p0};
}

double decision_margin(const CausalQuery& query, double estimate) {
  return query.type == QueryType::kConditional ? estimate - 0.5 : estimate;
}

Answer decide_answer(double margin, Polarity polarity) {
  const bool yes = polarity == Polarity::kIncrease ? margin > 0.0 : margin < 0.0;
  return yes ? Answer::kYes : Answer::kNo;
}

std::vector<std::string> story_events(const CausalStory& story) {
  std::vector<std::string> out;
  for (const auto& n : story.nodes) {
    out.push_back(n.name);
    out.push_back(n.set_description);
    out.push_back(n.unset_description);
  }
  return out;
}

std::string render_prompt(const CausalStory& story, const CausalQuery& query) {
  const auto& [x, v2, y] = story.nodes;
  std::string out(kOpening);
  if (story.graph == GraphTemplate::kMediation) {
    out += fmt::format("{}{}{} and {}. ", text::capitalize(x.name), kDirectEffect, v2.name, y.name);
  } else {
    out += fmt::format("{}{}{}. ", text::capitalize(x.name), kDirectEffect, v2.name);
  }
  out += fmt::format("{}{}{}. ", text::capitalize(v2.name), kDirectEffect, y.name);
  out += kLegend;
  std::vector<std::string> legend;
  for (const auto& n : story.nodes)
    legend.push_back(fmt::format("either {} or {}", n.set_description, n.unset_description));
  out += text::join(legend, "; ");
  out += ". ";
  for (const auto& [key, p] : query.given_data) {
    const auto& cond = key == kPy1GivenX1 ? x.set_description : x.unset_description;
    out += fmt::format(fmt::runtime(kDataLine), cond, y.set_description, percent(p));
    out += ' ';
  }
  switch (query.type) {
    case QueryType::kAte:
      out += fmt::format(fmt::runtime(kAteQuestion), x.set_description, y.set_description, verb(query.polarity));
      break;
    case QueryType::kNie:
      out +=
          fmt::format(fmt::runtime(kNieQuestion), v2.name, y.set_description, verb(query.polarity), x.set_description);
      break;
    case QueryType::kConditional: {
      const auto& cond = conditional_x(query) == 1 ? x.set_description : x.unset_description;
      out += fmt::format(fmt::runtime(kConditionalQuestion), cond, y.set_description,
                         query.polarity == Polarity::kIncrease ? "above" : "below");
      break;
    }
  }
  return out;
}

std::string render_causalcot_trace(const CausalStory& story, const CausalQuery& query, const Estimand& est) {
  const auto& [x, v2, y] = story.nodes;
  std::string out = fmt::format("<think> Let X = {}; V2 = {}; Y = {}.\n\n", x.name, v2.name, y.name);
  out += fmt::format("Step 1) Extract the causal graph: {}.\n\n",
                     story.graph == GraphTemplate::kChain ? "X->V2, V2->Y" : "X->V2, X->Y, V2->Y");
  const auto label = query_type_label(query.type);
  out += fmt::format("Step 2) Determine the query type: \"{}\".\n\n", label);

  std::string formal;
  std::string data;
  std::string calculation;
  if (query.type == QueryType::kConditional) {
    const int cx = conditional_x(query);
    formal = fmt::format("P(Y=1 | X={})", cx);
    data = fmt::format("P(Y=1 | X={}) = {}", cx, text::format_2dp(est.estimate));
    calculation = text::format_2dp(est.estimate);
  } else {
    formal = query.type == QueryType::kAte ? "E[Y | do(X = 1)] - E[Y | do(X = 0)]" : "E[Y_{X=0, V2=1} - Y_{X=0, V2=0}]";
    const double p0 = need(query, kPy1GivenX0);
    const double p1 = need(query, kPy1GivenX1);
    data = fmt::format("P(Y=1 | X=0) = {}; P(Y=1 | X=1) = {}", text::format_2dp(p0), text::format_2dp(p1));
    calculation =
        fmt::format("{} - {} = {}", text::format_2dp(p1), text::format_2dp(p0), text::format_2dp(est.estimate));
  }
  out += fmt::format("Step 3) Formalize the query: {}.\n\n", formal);
  out += fmt::format("Step 4) Gather all relevant data: {}.\n\n", data);
  out += fmt::format("{} \"{}\":\n{}\n= {}\n\n", kTraceStep5, label, formal, est.text);
  out += fmt::format("Step 6) Calculate the estimate:\n{}\n= {}\n\n", est.text, calculation);

  const double margin = decision_margin(query, est.estimate);
  const Answer answer = decide_answer(margin, query.polarity);
  const std::string_view threshold = query.type == QueryType::kConditional ? "0.50" : "0";
  // Compare on the displayed cents so the sentence never contradicts itself.
  const long cents = std::lround(margin * 100.0);
  std::string comparison = text::format_2dp(est.estimate);
  if (cents > 0) {
    comparison += fmt::format(" > {}", threshold);
  } else if (cents < 0) {
    comparison += fmt::format(" < {}", threshold);
  }
  out += fmt::format("Since the estimate for the estimand is {}, the overall answer to the question is {}. </think>\n",
                     comparison, answer == Answer::kYes ? "yes" : "no");
  out += fmt::format("<answer> {} </answer>", to_string(answer));
  return out;
}

const std::vector<CausalStory>& commonsense_pool() {
  static const auto* pool = new std::vector<CausalStory>(build_pool());
  return *pool;
}

std::vector<std::string> pool_event_strings() {
  std::vector<std::string> out;
  for (const auto& s : commonsense_pool()) {
    for (auto& e : story_events(s)) out.push_back(std::move(e));
  }
  return out;
}

const std::vector<std::string>& template_words() {
  static const auto* words = [] {
    std::set<std::string> set;
    const std::string_view fixed[] = {
        kOpening,
        kDirectEffect,
        kLegend,
        kDataLine,
        kAteQuestion,
        kNieQuestion,
        kConditionalQuestion,
        kTraceStep5,
        "and either or increase decrease above below occurs does not occur",
        "Let Step Extract the causal graph Determine the query type Formalize the query Gather all relevant data",
        "Calculate the estimate Since the estimate for the estimand is the overall answer to the question is yes no",
        "average treatment effect natural indirect effect conditional probability think answer Yes No do",
    };
    for (auto frag : fixed) {
      std::string word;
      for (char c : std::string(frag) + " ") {
        if (text::is_word_char(c)) {
          word += text::ascii_lower(c);
        } else if (!word.empty()) {
          set.insert(word);
          word.clear();
        }
      }
    }
    return new std::vector<std::string>(set.begin(), set.end());
  }();
  return *words;
}

std::string nonsense_name(SplitMix64& rng, const std::vector<std::string>& taken) {
  const auto& reserved = template_words();
  return resources::nonsense_word(rng, [&](const std::string& w) {
    return std::find(reserved.begin(), reserved.end(), w) != reserved.end() ||
           std::find(taken.begin(), taken.end(), w) != taken.end();
  });
}

GeneratedCladder generate_cladder(std::uint64_t seed, GraphTemplate graph, Split split) {
  SplitMix64 rng(seed);
  CausalQuery query;
  const bool want_yes = rng.coin();
  query.polarity = rng.coin() ? Polarity::kIncrease : Polarity::kDecrease;
  if (graph == GraphTemplate::kChain) {
    const QueryType types[] = {QueryType::kAte, QueryType::kNie, QueryType::kConditional};
    query.type = types[rng.below(3)];
  } else {
    query.type = rng.coin() ? QueryType::kAte : QueryType::kConditional;
  }
  // Sign the decision margin must have for the chosen answer.
  const int sign = (want_yes == (query.polarity == Polarity::kIncrease)) ? 1 : -1;
  if (query.type == QueryType::kConditional) {
    int p;
    do {
      p = rng.range(2, 98);
    } while ((p - 50) * sign < 3);
    const int x = static_cast<int>(rng.below(2));
    query.given_data.emplace(x == 1 ? kPy1GivenX1 : kPy1GivenX0, p / 100.0);
  } else {
    int p0, p1;
    do {
      p0 = rng.range(2, 98);
      p1 = rng.range(2, 98);
    } while ((p1 - p0) * sign < 3);
    query.given_data.emplace(kPy1GivenX0, p0 / 100.0);
    query.given_data.emplace(kPy1GivenX1, p1 / 100.0);
  }

  CausalStory story;
  story.graph = graph;
  story.split = split;
  SplitMix64 ev(derive_seed(seed, to_string(split)));
  const auto& pool = commonsense_pool();
  switch (split) {
    case Split::kCommonsense:
      story.nodes = pool[ev.below(pool.size())].nodes;
      break;
    case Split::kAntisense: {
      // One node from each of three different stories, in shuffled roles:
      // no parent/child pair then matches a commonsense story.
      std::vector<std::size_t> idx(pool.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      ev.shuffle(std::span<std::size_t>(idx));
      for (std::size_t k = 0; k < 3; ++k) story.nodes[k] = pool[idx[k]].nodes[ev.below(3)];
      break;
    }
    case Split::kNonsense: {
      std::vector<std::string> taken;
      for (auto& n : story.nodes) {
        auto name = nonsense_name(ev, taken);
        taken.push_back(name);
        n = node(name, name + " occurs", name + " does not occur");
      }
      break;
    }
  }

  GeneratedCladder g;
  g.story = story;
  g.query = query;
  g.estimand = compute_estimand(query);
  auto& item = g.item;
  item.id = fmt::format("cladder-{}-{:016x}", to_string(split), seed);
  item.dataset = Dataset::kCladder;
  item.split = split;
  item.prompt = render_prompt(story, query);
  item.gold_cot = render_causalcot_trace(story, query, g.estimand);
  item.gold_answer = decide_answer(decision_margin(query, g.estimand.estimate), query.polarity);
  item.events = story_events(story);
  item.seed_trace = seed;
  return g;
}

ReasoningItem generate_cladder_item(std::uint64_t seed, GraphTemplate graph, Split split) {
  return generate_cladder(seed, graph, split).item;
}

std::vector<ReasoningItem> generate_cladder_batch(std::size_t n, std::uint64_t seed, const std::vector<Split>& splits,
                                                  std::optional<GraphTemplate> graph) {
  std::vector<ReasoningItem> out;
  for (Split split : splits) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto item_seed = derive_seed(seed, fmt::format("cladder/{}", i));
      const auto t = graph.value_or(i % 2 == 0 ? GraphTemplate::kMediation : GraphTemplate::kChain);
      auto item = generate_cladder_item(item_seed, t, split);
      item.id = fmt::format("cladder-{}-{:06}", to_string(split), i);
      out.push_back(std::move(item));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace capt::cladder
