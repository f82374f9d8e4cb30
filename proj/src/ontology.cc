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

#include "capt/ontology.h"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "capt/error.h"
#include "capt/resources.h"
#include "capt/rng.h"
#include "capt/text.h"

namespace capt::ontology {
namespace {

Category cat(std::string name, std::string parent, std::string domain, std::vector<std::string> has = {},
             std::vector<std::string> lacks = {}) {
  return {std::move(name), std::move(parent), std::move(has), std::move(lacks), std::move(domain)};
}

std::vector<Category> build_taxonomy() {
  const std::string life = "life", num = "number";
  return {
      cat("organism", "", life, {"living"}),
      cat("animal", "organism", life, {"multicellular"}, {"unicellular"}),
      cat("plant", "organism", life, {"photosynthetic"}, {"mobile"}),
      cat("bilaterian", "animal", life, {"symmetric"}),
      cat("chordate", "bilaterian", life),
      cat("vertebrate", "chordate", life, {"backboned"}),
      cat("invertebrate", "animal", life, {}, {"backboned"}),
      cat("mammal", "vertebrate", life, {"furry", "warm-blooded"}),
      cat("reptile", "vertebrate", life, {"cold-blooded"}),
      cat("bird", "vertebrate", life, {"feathered"}),
      cat("fish", "vertebrate", life, {"aquatic"}),
      cat("carnivore", "mammal", life, {}, {"herbivorous"}),
      cat("herbivore", "mammal", life, {"herbivorous"}),
      cat("cetacean", "mammal", life, {"aquatic"}),
      cat("feline", "carnivore", life, {"agile"}),
      cat("canine", "carnivore", life, {"loyal"}),
      cat("cat", "feline", life),
      cat("tabby", "cat", life, {"striped"}),
      cat("hound", "canine", life),
      cat("sheep", "herbivore", life, {"woolly"}),
      cat("whale", "cetacean", life, {"enormous"}),
      cat("snake", "reptile", life, {}, {"furry"}),
      cat("lizard", "reptile", life),
      cat("songbird", "bird", life, {"melodic"}),
      cat("sparrow", "songbird", life),
      cat("raptor", "bird", life, {"predatory"}),
      cat("eagle", "raptor", life),
      cat("salmon", "fish", life),
      cat("arthropod", "invertebrate", life, {"segmented"}),
      cat("insect", "arthropod", life, {"six-legged"}, {"eight-legged"}),
      cat("arachnid", "arthropod", life, {"eight-legged"}),
      cat("spider", "arachnid", life),
      cat("lepidopteran", "insect", life, {"winged"}),
      cat("butterfly", "lepidopteran", life),
      cat("monarch", "butterfly", life),
      cat("hymenopteran", "insect", life),
      cat("bee", "hymenopteran", life),
      cat("nematode", "invertebrate", life, {}, {"segmented"}),
      cat("mollusk", "invertebrate", life, {"soft-bodied"}),
      cat("snail", "mollusk", life),
      cat("flower", "plant", life, {"fragrant"}),
      cat("rose", "flower", life, {"thorny"}),
      cat("tree", "plant", life, {"woody"}),
      cat("oak", "tree", life, {"deciduous"}),
      cat("fern", "plant", life, {}, {"flowering"}),
      cat("number", "", num, {"abstract"}),
      cat("real number", "number", num, {"real"}),
      cat("imaginary number", "number", num, {}, {"real"}),
      cat("integer", "real number", num, {"whole"}),
      cat("fraction", "real number", num, {}, {"whole"}),
      cat("natural number", "integer", num, {"positive"}),
      cat("negative number", "real number", num, {}, {"positive"}),
      cat("prime number", "natural number", num, {}, {"composite"}),
      cat("composite number", "natural number", num, {"composite"}),
      cat("Mersenne prime", "prime number", num, {"odd"}),
  };
}

const std::map<std::string, std::vector<std::string>>& entity_names() {
  static const auto* names = new std::map<std::string, std::vector<std::string>>{
      {"life", {"Wren", "Max", "Polly", "Rex", "Fae", "Sally", "Alex", "Sam", "Stella", "Jack"}},
      {"number", {"127", "31", "8191", "131071", "2047", "511"}},
  };
  return *names;
}

const Category& find_category(const std::string& name) {
  for (const auto& c : taxonomy()) {
    if (c.name == name) return c;
  }
  throw Error(ErrorKind::kUnknownVariable, fmt::format("unknown category '{}'", name));
}

std::vector<std::string> ancestors_inclusive(const std::string& name) {
  std::vector<std::string> out;
  for (std::string cur = name; !cur.empty(); cur = find_category(cur).parent) out.push_back(cur);
  return out;
}

std::vector<Rule> rules_of(const Category& c) {
  std::vector<Rule> out;
  if (!c.parent.empty()) out.push_back({c.name, Relation::kIsA, c.parent});
  for (const auto& p : c.has) out.push_back({c.name, Relation::kHas, p});
  for (const auto& p : c.lacks) out.push_back({c.name, Relation::kLacks, p});
  return out;
}

bool same_rule(const Rule& a, const Rule& b) {
  return a.subject == b.subject && a.relation == b.relation && a.object == b.object;
}

std::string with_article(const std::string& noun) { return fmt::format("{} {}", text::indefinite_article(noun), noun); }

constexpr std::string_view kTemplateText =
    "Given facts Every Each is a an are not answer the question True or false Let's think about it step by "
    "step First we have So Therefore";

bool reserved_word(const std::string& w) {
  static const auto* words = [] {
    auto* set = new std::set<std::string>;
    for (const auto& part : text::split(kTemplateText, ' ')) set->insert(text::to_lower(part));
    return set;
  }();
  return words->contains(w);
}

}  // namespace

bool pluralizable(const std::string& word) {
  static const std::set<std::string> irregular = {"sheep", "fish", "salmon", "deer", "mouse", "person", "child"};
  // Only the last word inflects; "real number" -> "real numbers".
  const auto space = word.find_last_of(' ');
  const auto last = space == std::string::npos ? word : word.substr(space + 1);
  if (last.empty() || irregular.contains(last)) return false;
  for (std::string_view end : {"s", "x", "y", "z", "ch", "sh"}) {
    if (last.ends_with(end)) return false;
  }
  return true;
}

std::string render_fact(const Rule& r) {
  const bool plural = r.phrasing == Phrasing::kPlural;
  std::string out = plural ? text::capitalize(r.subject) + "s are "
                           : fmt::format("{} {} is ", r.phrasing == Phrasing::kEach ? "Each" : "Every", r.subject);
  switch (r.relation) {
    case Relation::kIsA:
      out += plural ? r.object + "s" : with_article(r.object);
      break;
    case Relation::kHas:
      out += r.object;
      break;
    case Relation::kLacks:
      out += "not " + r.object;
      break;
  }
  return out + ".";
}

std::string render_prompt(const std::vector<Rule>& facts, const StartFact& start, const Query& query) {
  std::vector<std::string> sentences;
  for (const auto& f : facts) sentences.push_back(render_fact(f));
  return fmt::format("Given facts: {}\n\nGiven {} is {}, answer the question: True or false: {} is {}{}.",
                     text::join(sentences, " "), start.entity, with_article(start.category), query.entity,
                     query.negated ? "not " : "", query.predicate);
}

std::string render_chain_trace(const StartFact& start, const std::vector<Rule>& chain, Answer answer) {
  std::string out = fmt::format("<think> Let's think about it step by step. First, we have {} is {}.\n\n", start.entity,
                                with_article(start.category));
  for (const auto& r : chain) {
    std::string conclusion = r.relation == Relation::kIsA   ? with_article(r.object)
                             : r.relation == Relation::kHas ? r.object
                                                            : "not " + r.object;
    out += fmt::format("{} So {} is {}.\n\n", render_fact(r), start.entity, conclusion);
  }
  out +=
      fmt::format("Therefore, the answer is {}. </think>\n<answer> {} </answer>", to_string(answer), to_string(answer));
  return out;
}

Answer derive_answer(const std::vector<Rule>& rules, const StartFact& start, const Query& query) {
  std::set<std::string> categories{start.category};
  std::set<std::string> positive, negative;
  std::vector<std::string> work{start.category};
  while (!work.empty()) {
    const auto c = work.back();
    work.pop_back();
    for (const auto& r : rules) {
      if (r.subject != c) continue;
      switch (r.relation) {
        case Relation::kIsA:
          if (categories.insert(r.object).second) work.push_back(r.object);
          break;
        case Relation::kHas:
          positive.insert(r.object);
          break;
        case Relation::kLacks:
          negative.insert(r.object);
          break;
      }
    }
  }
  const bool pos = categories.contains(query.predicate) || positive.contains(query.predicate);
  const bool neg = negative.contains(query.predicate);
  if (pos == neg) {
    throw Error(ErrorKind::kUndecidableQuery,
                pos ? fmt::format("closure contains both {} and its negation", query.predicate)
                    : fmt::format("closure decides nothing about {}", query.predicate));
  }
  return pos != query.negated ? Answer::kTrue : Answer::kFalse;
}

const std::vector<Category>& taxonomy() {
  static const auto* t = new std::vector<Category>(build_taxonomy());
  return *t;
}

std::vector<std::string> pool_event_strings() {
  std::set<std::string> out;
  for (const auto& c : taxonomy()) {
    out.insert(c.name);
    out.insert(c.has.begin(), c.has.end());
    out.insert(c.lacks.begin(), c.lacks.end());
  }
  for (const auto& [domain, names] : entity_names()) out.insert(names.begin(), names.end());
  return {out.begin(), out.end()};
}

const std::vector<std::pair<std::string, std::string>>& commonsense_pairs() {
  static const auto* pairs = [] {
    std::set<std::pair<std::string, std::string>> set;
    for (const auto& c : taxonomy()) {
      for (const auto& a : ancestors_inclusive(c.name)) {
        set.emplace(c.name, a);
        const auto& ac = find_category(a);
        for (const auto& p : ac.has) set.emplace(c.name, p);
        for (const auto& p : ac.lacks) set.emplace(c.name, p);
      }
    }
    return new std::vector<std::pair<std::string, std::string>>(set.begin(), set.end());
  }();
  return *pairs;
}

GeneratedOntology generate_prontoqa(std::uint64_t seed, const ChainSpec& spec, Split split) {
  if (spec.hops < 1) throw Error(ErrorKind::kInvalidArgument, "hops must be at least 1");
  if (spec.distractors < 0) throw Error(ErrorKind::kInvalidArgument, "distractors must be non-negative");
  SplitMix64 rng(seed);
  const auto& tax = taxonomy();

  // Start categories with an ancestor hops-1 levels up that carries a property.
  std::vector<std::vector<std::string>> candidates;
  for (const auto& c : tax) {
    auto path = ancestors_inclusive(c.name);
    if (static_cast<int>(path.size()) < spec.hops) continue;
    path.resize(static_cast<std::size_t>(spec.hops));
    const auto& top = find_category(path.back());
    if (!top.has.empty() || !top.lacks.empty()) candidates.push_back(std::move(path));
  }
  if (candidates.empty()) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("no chain of {} hops in the taxonomy", spec.hops));
  }
  const auto path = candidates[rng.below(candidates.size())];
  const auto& top = find_category(path.back());
  std::vector<Rule> property_rules;
  for (const auto& r : rules_of(top)) {
    if (r.relation != Relation::kIsA) property_rules.push_back(r);
  }
  const Rule closing = property_rules[rng.below(property_rules.size())];

  std::vector<Rule> chain;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) chain.push_back({path[i], Relation::kIsA, path[i + 1]});
  chain.push_back(closing);

  // Distractors never touch the query property on a category the entity
  // can reach, so removing them cannot change the answer.
  const auto reachable = ancestors_inclusive(path.front());
  const auto& domain = find_category(path.front()).domain;
  std::vector<Rule> near, far;
  for (const auto& c : tax) {
    for (const auto& r : rules_of(c)) {
      if (std::any_of(chain.begin(), chain.end(), [&](const Rule& x) { return same_rule(x, r); })) continue;
      const bool on_path = std::find(reachable.begin(), reachable.end(), r.subject) != reachable.end();
      if (on_path && r.relation != Relation::kIsA && r.object == closing.object) continue;
      (c.domain == domain ? near : far).push_back(r);
    }
  }
  rng.shuffle(std::span<Rule>(near));
  rng.shuffle(std::span<Rule>(far));
  std::vector<Rule> distractors;
  for (auto* pool : {&near, &far}) {
    for (const auto& r : *pool) {
      if (static_cast<int>(distractors.size()) == spec.distractors) break;
      distractors.push_back(r);
    }
  }
  if (static_cast<int>(distractors.size()) < spec.distractors) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("taxonomy has fewer than {} distractors", spec.distractors));
  }

  std::vector<Rule> facts = chain;
  facts.insert(facts.end(), distractors.begin(), distractors.end());
  const std::size_t h = chain.size();
  auto chain_contiguous = [&] {
    for (std::size_t i = 0; i + h <= facts.size(); ++i) {
      bool all = true;
      for (std::size_t k = 0; k < h && all; ++k) all = same_rule(facts[i + k], chain[k]);
      if (all) return true;
    }
    return false;
  };
  do {
    rng.shuffle(std::span<Rule>(facts));
  } while (h >= 3 && facts.size() > 1 && chain_contiguous());

  // One phrasing draw per fact, resolved after relabeling.
  std::vector<std::uint64_t> phrasing_draw(facts.size());
  for (auto& d : phrasing_draw) d = rng.below(3);
  const bool negated = spec.negated_query;
  std::string entity = spec.entity_name;
  if (entity.empty()) {
    const auto& names = entity_names().at(domain);
    entity = names[rng.below(names.size())];
  }

  // Relabeling for the split.
  SplitMix64 ev(derive_seed(seed, to_string(split)));
  std::set<std::string> cat_names, prop_names;
  for (const auto& r : facts) {
    cat_names.insert(r.subject);
    (r.relation == Relation::kIsA ? cat_names : prop_names).insert(r.object);
  }
  std::map<std::string, std::string> relabel;
  if (split == Split::kAntisense) {
    std::vector<std::string> all;
    for (const auto& c : tax) all.push_back(c.name);
    const auto& pairs = commonsense_pairs();
    const std::set<std::pair<std::string, std::string>> known(pairs.begin(), pairs.end());
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw Error(ErrorKind::kInvalidArgument, "no anti-sense relabeling found");
      auto shuffled = all;
      ev.shuffle(std::span<std::string>(shuffled));
      relabel.clear();
      bool ok = true;
      for (std::size_t i = 0; i < all.size(); ++i) {
        relabel[all[i]] = shuffled[i];
        if (cat_names.contains(all[i]) && shuffled[i] == all[i]) ok = false;
      }
      for (const auto& r : facts) {
        if (!ok) break;
        const auto obj = r.relation == Relation::kIsA ? relabel[r.object] : r.object;
        if (known.contains({relabel[r.subject], obj})) ok = false;
      }
      if (ok) break;
    }
  } else if (split == Split::kNonsense) {
    std::vector<std::string> taken;
    auto fresh = [&] {
      auto w = resources::nonsense_word(ev, [&](const std::string& cand) {
        if (reserved_word(cand)) return true;
        for (const auto& t : taken) {
          // A word equal to another plus "s" would make plurals ambiguous.
          if (cand == t || cand == t + "s" || t == cand + "s") return true;
        }
        return false;
      });
      taken.push_back(w);
      return w;
    };
    for (const auto& n : cat_names) relabel[n] = fresh();
    for (const auto& n : prop_names) relabel[n] = fresh();
  }
  auto map_name = [&](const std::string& n) {
    auto it = relabel.find(n);
    return it == relabel.end() ? n : it->second;
  };
  auto map_rule = [&](Rule r, std::uint64_t draw) {
    r.subject = map_name(r.subject);
    if (r.relation == Relation::kIsA || split == Split::kNonsense) r.object = map_name(r.object);
    const bool plural_ok = pluralizable(r.subject) && (r.relation != Relation::kIsA || pluralizable(r.object));
    r.phrasing = draw == 2 && plural_ok ? Phrasing::kPlural : draw == 1 ? Phrasing::kEach : Phrasing::kEvery;
    return r;
  };

  GeneratedOntology g;
  for (std::size_t i = 0; i < facts.size(); ++i) g.facts.push_back(map_rule(facts[i], phrasing_draw[i]));
  for (const auto& c : chain) {
    for (const auto& f : g.facts) {
      if (f.relation == c.relation && f.subject == map_name(c.subject) &&
          f.object == (c.relation == Relation::kIsA || split == Split::kNonsense ? map_name(c.object) : c.object)) {
        g.chain.push_back(f);
        break;
      }
    }
  }
  for (const auto& f : g.facts) {
    if (std::none_of(g.chain.begin(), g.chain.end(), [&](const Rule& c) { return same_rule(c, f); })) {
      g.distractors.push_back(f);
    }
  }
  g.start = {entity, map_name(path.front())};
  g.query = {entity, g.chain.back().object, negated};
  const Answer answer = derive_answer(g.facts, g.start, g.query);

  auto& item = g.item;
  item.id = fmt::format("prontoqa-{}-{:016x}", to_string(split), seed);
  item.dataset = Dataset::kProntoqa;
  item.split = split;
  item.prompt = render_prompt(g.facts, g.start, g.query);
  item.gold_cot = render_chain_trace(g.start, g.chain, answer);
  item.gold_answer = answer;
  item.seed_trace = seed;
  item.events.push_back(entity);
  for (const auto& f : g.facts) {
    for (const auto* n : {&f.subject, &f.object}) {
      if (std::find(item.events.begin(), item.events.end(), *n) == item.events.end()) item.events.push_back(*n);
    }
  }
  return g;
}

ReasoningItem generate_prontoqa_item(std::uint64_t seed, const ChainSpec& spec, Split split) {
  return generate_prontoqa(seed, spec, split).item;
}

std::vector<ReasoningItem> generate_prontoqa_batch(std::size_t n, std::uint64_t seed, const std::vector<Split>& splits,
                                                   const BatchOptions& options) {
  if (options.min_hops < 1 || options.max_hops < options.min_hops || options.min_distractors < 0 ||
      options.max_distractors < options.min_distractors) {
    throw Error(ErrorKind::kInvalidArgument, "invalid hop or distractor range");
  }
  std::vector<ReasoningItem> out;
  for (Split split : splits) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto item_seed = derive_seed(seed, fmt::format("prontoqa/{}", i));
      SplitMix64 spec_rng(derive_seed(item_seed, "spec"));
      ChainSpec spec;
      spec.hops = spec_rng.range(options.min_hops, options.max_hops);
      spec.distractors = spec_rng.range(options.min_distractors, options.max_distractors);
      spec.negated_query = spec_rng.coin();
      auto item = generate_prontoqa_item(item_seed, spec, split);
      item.id = fmt::format("prontoqa-{}-{:06}", to_string(split), i);
      out.push_back(std::move(item));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace capt::ontology
