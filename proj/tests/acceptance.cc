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

// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "capt/causal_oracle.h"
#include "capt/dataset_emitter.h"
#include "capt/error.h"
#include "capt/eval_harness.h"
#include "capt/mock_endpoint.h"
#include "capt/ontology.h"
#include "capt/resources.h"
#include "capt/rng.h"
#include "capt/scm.h"
#include "capt/symbolizer.h"
#include "capt/text.h"
#include "fixtures.h"
#include "oracles/brute_force.h"
#include "oracles/fixpoint.h"
#include "oracles/mutations.h"
#include "oracles/stem_scan.h"
#include "test_util.h"
#include "worked_prontoqa.h"

namespace capt::acceptance {
namespace {

// Pinned tolerances and budgets.
constexpr double kIdentityTol = 1e-10;
constexpr double kConfounderGap = 0.01;
constexpr std::uint64_t kPinnedFig1bSeed = 0;
constexpr double kEstimandTol = 1e-12;
constexpr double kStdTol = 0.01;
constexpr std::size_t kScmSeeds = 200;
constexpr std::size_t kItemsPerDataset = 1000;
constexpr std::size_t kMutations = 500;
constexpr std::size_t kDeriveItems = 2000;

struct Outcome {
  std::vector<std::string> failures;
  std::string summary;

  void require(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  int failed = 0;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<void(Outcome&)> body;
};

const std::vector<Split> kSplits(std::begin(kAllSplits), std::end(kAllSplits));

// Brute-force max over (x, y) of |P(y|x) - sum_s P(y|s) P(s|x)|.
double oracle_confounder_gap(const scm::DiscreteScm& m) {
  const auto& g = m.graph();
  auto arity = [&](const char* n) { return g.nodes()[static_cast<std::size_t>(g.index_of(n))].arity; };
  double gap = 0.0;
  for (int x = 0; x < arity("X"); ++x) {
    for (int y = 0; y < arity("Y"); ++y) {
      double naive = 0.0;
      for (int s = 0; s < arity("S"); ++s) {
        naive += oracle::cond(m, {{"Y", y}}, {{"S", s}}) * oracle::cond(m, {{"S", s}}, {{"X", x}});
      }
      gap = std::max(gap, std::abs(oracle::cond(m, {{"Y", y}}, {{"X", x}}) - naive));
    }
  }
  return gap;
}

void scm_identities(Outcome& o) {
  const std::vector<std::pair<scm::Shape, std::string>> cases = {
      {scm::Shape::kFig1a, "mediated_factorization"},
      {scm::Shape::kFig1b, "confounded_structural"},
      {scm::Shape::kFig1d, "uniform_event_adjustment"},
  };
  std::vector<std::string> parts;
  for (const auto& [shape, identity] : cases) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < kScmSeeds; ++seed) {
      const auto [m, roles] = scm::make_random_scm(shape, seed);
      const auto report = scm::verify_capt_identities(m, roles);
      const auto* check = report.find(identity);
      o.require(check != nullptr, fmt::format("{} seed {}: {} not reported", to_string(shape), seed, identity));
      if (check) worst = std::max(worst, check->max_discrepancy);
    }
    o.require(worst <= kIdentityTol, fmt::format("{} {} max {:.3e}", to_string(shape), identity, worst));
    parts.push_back(fmt::format("{} {:.1e}", to_string(shape), worst));
  }
  const auto [m, roles] = scm::make_random_scm(scm::Shape::kFig1b, kPinnedFig1bSeed);
  const double gap = oracle_confounder_gap(m);
  const auto reported = scm::verify_capt_identities(m, roles).confounder_gap;
  o.require(gap > kConfounderGap, fmt::format("fig1b seed {} gap {:.4f}", kPinnedFig1bSeed, gap));
  o.require(reported && std::abs(*reported - gap) <= 1e-12, "reported confounder gap differs from brute force");
  o.summary = fmt::format("{} seeds/shape, worst {}; fig1b seed {} gap {:.4f}", kScmSeeds, fmt::join(parts, ", "),
                          kPinnedFig1bSeed, gap);
}

void cladder_oracle(Outcome& o) {
  using cladder::Polarity;
  using cladder::QueryType;
  const auto ate = cladder::compute_estimand(test::two_point(QueryType::kAte, Polarity::kIncrease, 0.42, 0.51));
  const auto nie = cladder::compute_estimand(test::two_point(QueryType::kNie, Polarity::kDecrease, 0.48, 0.36));
  o.require(std::abs(ate.estimate - 0.09) <= kEstimandTol, fmt::format("ATE {:.17g}", ate.estimate));
  o.require(std::abs(nie.estimate + 0.12) <= kEstimandTol, fmt::format("NIE {:.17g}", nie.estimate));
  o.require(cladder::decide_answer(ate.estimate, Polarity::kIncrease) == Answer::kYes, "ATE answer");
  o.require(cladder::decide_answer(nie.estimate, Polarity::kDecrease) == Answer::kYes, "NIE answer");
  for (const auto& t : test::worked_cladder_traces()) {
    o.require(t.response.ends_with("<answer> Yes </answer>"), "reference trace does not answer Yes");
  }
  o.summary = fmt::format("ATE {:.2f}, NIE {:.2f}, both Yes", ate.estimate, nie.estimate);
}

void std_regression(Outcome& o) {
  const auto lines = read_lines(test::data_path("reference_std_rows.csv"));
  std::size_t rows = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = text::split(lines[i], ',');
    const std::array<double, 3> acc = {std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
    const double got = eval::sample_std(acc);
    const double diff = std::abs(got - std::stod(f[5]));
    worst = std::max(worst, diff);
    o.require(diff <= kStdTol, fmt::format("{} {}: {:.4f} vs {}", f[0], f[1], got, f[5]));
    ++rows;
  }
  o.require(rows == 14, fmt::format("{} reference rows", rows));
  o.summary = fmt::format("{} rows, worst |diff| {:.4f}", rows, worst);
}

void golden_traces(Outcome& o) {
  using cladder::Polarity;
  using cladder::QueryType;
  const auto goldens = test::worked_cladder_traces();
  const std::array<std::pair<cladder::CausalStory, cladder::CausalQuery>, 2> cladder_cases = {{
      {test::alarm_story(), test::two_point(QueryType::kAte, Polarity::kIncrease, 0.42, 0.51)},
      {test::rixq_story(), test::two_point(QueryType::kNie, Polarity::kDecrease, 0.48, 0.36)},
  }};
  int matched = 0;
  for (std::size_t i = 0; i < cladder_cases.size(); ++i) {
    const auto& [story, q] = cladder_cases[i];
    const bool response =
        cladder::render_causalcot_trace(story, q, cladder::compute_estimand(q)) == goldens[i].response;
    const bool reasoning =
        symbolizer::symbolize_deterministic(test::worked_cladder_item(static_cast<int>(i))).cot.text ==
        goldens[i].reasoning;
    o.require(response, fmt::format("cladder example {} response", i));
    o.require(reasoning, fmt::format("cladder example {} reasoning", i));
    matched += response + reasoning;
  }
  const auto doc = nlohmann::json::parse(resources::prontoqa_in_context_json());
  const auto worked = test::worked_examples();
  o.require(doc.size() == worked.size(), "in-context example count");
  for (std::size_t i = 0; i < worked.size() && i < doc.size(); ++i) {
    const auto& w = worked[i];
    const bool response = ontology::render_chain_trace(w.start, w.chain, w.answer) == doc[i].at("response");
    o.require(response, fmt::format("prontoqa example {} response", i));
    matched += response;
  }
  o.summary = fmt::format("{}/{} texts byte-exact (cladder response and reasoning, prontoqa response)", matched,
                          2 * cladder_cases.size() + worked.size());
}

std::vector<ReasoningItem> thousand(Dataset d) {
  const std::size_t per_split = (kItemsPerDataset + 2) / 3;
  auto items = d == Dataset::kCladder ? cladder::generate_cladder_batch(per_split, 2026, kSplits)
                                      : ontology::generate_prontoqa_batch(per_split, 2026, kSplits, {1, 8, 0, 15});
  items.resize(kItemsPerDataset);
  return items;
}

void symbolization_properties(Outcome& o) {
  std::size_t round_trips = 0, bijections = 0, scanned = 0, caught = 0, mutations = 0;
  std::map<std::string, std::size_t> kinds;
  for (Dataset d : {Dataset::kCladder, Dataset::kProntoqa}) {
    const auto items = thousand(d);
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& item = items[i];
      const auto tx = symbolizer::symbolize_deterministic(item);
      const auto a = symbolizer::assign_letters(tx.table, CaptMode::kRandom, derive_seed(1, item.id));
      const auto b = symbolizer::assign_letters(tx.table, CaptMode::kRandom, derive_seed(2, item.id));
      const auto fa = symbolizer::apply_assignment(tx, a);
      const auto fb = symbolizer::apply_assignment(tx, b);

      // (a) round trip
      const bool rt =
          symbolizer::desymbolize(fa.prompt) == item.prompt && symbolizer::desymbolize(fa.cot) == item.gold_cot;
      o.require(rt, item.id + ": round trip");
      round_trips += rt;

      // (b) two random seeds differ only by a letter bijection
      std::set<std::string> codes;
      for (const auto& [ph, code] : a.mapping) codes.insert(code);
      const bool bij = codes.size() == tx.table.size() &&
                       symbolizer::related_by_letter_bijection(fa.prompt.text, fb.prompt.text) &&
                       symbolizer::related_by_letter_bijection(fa.cot.text, fb.cot.text);
      o.require(bij, item.id + ": seeds not related by a bijection");
      bijections += bij;

      // (c) no event of the item survives, by the regex oracle
      const bool clean =
          oracle::mentioned(fa.prompt.text, item.events).empty() && oracle::mentioned(fa.cot.text, item.events).empty();
      o.require(clean, item.id + ": event survives finalization");

      // (d) injected defects
      if (mutations < kMutations && i % 4 == 0) {
        const auto m = oracle::mutate(tx, mutations);
        const auto v = symbolizer::verify_symbolization(m.tx, item);
        const bool hit = std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.kind == m.expected_kind; });
        o.require(hit, fmt::format("{}: {} not caught", item.id, m.expected_kind));
        ++kinds[m.expected_kind];
        caught += hit;
        ++mutations;
      }
    }

    // (c) pool scan over the CAPT-mode emission
    emitter::EmitOptions opt;
    opt.mode = CaptMode::kRandom;
    opt.seed = 1;
    const auto emission = emitter::emit_sft(items, opt);
    const auto hits = emitter::scan_event_freedom(emission.records, items);
    o.require(hits.empty(), fmt::format("{} pool-event hits in {} output", hits.size(), to_string(d)));
    scanned += emission.records.size();
  }
  o.require(mutations == kMutations, fmt::format("{} mutations injected", mutations));
  o.require(kinds.size() >= 3, fmt::format("{} mutation kinds", kinds.size()));
  o.summary = fmt::format("round-trip {}/{}, bijection {}/{}, scanned {} records, mutations caught {}/{} ({} kinds)",
                          round_trips, 2 * kItemsPerDataset, bijections, 2 * kItemsPerDataset, scanned, caught,
                          mutations, kinds.size());
}

std::vector<ReasoningItem> prontoqa_suite(std::size_t comm, std::size_t anti, std::size_t non) {
  std::vector<ReasoningItem> items;
  for (auto [split, n] : {std::pair{Split::kCommonsense, comm}, {Split::kAntisense, anti}, {Split::kNonsense, non}}) {
    const auto part = ontology::generate_prontoqa_batch(n, 21, {split});
    items.insert(items.end(), part.begin(), part.end());
  }
  return items;
}

std::string flipped(Answer a) {
  switch (a) {
    case Answer::kYes:
      return "No";
    case Answer::kNo:
      return "Yes";
    case Answer::kTrue:
      return "False";
    case Answer::kFalse:
      return "True";
  }
  return "";
}

void harness_end_to_end(Outcome& o) {
  // Per split: first k items right, the rest wrong.
  const std::map<Split, std::size_t> right = {
      {Split::kCommonsense, 167}, {Split::kAntisense, 49}, {Split::kNonsense, 39}};
  const auto items = prontoqa_suite(200, 80, 50);
  mock::Script script;
  std::map<Split, std::size_t> seen;
  for (const auto& item : items) {
    const bool ok = seen[item.split]++ < right.at(item.split);
    script.add(item.id,
               {fmt::format("<answer> {} </answer>", ok ? to_string(item.gold_answer) : flipped(item.gold_answer))});
  }
  mock::MockEndpoint m(script);
  m.start();
  llm::EndpointConfig cfg;
  cfg.base_url = m.base_url();
  cfg.max_in_flight = 8;
  cfg.backoff_ms = 1;

  const auto report = eval::evaluate(cfg, items, {});
  // Expected values from the script alone: 167/200, 49/80, 39/50.
  const std::map<Split, double> expected = {
      {Split::kCommonsense, 83.50}, {Split::kAntisense, 61.25}, {Split::kNonsense, 78.00}};
  for (const auto& [split, acc] : expected) {
    o.require(report.score(split).accuracy == acc,
              fmt::format("{} accuracy {}", to_string(split), report.score(split).accuracy));
  }
  o.require(report.std == 11.59, fmt::format("std {}", report.std));

  const auto reqs = m.requests();
  std::map<std::string, const ReasoningItem*> by_id;
  for (const auto& item : items) by_id[item.id] = &item;
  std::size_t raw = 0;
  for (const auto& req : reqs) {
    raw += req.body.at("messages").back().at("content").get<std::string>() == by_id.at(req.item_id)->prompt;
  }
  o.require(raw == items.size() && reqs.size() == items.size(), fmt::format("{} raw null-mode prompts", raw));

  // Ablation grid on a mixed subset, then two random seeds from the logs.
  test::TempDir dir("acceptance");
  auto grid_items = cladder::generate_cladder_batch(10, 8, kSplits);
  const auto more = prontoqa_suite(10, 10, 10);
  grid_items.insert(grid_items.end(), more.begin(), more.end());
  script.add("*", {"<answer> Yes </answer>"});
  mock::MockEndpoint grid(script);
  grid.start();
  cfg.base_url = grid.base_url();
  const auto cells =
      eval::run_ablation(cfg, grid_items, {CaptMode::kNull, CaptMode::kOrder, CaptMode::kRandom}, {1, 2}, dir.path());
  o.require(cells.size() == 6, fmt::format("{} ablation cells", cells.size()));
  std::map<std::uint64_t, std::map<std::string, std::string>> random_prompts;
  for (const auto& c : cells) {
    if (c.mode != CaptMode::kRandom) continue;
    for (const auto& line : read_lines(c.report.log_dir / "requests.jsonl")) {
      const auto j = nlohmann::json::parse(line);
      random_prompts[c.seed][j.at("id")] = j.at("request").at("messages").back().at("content");
    }
  }
  std::size_t related = 0, differing = 0;
  for (const auto& [id, p1] : random_prompts[1]) {
    const auto it = random_prompts[2].find(id);
    const bool ok = it != random_prompts[2].end() && symbolizer::related_by_letter_bijection(p1, it->second);
    o.require(ok, id + ": random-seed prompts not related by a bijection");
    related += ok;
    differing += ok && p1 != it->second;
  }
  o.require(related == grid_items.size(), fmt::format("{} logged prompt pairs", related));
  o.require(differing > 0, "random seeds produced identical prompts");
  o.summary = fmt::format(
      "accuracies {:.2f}/{:.2f}/{:.2f} std {:.2f}; {} raw null prompts; {} cells; {}/{} seed "
      "pairs bijective",
      report.scores[0].accuracy, report.scores[1].accuracy, report.scores[2].accuracy, report.std, raw, cells.size(),
      related, grid_items.size());
}

void derive_answer_equivalence(Outcome& o) {
  SplitMix64 rng(2026);
  std::size_t agree = 0;
  std::map<int, std::size_t> by_hops;
  for (std::size_t i = 0; i < kDeriveItems; ++i) {
    ontology::ChainSpec spec;
    spec.hops = rng.range(1, 8);
    spec.distractors = rng.range(0, 15);
    spec.negated_query = rng.coin();
    const Split split = kAllSplits[rng.below(3)];
    const auto g = ontology::generate_prontoqa(rng.next(), spec, split);
    const auto expected =
        oracle::entails(test::to_triples(g.facts), g.start.category, g.query.predicate, g.query.negated);
    std::optional<Answer> got;
    try {
      got = ontology::derive_answer(g.facts, g.start, g.query);
    } catch (const Error&) {
    }
    const bool ok =
        expected && got && (*expected ? Answer::kTrue : Answer::kFalse) == *got && *got == g.item.gold_answer;
    o.require(ok, g.item.id + ": derive_answer disagrees with the fixpoint oracle");
    agree += ok;
    ++by_hops[spec.hops];
  }
  o.require(by_hops.size() == 8, "hop range not covered");
  o.summary = fmt::format("{}/{} agree, hops 1-8, distractors 0-15", agree, kDeriveItems);
}

}  // namespace
}  // namespace capt::acceptance

int main() {
  using namespace capt::acceptance;
  const std::vector<Criterion> criteria = {
      {"scm-identity-suite", 10, scm_identities},
      {"cladder-oracle-reproduction", 1, cladder_oracle},
      {"std-regression", 1, std_regression},
      {"golden-trace-reproduction", 1, golden_traces},
      {"symbolization-properties", 60, symbolization_properties},
      {"harness-end-to-end", 30, harness_end_to_end},
      {"derive-answer-equivalence", 30, derive_answer_equivalence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, fmt::format("exception: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_s, fmt::format("runtime {:.2f} s over budget", secs));
    const bool pass = o.failed == 0;
    failed += !pass;
    std::cout << fmt::format("{} {} ({:.2f} s / {:.0f} s): {}\n", pass ? "PASS" : "FAIL", c.name, secs, c.budget_s,
                             o.summary);
    for (const auto& f : o.failures) std::cout << "    " << f << "\n";
    if (o.failed > static_cast<int>(o.failures.size())) {
      std::cout << fmt::format("    ... {} more\n", o.failed - static_cast<int>(o.failures.size()));
    }
  }
  return failed == 0 ? 0 : 1;
}
