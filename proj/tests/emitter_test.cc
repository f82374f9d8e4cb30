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

#include <gtest/gtest.h>

#include <filesystem>

#include <fmt/format.h>

#include "capt/causal_oracle.h"
#include "capt/dataset_emitter.h"
#include "capt/error.h"
#include "capt/ontology.h"
#include "fixtures.h"
#include "oracles/stem_scan.h"
#include "test_util.h"

namespace capt::emitter {
namespace {

const std::vector<Split> kSplits(std::begin(kAllSplits), std::end(kAllSplits));

std::vector<ReasoningItem> mixed_items(std::size_t per_split) {
  auto items = cladder::generate_cladder_batch(per_split, 3, kSplits);
  const auto more = ontology::generate_prontoqa_batch(per_split, 3, kSplits, {1, 8, 0, 15});
  items.insert(items.end(), more.begin(), more.end());
  return items;
}

std::vector<std::string> ids_of(const std::vector<SftRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) out.push_back(r.id);
  return out;
}

std::string jsonl_of(const std::vector<SftRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / fmt::format("capt-emit-{}", ::getpid())) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

TEST(Emit, CotCompletionOnWorkedItem) {
  EmitOptions opt;
  opt.mode = CaptMode::kOrder;
  const auto e = emit_sft({test::worked_cladder_item(0)}, opt);
  ASSERT_EQ(e.records.size(), 1u);
  EXPECT_EQ(e.records[0].completion.rfind("<think> Step 1) Extract the causal graph", 0), 0u);
  EXPECT_EQ(e.records[0].completion, test::read_golden("cladder_ate_order.txt"));
}

TEST(Emit, AnswerOnlyIsBareToken) {
  const auto items = ontology::generate_prontoqa_batch(20, 5, {Split::kCommonsense});
  EmitOptions opt;
  opt.format = SftFormat::kAnswerOnly;
  for (const auto& r : emit_sft(items, opt).records) {
    EXPECT_TRUE(r.completion == "True" || r.completion == "False") << r.completion;
  }
  bool saw_true = false;
  for (const auto& item : items) {
    if (item.gold_answer != Answer::kTrue) continue;
    saw_true = true;
    EXPECT_EQ(emit_sft({item}, opt).records[0].completion, "True");
  }
  EXPECT_TRUE(saw_true);
}

TEST(Emit, PinnedSubsample) {
  const auto items = cladder::generate_cladder_batch(100, 0, kSplits);
  EmitOptions opt;
  opt.seed = 7;
  opt.n_samples = 100;
  const auto a = emit_sft(items, opt);
  std::string ids;
  for (const auto& id : ids_of(a.records)) ids += id + "\n";
  EXPECT_EQ(ids, test::read_golden("subsample_n100_seed7.txt"));
  const auto b = emit_sft(items, opt);
  EXPECT_EQ(jsonl_of(a.records), jsonl_of(b.records));
  EXPECT_EQ(a.manifest.dump(), b.manifest.dump());
  EXPECT_EQ(a.manifest.at("counts").at("records"), 100);
}

TEST(Emit, InputOrderIrrelevant) {
  auto items = mixed_items(10);
  EmitOptions opt;
  opt.seed = 11;
  opt.n_samples = 25;
  const auto a = emit_sft(items, opt);
  std::reverse(items.begin(), items.end());
  EXPECT_EQ(jsonl_of(a.records), jsonl_of(emit_sft(items, opt).records));
}

TEST(Emit, TooManySamples) {
  EmitOptions opt;
  opt.n_samples = 4;
  try {
    emit_sft(cladder::generate_cladder_batch(1, 0, kSplits), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(Emit, FormatsDifferOnlyInCompletions) {
  const auto items = mixed_items(15);
  for (CaptMode mode : {CaptMode::kNull, CaptMode::kOrder, CaptMode::kRandom}) {
    EmitOptions opt;
    opt.mode = mode;
    opt.seed = 9;
    const auto cot = emit_sft(items, opt);
    opt.format = SftFormat::kAnswerOnly;
    const auto ans = emit_sft(items, opt);
    ASSERT_EQ(cot.records.size(), ans.records.size());
    for (std::size_t i = 0; i < cot.records.size(); ++i) {
      auto r = cot.records[i];
      r.completion = ans.records[i].completion;
      EXPECT_EQ(r, ans.records[i]);
      EXPECT_NE(cot.records[i].completion, ans.records[i].completion);
    }
  }
}

TEST(Emit, NullModeKeepsRawText) {
  const auto items = mixed_items(5);
  const auto e = emit_sft(items, {SftFormat::kCot, CaptMode::kNull, 1, 0, 1});
  for (const auto& r : e.records) {
    const auto it = std::find_if(items.begin(), items.end(), [&](const auto& i) { return i.id == r.id; });
    ASSERT_NE(it, items.end());
    EXPECT_EQ(r.prompt, it->prompt);
    EXPECT_EQ(r.completion, it->gold_cot);
    EXPECT_EQ(r.assignment_seed, 0u);
  }
  EXPECT_FALSE(e.manifest.at("event_freedom").at("checked").get<bool>());
}

TEST(Emit, CaptOutputMentionsNoEvent) {
  const auto items = mixed_items(40);
  for (CaptMode mode : {CaptMode::kOrder, CaptMode::kRandom}) {
    EmitOptions opt;
    opt.mode = mode;
    const auto e = emit_sft(items, opt);
    EXPECT_EQ(e.manifest.at("event_freedom").at("violations"), 0);
    for (const auto& r : e.records) {
      auto words = pool_events(r.dataset);
      for (const auto& item : items) {
        if (item.id == r.id) words.insert(words.end(), item.events.begin(), item.events.end());
      }
      EXPECT_TRUE(oracle::mentioned(r.prompt, words).empty()) << r.id;
      EXPECT_TRUE(oracle::mentioned(r.completion, words).empty()) << r.id;
    }
    EXPECT_TRUE(validate_sft_text(jsonl_of(e.records)).empty());
  }
}

TEST(Emit, ResidualPoolEventIsFatal) {
  auto item = cladder::generate_cladder_batch(1, 0, {Split::kNonsense})[0];
  item.prompt += " The husband was asleep.";
  EmitOptions opt;
  opt.mode = CaptMode::kRandom;
  try {
    emit_sft({item}, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEventFreedomViolation);
    EXPECT_NE(std::string(e.what()).find("husband"), std::string::npos);
  }
}

TEST(Emit, CopiesGetFreshAssignments) {
  const auto items = ontology::generate_prontoqa_batch(4, 2, {Split::kCommonsense});
  EmitOptions opt;
  opt.reassign_per_copy = 3;
  const auto e = emit_sft(items, opt);
  ASSERT_EQ(e.records.size(), 12u);
  EXPECT_EQ(e.records[1].id, e.records[0].id + "#1");
  EXPECT_NE(e.records[0].assignment_seed, e.records[1].assignment_seed);
  EXPECT_TRUE(symbolizer::related_by_letter_bijection(e.records[0].prompt, e.records[2].prompt));
  EXPECT_TRUE(validate_sft_text(jsonl_of(e.records)).empty());
}

TEST(Emit, WritesManifestSidecar) {
  TempDir dir;
  const auto path = dir.path() / "train.jsonl";
  EXPECT_EQ(manifest_path(path), dir.path() / "train.manifest.json");
  EmitOptions opt;
  opt.seed = 4;
  opt.n_samples = 10;
  const auto e = emit_sft(mixed_items(5), opt);
  write_emission(path, e);
  EXPECT_TRUE(validate_sft(path).empty());
  const auto manifest = nlohmann::json::parse(read_text(manifest_path(path)));
  EXPECT_EQ(manifest, e.manifest);
  EXPECT_EQ(manifest.at("records").size(), 10u);
  EXPECT_EQ(manifest.at("seed"), 4);
  EXPECT_EQ(manifest.at("capt_mode"), "random");
}

TEST(Validate, Violations) {
  SftRecord ok{"a",
               "Is A true?",
               "<think> because </think>\n<answer> Yes </answer>",
               Dataset::kCladder,
               Split::kCommonsense,
               CaptMode::kOrder,
               1};
  EXPECT_TRUE(validate_sft_text(jsonl_of({ok})).empty());

  auto kinds = [](std::string_view text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    for (const auto& v : validate_sft_text(text)) out.emplace_back(v.line, v.kind);
    return out;
  };
  using Kinds = std::vector<std::pair<std::size_t, std::string>>;

  auto no_answer = ok;
  no_answer.completion = "<think> because </think>\nYes";
  EXPECT_EQ(kinds(jsonl_of({no_answer})), (Kinds{{1, "missing-answer-tag"}}));

  const auto line = to_json(ok).dump();
  EXPECT_EQ(kinds(jsonl_of({ok}) + line.substr(0, line.size() / 2) + "\n"), (Kinds{{2, "parse"}}));

  auto wrong_family = ok;
  wrong_family.completion = "True";
  EXPECT_EQ(kinds(jsonl_of({wrong_family})), (Kinds{{1, "invalid-answer"}}));

  auto second = ok;
  second.id = "b";
  second.completion = "No";
  EXPECT_EQ(kinds(jsonl_of({ok, ok, second})), (Kinds{{2, "duplicate-id"}, {3, "mixed-format"}}));

  auto leftover = ok;
  leftover.prompt = "Is {symbol_1} true?";
  EXPECT_EQ(kinds(jsonl_of({leftover})), (Kinds{{1, "unfinalized-placeholder"}}));
  leftover.capt_mode = CaptMode::kNull;
  EXPECT_TRUE(kinds(jsonl_of({leftover})).empty());

  auto j = to_json(ok);
  j["meta"].erase("assignment_seed");
  EXPECT_EQ(kinds(j.dump() + "\n"), (Kinds{{1, "schema"}}));
  EXPECT_EQ(kinds(""), (Kinds{{0, "empty-file"}}));
  EXPECT_THROW(validate_sft("/nonexistent/x.jsonl"), Error);
}

}  // namespace
}  // namespace capt::emitter
