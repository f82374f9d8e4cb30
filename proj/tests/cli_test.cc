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

#include <sstream>

#include <fmt/format.h>

#include "capt/causal_oracle.h"
#include "capt/cli.h"
#include "capt/dataset_emitter.h"
#include "capt/digest.h"
#include "capt/mock_endpoint.h"
#include "capt/scm.h"
#include "test_util.h"

namespace capt::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result capt(std::vector<std::string> args) {
  args.insert(args.begin(), "capt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string path_str(const fs::path& p) { return p.string(); }

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, Version) {
  const auto r = capt({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, std::string(version()) + "\n");
}

TEST(Cli, UsageErrorsExitTwo) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {},
           {"frobnicate"},
           {"generate", "cladder", "--out", "/nonexistent/x", "--bogus"},
           {"generate", "wikipedia", "--out", "x"},
           {"emit", "--items", "/nonexistent/items.jsonl", "--out", "x"},
           {"eval", "--items", "x", "--out", "y", "--prompt-mode", "shouting"},
           {"verify-scm", "--shape", "fig9"},
       }) {
    const auto r = capt(args);
    EXPECT_EQ(r.code, 2) << fmt::format("{}", fmt::join(args, " "));
    EXPECT_NE(r.err.find("Usage:"), std::string::npos) << r.err;
  }
  EXPECT_NE(capt({"generate", "cladder", "--out", "x", "--bogus"}).err.find("--bogus"), std::string::npos);
}

TEST(Cli, GenerateWritesItemsAndManifest) {
  test::TempDir dir("cli-gen");
  const auto out = dir.path() / "cladder";
  const auto r = capt({"generate", "cladder", "--n", "100", "--seed", "0", "--out", path_str(out)});
  ASSERT_EQ(r.code, 0) << r.err;

  const auto items = read_items(out / "items.jsonl");
  EXPECT_EQ(items, cladder::generate_cladder_batch(100, 0, {std::begin(kAllSplits), std::end(kAllSplits)}));
  const auto m = nlohmann::json::parse(read_text(out / "manifest.json"));
  EXPECT_EQ(m.at("count"), 300);
  for (Split s : kAllSplits) EXPECT_EQ(m.at("counts").at(std::string(to_string(s))), 100);
  EXPECT_EQ(m.at("items_sha256"), sha256_hex(read_text(out / "items.jsonl")));
  ASSERT_EQ(m.at("items").size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(m["items"][i].at("id"), items[i].id);
    EXPECT_EQ(m["items"][i].at("seed").get<std::uint64_t>(), items[i].seed_trace);
  }

  const auto again = dir.path() / "again";
  ASSERT_EQ(capt({"generate", "cladder", "--n", "100", "--out", path_str(again)}).code, 0);
  EXPECT_EQ(read_text(again / "items.jsonl"), read_text(out / "items.jsonl"));
  EXPECT_EQ(read_text(again / "manifest.json"), read_text(out / "manifest.json"));
}

TEST(Cli, ExistingOutputsNeedForce) {
  test::TempDir dir("cli-force");
  const auto out = dir.path() / "p";
  ASSERT_EQ(capt({"generate", "prontoqa", "--n", "3", "--seed", "1", "--out", path_str(out)}).code, 0);
  const auto before = read_text(out / "items.jsonl");

  const auto r = capt({"generate", "prontoqa", "--n", "4", "--seed", "2", "--out", path_str(out)});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error[exists-error]"), std::string::npos) << r.err;
  EXPECT_EQ(read_text(out / "items.jsonl"), before);

  ASSERT_EQ(capt({"--force", "generate", "prontoqa", "--n", "4", "--seed", "2", "--out", path_str(out)}).code, 0);
  EXPECT_EQ(read_items(out / "items.jsonl").size(), 12u);
}

TEST(Cli, ConfigSnapshotReplays) {
  test::TempDir dir("cli-config");
  const auto first = dir.path() / "first";
  ASSERT_EQ(capt({"generate", "prontoqa", "--n", "5", "--seed", "9", "--splits", "antisense,nonsense", "--max-hops",
                  "4", "--out", path_str(first)})
                .code,
            0);
  const auto cfg = path_str(first / "config.toml");
  const auto snap = read_text(first / "config.toml");
  EXPECT_EQ(snap.find("emit."), std::string::npos) << snap;
  EXPECT_EQ(snap.find("force"), std::string::npos) << snap;

  // Everything comes from the snapshot except the flag given on the command line.
  const auto second = dir.path() / "second";
  ASSERT_EQ(capt({"--config", cfg, "generate", "--out", path_str(second)}).code, 0);
  EXPECT_EQ(read_text(second / "items.jsonl"), read_text(first / "items.jsonl"));

  const auto third = dir.path() / "third";
  ASSERT_EQ(capt({"--config", cfg, "generate", "--seed", "10", "--out", path_str(third)}).code, 0);
  const auto items = read_items(third / "items.jsonl");
  EXPECT_EQ(items.size(), 10u);
  EXPECT_NE(read_text(third / "items.jsonl"), read_text(first / "items.jsonl"));
  for (const auto& item : items) EXPECT_NE(item.split, Split::kCommonsense);
}

TEST(Cli, EmitValidateRoundTripLeavesInputsAlone) {
  test::TempDir dir("cli-emit");
  const auto gen = dir.path() / "gen";
  ASSERT_EQ(capt({"generate", "cladder", "--n", "8", "--out", path_str(gen)}).code, 0);
  const auto items = path_str(gen / "items.jsonl");
  const auto digest = sha256_hex(read_text(items));

  const auto sft = dir.path() / "sft.jsonl";
  auto r =
      capt({"emit", "--items", items, "--mode", "order", "--n-samples", "10", "--seed", "4", "--out", path_str(sft)});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(sha256_hex(read_text(items)), digest);
  EXPECT_EQ(read_lines(sft).size(), 10u);
  const auto manifest = nlohmann::json::parse(read_text(emitter::manifest_path(sft)));
  EXPECT_EQ(manifest.at("source").at("items_sha256"), digest);
  EXPECT_EQ(manifest.at("capt_mode"), "order");
  EXPECT_TRUE(fs::exists(dir.path() / "sft.config.toml"));

  r = capt({"validate", path_str(sft)});
  EXPECT_EQ(r.code, 0) << r.out;

  const auto bad = dir.path() / "bad.jsonl";
  write_text(bad, read_text(sft) + "{\"id\": 1}\n");
  r = capt({"validate", path_str(bad)});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("line 11: schema"), std::string::npos) << r.out;
}

TEST(Cli, TransformDeterministic) {
  test::TempDir dir("cli-transform");
  const auto gen = dir.path() / "gen";
  ASSERT_EQ(capt({"generate", "prontoqa", "--n", "2", "--out", path_str(gen)}).code, 0);
  const auto out = dir.path() / "tx.jsonl";
  ASSERT_EQ(
      capt({"transform", "--items", path_str(gen / "items.jsonl"), "--mode", "order", "--out", path_str(out)}).code, 0);
  const auto lines = read_lines(out);
  ASSERT_EQ(lines.size(), 6u);
  for (const auto& line : lines) {
    symbolizer::LetterAssignment a;
    const auto tx = symbolizer::transformed_from_json(nlohmann::json::parse(line), &a);
    EXPECT_EQ(a.mode, CaptMode::kOrder);
    EXPECT_EQ(a.mapping.size(), tx.table.size());
  }
}

TEST(Cli, VerifyScm) {
  auto r = capt({"verify-scm", "--shape", "fig1d", "--seed", "5"});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const auto* id :
       {"total_probability", "post_surgery_factorization", "post_surgery_structural", "uniform_event_adjustment"}) {
    EXPECT_NE(r.out.find(fmt::format("{}: max discrepancy", id)), std::string::npos) << r.out;
  }
  EXPECT_NE(r.out.find("PASS"), std::string::npos);

  test::TempDir dir("cli-scm");
  const auto file = dir.path() / "scm.json";
  write_text(file, scm::make_random_scm(scm::Shape::kFig1b, 3).scm.to_json().dump());
  r = capt({"verify-scm", "--scm", path_str(file)});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("confounder gap"), std::string::npos) << r.out;

  write_text(file, R"({"nodes": [{"name": "A"}], "edges": [["A", "A"]]})");
  r = capt({"verify-scm", "--scm", path_str(file)});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("capt: error["), std::string::npos) << r.err;
}

TEST(Cli, EvalAndAblateAgainstMock) {
  test::TempDir dir("cli-eval");
  const auto gen = dir.path() / "gen";
  ASSERT_EQ(capt({"generate", "cladder", "--n", "4", "--out", path_str(gen)}).code, 0);
  mock::Script script;
  script.add("*", {"<think> guess </think>\n<answer> Yes </answer>"});
  mock::MockEndpoint m(script);
  m.start();
  const auto items = path_str(gen / "items.jsonl");

  const auto report = dir.path() / "eval" / "report.json";
  auto r = capt({"--json-logs", "eval", "--endpoint-url", m.base_url(), "--items", items, "--mode", "random", "--out",
                 path_str(report)});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_text(report));
  std::size_t yes = 0;
  for (const auto& item : read_items(items)) yes += item.gold_answer == Answer::kYes;
  std::size_t correct = 0;
  for (const auto& s : j.at("scores")) correct += s.at("n_correct").get<std::size_t>();
  EXPECT_EQ(correct, yes);
  EXPECT_TRUE(fs::exists(dir.path() / "eval" / "report.config.toml"));
  for (std::istringstream in(r.err); std::getline(in, r.err);) EXPECT_NO_THROW(nlohmann::json::parse(r.err));

  // Replaying the snapshot into a fresh directory reproduces the report.
  const auto replay = dir.path() / "replay" / "report.json";
  r = capt({"--config", path_str(dir.path() / "eval" / "report.config.toml"), "eval", "--out", path_str(replay)});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(read_text(replay)).at("scores"), j.at("scores"));

  const auto ab = dir.path() / "ablate";
  r = capt({"ablate", "--endpoint-url", m.base_url(), "--items", items, "--seeds", "1,2", "--out", path_str(ab)});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_lines(ab / "ablation.csv").size(), 1u + 3 * 2 * 3);
  EXPECT_EQ(read_lines(ab / "accuracy_by_mode.csv").front(), "split,null,order,random");
  EXPECT_TRUE(fs::exists(ab / "reports" / "random-2.json"));
}

TEST(Cli, EndpointFailureIsStructured) {
  test::TempDir dir("cli-fail");
  const auto gen = dir.path() / "gen";
  ASSERT_EQ(capt({"generate", "cladder", "--n", "1", "--out", path_str(gen)}).code, 0);
  mock::Script script;
  script.add("*", {"", 503});
  mock::MockEndpoint m(script);
  m.start();
  const auto r = capt({"--json-logs", "eval", "--endpoint-url", m.base_url(), "--retry-max", "2", "--backoff-ms", "1",
                       "--max-in-flight", "1", "--items", path_str(gen / "items.jsonl"), "--out",
                       path_str(dir.path() / "r.json")});
  EXPECT_EQ(r.code, 1);
  std::istringstream in(r.err);
  std::string line, last;
  while (std::getline(in, line)) last = line;
  const auto j = nlohmann::json::parse(last);
  EXPECT_EQ(j.at("kind"), "endpoint-error");
  EXPECT_EQ(j.at("attempts"), 3);
  EXPECT_FALSE(fs::exists(dir.path() / "r.json"));
}

}  // namespace
}  // namespace capt::cli
