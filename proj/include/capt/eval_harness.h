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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capt/llm_client.h"
#include "capt/reasoning_item.h"
#include "capt/symbolizer.h"

namespace capt::eval {

// Last <answer>...</answer> span (tags and token case-insensitive), else the
// last whole-word answer token of the dataset anywhere in the reply.
std::optional<Answer> parse_answer(std::string_view reply, Dataset d);

// Percentage rounded to 2 decimals; 0 for an empty split.
double accuracy_percent(std::size_t correct, std::size_t total);

// Sample standard deviation (n - 1) rounded to 2 decimals.
double sample_std(const std::array<double, 3>& accuracies);

struct SplitScore {
  Split split = Split::kCommonsense;
  std::size_t n_total = 0;
  std::size_t n_correct = 0;
  std::size_t n_unparsed = 0;
  double accuracy = 0.0;
};

struct ItemRecord {
  std::string id;
  Dataset dataset = Dataset::kCladder;
  Split split = Split::kCommonsense;
  Answer gold = Answer::kYes;
  std::optional<Answer> parsed;
  bool correct = false;
  std::string prompt;  // as sent
  std::string reply;
  int attempts = 0;
  std::uint64_t assignment_seed = 0;
};

struct EvalReport {
  std::array<SplitScore, 3> scores;  // commonsense, antisense, nonsense
  double std = 0.0;
  nlohmann::json config;
  std::vector<ItemRecord> items;  // id order
  bool partial = false;
  std::string error;
  std::filesystem::path log_dir;

  const SplitScore& score(Split s) const { return scores[static_cast<std::size_t>(s)]; }
};

nlohmann::json to_json(const EvalReport& r);

// Scores keyed records; the result does not depend on record order.
EvalReport score_records(std::vector<ItemRecord> records);

struct EvalOptions {
  CaptMode mode = CaptMode::kNull;
  std::uint64_t seed = 0;
  // Estimate events through this endpoint instead of the deterministic
  // backend.
  std::optional<llm::EndpointConfig> estimator;
  // Run logs go to <log_root>/<content hash>/ when set.
  std::filesystem::path log_root;
};

// Chat turns sent for one item: system prompt for the prompt mode, then
// in-context turns when the mode is cot_ic.
std::vector<llm::Message> build_messages(const llm::EndpointConfig& cfg, const EvalOptions& options, Dataset d,
                                         const std::string& prompt);

// Throws kInvalidArgument unless every split is present. An endpoint
// failure aborts the run: the partial report is written to the log
// directory and the error is rethrown.
EvalReport evaluate(const llm::EndpointConfig& cfg, const std::vector<ReasoningItem>& items,
                    const EvalOptions& options);

struct AblationCell {
  CaptMode mode = CaptMode::kNull;
  std::uint64_t seed = 0;
  EvalReport report;
};

std::vector<AblationCell> run_ablation(const llm::EndpointConfig& cfg, const std::vector<ReasoningItem>& items,
                                       const std::vector<CaptMode>& modes, const std::vector<std::uint64_t>& seeds,
                                       const std::filesystem::path& log_root = {});

// mode,seed,split,accuracy,std
std::string ablation_csv(const std::vector<AblationCell>& cells);
// split,<mode>... with the seed-averaged accuracy per cell.
std::string ablation_plot_table(const std::vector<AblationCell>& cells);

}  // namespace capt::eval
