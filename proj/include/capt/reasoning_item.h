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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace capt {

enum class Dataset { kCladder, kProntoqa };
enum class Split { kCommonsense, kAntisense, kNonsense };
enum class Answer { kYes, kNo, kTrue, kFalse };

inline constexpr Split kAllSplits[] = {Split::kCommonsense, Split::kAntisense, Split::kNonsense};

std::string_view to_string(Dataset d);
std::string_view to_string(Split s);
std::string_view to_string(Answer a);
Dataset dataset_from_string(std::string_view s);
Split split_from_string(std::string_view s);
Answer answer_from_string(std::string_view s);  // exact token, throws on anything else
bool answer_valid_for(Answer a, Dataset d);

struct ReasoningItem {
  std::string id;
  Dataset dataset = Dataset::kCladder;
  Split split = Split::kCommonsense;
  std::string prompt;
  std::string gold_cot;
  Answer gold_answer = Answer::kYes;
  // cladder: [name, set, unset] per node in X, V2, Y order.
  // prontoqa: entity name, then category/property stems.
  std::vector<std::string> events;
  std::uint64_t seed_trace = 0;

  bool operator==(const ReasoningItem&) const = default;
};

nlohmann::json to_json(const ReasoningItem& item);
ReasoningItem item_from_json(const nlohmann::json& j);

// Empty when the item satisfies its invariants, otherwise one message per
// problem.
std::vector<std::string> check_item(const ReasoningItem& item);

std::vector<ReasoningItem> read_items(const std::filesystem::path& path);
void write_items(const std::filesystem::path& path, const std::vector<ReasoningItem>& items);

// Line-oriented helpers shared by every JSONL reader/writer in the toolkit.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace capt
