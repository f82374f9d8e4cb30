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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capt/reasoning_item.h"
#include "capt/symbolizer.h"

namespace capt::emitter {

enum class SftFormat { kCot, kAnswerOnly };

std::string_view to_string(SftFormat f);
SftFormat sft_format_from_string(std::string_view s);

struct SftRecord {
  std::string id;
  std::string prompt;
  std::string completion;
  Dataset dataset = Dataset::kCladder;
  Split split = Split::kCommonsense;
  CaptMode capt_mode = CaptMode::kNull;
  std::uint64_t assignment_seed = 0;

  bool operator==(const SftRecord&) const = default;
};

nlohmann::json to_json(const SftRecord& r);
SftRecord record_from_json(const nlohmann::json& j);

struct EmitOptions {
  SftFormat format = SftFormat::kCot;
  CaptMode mode = CaptMode::kRandom;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;  // 0 takes every item
  // Copies per item, each with its own letter assignment. Copy c > 0 gets
  // the id suffix "#c".
  int reassign_per_copy = 1;
};

// The n_samples item ids kept for `seed`, in id order.
std::vector<std::string> subsample_ids(std::vector<std::string> ids, std::size_t n, std::uint64_t seed);

// Letter-assignment seed of one emitted record.
std::uint64_t assignment_seed(std::uint64_t seed, std::string_view record_id);

struct EventHit {
  std::string record_id;
  std::string field;  // prompt or completion
  std::string event;
  std::size_t pos = 0;
};

// Surface strings the scan looks for in records of `d`: the curated pool
// of that dataset.
std::vector<std::string> pool_events(Dataset d);

// Stem-level scan of every record against its dataset pool plus the source
// item's events.
std::vector<EventHit> scan_event_freedom(const std::vector<SftRecord>& records,
                                         const std::vector<ReasoningItem>& sources);

struct Emission {
  std::vector<SftRecord> records;
  nlohmann::json manifest;
};

// Throws kInvalidArgument when n_samples exceeds the item count and
// kEventFreedomViolation when a CAPT-mode record still mentions an event.
Emission emit_sft(const std::vector<ReasoningItem>& items, const EmitOptions& options);

// Writes the JSONL file and "<stem>.manifest.json" next to it.
std::filesystem::path manifest_path(const std::filesystem::path& jsonl);
void write_emission(const std::filesystem::path& jsonl, const Emission& emission);

struct SftViolation {
  std::size_t line = 0;  // 1-based, 0 for file-level problems
  std::string kind;
  std::string detail;
};

// Re-checks every record invariant. Throws kIoError for a missing file.
std::vector<SftViolation> validate_sft(const std::filesystem::path& path);
std::vector<SftViolation> validate_sft_text(std::string_view jsonl);

}  // namespace capt::emitter
