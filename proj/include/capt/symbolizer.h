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
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capt/reasoning_item.h"

namespace capt {

enum class CaptMode { kNull, kOrder, kRandom };

std::string_view to_string(CaptMode m);
CaptMode capt_mode_from_string(std::string_view s);

namespace symbolizer {

// "{symbol_k}", k from 1.
std::string placeholder(int k);

struct SymbolEntry {
  std::string placeholder;
  std::string name;
  std::optional<std::string> set_description;
  std::optional<std::string> unset_description;

  bool operator==(const SymbolEntry&) const = default;
};

using SymbolTable = std::vector<SymbolEntry>;

// A span of `text` that replaced `original`.
struct Site {
  std::size_t pos = 0;
  std::size_t len = 0;
  std::string original;

  bool operator==(const Site&) const = default;
};

// Text plus the journal of every substitution made to reach it. Sites are
// sorted and disjoint. Text from an external source has no sites.
struct JournaledText {
  std::string text;
  std::vector<Site> sites;

  bool operator==(const JournaledText&) const = default;
};

struct TransformedExample {
  std::string source_id;
  Dataset dataset = Dataset::kCladder;
  Split split = Split::kCommonsense;
  SymbolTable table;
  JournaledText prompt;
  JournaledText cot;
  Answer gold_answer = Answer::kYes;
};

struct LetterAssignment {
  CaptMode mode = CaptMode::kNull;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> mapping;  // placeholder -> code

  bool operator==(const LetterAssignment&) const = default;
};

// Replaces every event of `item` in prompt and trace by its placeholder,
// numbering entries by first occurrence in the prompt. Throws
// kEventNotFound for an event absent from the prompt.
TransformedExample symbolize_deterministic(const ReasoningItem& item);

// Same, with a caller-supplied table (entries need not be in prompt order).
TransformedExample symbolize_with_table(const ReasoningItem& item, const SymbolTable& table);

struct Violation {
  std::string kind;  // residual-event, malformed-placeholder, ...
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Empty when `tx` is a complete symbolization of `original`.
std::vector<Violation> verify_symbolization(const TransformedExample& tx, const ReasoningItem& original);

// k-th code, k from 0: A..Z, AA..AZ, BA.., ZZ, AAA...
std::string letter_code(std::size_t k);

LetterAssignment assign_letters(const SymbolTable& table, CaptMode mode, std::uint64_t seed);

struct Finalized {
  JournaledText prompt;
  JournaledText cot;
};

// Throws kUncoveredPlaceholder. Null mode returns the texts unchanged.
Finalized apply_assignment(const TransformedExample& tx, const LetterAssignment& a);
JournaledText apply_assignment(const JournaledText& text, const LetterAssignment& a);

// Replays the journal backwards.
std::string desymbolize(const JournaledText& text);

// Without a journal: code tokens become names ("A=1" becomes the set
// description). Throws kAmbiguousCode when a used code can also be read as
// an ordinary token.
std::string desymbolize(std::string_view text, const SymbolTable& table, const LetterAssignment& a);

// True when `a` and `b` are identical except that capital-letter code
// tokens are renamed by a consistent bijection.
bool related_by_letter_bijection(std::string_view a, std::string_view b);

// Every stem-level occurrence of `events` in `text`, as (event, position).
std::vector<std::pair<std::string, std::size_t>> scan_events(std::string_view text,
                                                             const std::vector<std::string>& events);

// TransformedExample JSONL layout, with the finalizing assignment.
nlohmann::json to_json(const TransformedExample& tx, const LetterAssignment& a);
TransformedExample transformed_from_json(const nlohmann::json& j, LetterAssignment* a = nullptr);
nlohmann::json to_json(const SymbolTable& table);
SymbolTable table_from_json(const nlohmann::json& j);

}  // namespace symbolizer
}  // namespace capt
