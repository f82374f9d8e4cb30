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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "capt/llm_client.h"
#include "capt/reasoning_item.h"
#include "capt/symbolizer.h"

namespace capt::estimator {

// A worked anonymization: raw texts plus the reply a model should give.
struct InContextExample {
  std::string prompt;
  std::string response;
  symbolizer::SymbolTable table;
  std::string background_question;
  std::string reasoning;
};

// Built-in examples: the husband/alarm and rixq stories for CLadder, the
// three shipped taxonomy examples for PrOntoQA.
std::vector<InContextExample> builtin_examples(Dataset task);
// Same JSON layout as the shipped examples (raw_prompt, response,
// variable2name, background_question, reasoning).
std::vector<InContextExample> load_examples(const std::filesystem::path& path);

std::string reply_json(const InContextExample& ex);
std::string user_turn(std::string_view prompt, std::string_view response, Dataset task);

std::vector<llm::Message> anonymizer_messages(std::string_view prompt, std::string_view cot, Dataset task,
                                              const std::vector<InContextExample>& examples,
                                              std::string_view feedback = {});

// Strict parse of a model reply. Accepts an optional ```json fence and
// either the array or the keyed-object form of variable2name. Throws
// kParseError.
symbolizer::TransformedExample parse_reply(std::string_view reply, Dataset task);

struct EstimateOptions {
  int max_retries = 3;
  std::string item_id;
  std::vector<InContextExample> examples;  // empty: builtin_examples(task)
};

// Asks the endpoint to symbolize (prompt, cot), verifying each reply and
// re-asking with the violations appended. Throws kExtractionFailed with
// the attempt count once the retries are spent.
symbolizer::TransformedExample estimate_events(std::string_view prompt, std::string_view cot, Dataset task,
                                               const llm::EndpointConfig& cfg, const EstimateOptions& options = {});

}  // namespace capt::estimator
