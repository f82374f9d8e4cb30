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

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace capt::llm {

enum class PromptMode { kDirect, kCot, kCotIc };

std::string_view to_string(PromptMode m);
PromptMode prompt_mode_from_string(std::string_view s);

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string model_name = "capt-mock";
  std::string api_key_env = "CAPT_API_KEY";
  double temperature = 0.0;
  int max_in_flight = 4;
  int timeout_ms = 30000;
  int retry_max = 3;
  int backoff_ms = 100;  // doubled after each failed attempt
  PromptMode prompt_mode = PromptMode::kCot;
  std::string in_context_file;  // empty: built-in examples
};

// Throws kInvalidArgument on out-of-range fields.
void validate(const EndpointConfig& cfg);

struct Message {
  std::string role;
  std::string content;

  bool operator==(const Message&) const = default;
};

nlohmann::json request_body(const EndpointConfig& cfg, const std::vector<Message>& messages);

struct Reply {
  std::string content;
  int attempts = 0;
};

// One chat-completions call. Transport failures, timeouts, 429 and 5xx are
// retried up to cfg.retry_max times with exponential backoff; other statuses
// fail at once. Throws kEndpointError or kTimeout with the attempt count.
// `item_id`, when set, is sent as the X-Capt-Item-Id header.
Reply complete(const EndpointConfig& cfg, const std::vector<Message>& messages, std::string_view item_id = {});

// Single-turn convenience wrapper.
std::string query_model(const EndpointConfig& cfg, const std::string& prompt, std::string_view item_id = {});

}  // namespace capt::llm
