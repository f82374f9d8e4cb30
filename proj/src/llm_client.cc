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

#include "capt/llm_client.h"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "capt/error.h"

namespace capt::llm {
namespace {

struct Target {
  std::string origin;  // scheme://host:port
  std::string path;    // prefix + /chat/completions
};

Target split_url(const std::string& base_url) {
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("base_url '{}' has no scheme", base_url));
  }
  const auto slash = base_url.find('/', scheme + 3);
  Target t;
  t.origin = base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  t.path = prefix + "/chat/completions";
  return t;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string_view to_string(PromptMode m) {
  switch (m) {
    case PromptMode::kDirect:
      return "direct";
    case PromptMode::kCot:
      return "cot";
    case PromptMode::kCotIc:
      return "cot_ic";
  }
  return "unknown";
}

PromptMode prompt_mode_from_string(std::string_view s) {
  for (PromptMode m : {PromptMode::kDirect, PromptMode::kCot, PromptMode::kCotIc}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown prompt mode '{}'", s));
}

void validate(const EndpointConfig& cfg) {
  if (cfg.max_in_flight < 1) throw Error(ErrorKind::kInvalidArgument, "max_in_flight must be at least 1");
  if (cfg.retry_max < 0) throw Error(ErrorKind::kInvalidArgument, "retry_max must be non-negative");
  if (cfg.timeout_ms <= 0) throw Error(ErrorKind::kInvalidArgument, "timeout_ms must be positive");
  split_url(cfg.base_url);
}

nlohmann::json request_body(const EndpointConfig& cfg, const std::vector<Message>& messages) {
  auto msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", cfg.model_name}, {"temperature", cfg.temperature}, {"messages", std::move(msgs)}};
}

Reply complete(const EndpointConfig& cfg, const std::vector<Message>& messages, std::string_view item_id) {
  validate(cfg);
  const auto target = split_url(cfg.base_url);
  const std::string body = request_body(cfg, messages).dump();
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", fmt::format("Bearer {}", key));
  }
  if (!item_id.empty()) headers.emplace("X-Capt-Item-Id", std::string(item_id));

  std::string last_error;
  bool timed_out = false;
  int delay = cfg.backoff_ms;
  const int max_attempts = cfg.retry_max + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      spdlog::warn("{}: attempt {}/{} failed ({}); retrying in {} ms", item_id, attempt - 1, max_attempts, last_error,
                   delay);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
    httplib::Client client(target.origin);
    const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    const auto res = client.Post(target.path, headers, body, "application/json");
    if (!res) {
      timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout;
      last_error = httplib::to_string(res.error());
      continue;
    }
    timed_out = false;
    if (res->status != 200) {
      last_error = fmt::format("HTTP {}", res->status);
      if (retryable(res->status)) continue;
      throw Error(ErrorKind::kEndpointError, last_error, attempt);
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return {j.at("choices").at(0).at("message").at("content").get<std::string>(), attempt};
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kEndpointError, fmt::format("malformed completion body: {}", e.what()), attempt);
    }
  }
  throw Error(timed_out ? ErrorKind::kTimeout : ErrorKind::kEndpointError,
              fmt::format("{} after {} attempts", last_error, max_attempts), max_attempts);
}

std::string query_model(const EndpointConfig& cfg, const std::string& prompt, std::string_view item_id) {
  return complete(cfg, {{"user", prompt}}, item_id).content;
}

}  // namespace capt::llm
