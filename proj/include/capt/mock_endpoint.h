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
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

namespace httplib {
class Server;
}

namespace capt::mock {

struct Step {
  std::string reply;
  int status = 200;
  int delay_ms = 0;
};

// Replies keyed by item id, one JSONL line per step:
//   {"id": "cladder-commonsense-000001", "reply": "<answer> Yes </answer>"}
//   {"id": "x", "status": 503}
// Repeated ids queue further steps; the last step repeats forever. The id
// "*" answers requests whose id has no entry.
class Script {
 public:
  static Script parse(std::string_view jsonl);
  static Script load(const std::filesystem::path& path);

  void add(const std::string& id, Step step);
  std::string to_jsonl() const;
  const std::map<std::string, std::vector<Step>>& steps() const { return steps_; }

 private:
  std::map<std::string, std::vector<Step>> steps_;
};

struct RecordedRequest {
  std::string item_id;
  std::string authorization;
  nlohmann::json body;
};

// Local chat-completions server that answers from a Script.
class MockEndpoint {
 public:
  explicit MockEndpoint(Script script);
  ~MockEndpoint();
  MockEndpoint(const MockEndpoint&) = delete;
  MockEndpoint& operator=(const MockEndpoint&) = delete;

  // Binds (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

  std::string base_url() const;
  std::vector<RecordedRequest> requests() const;
  void clear_requests();

 private:
  void install_routes();

  Script script_;
  std::map<std::string, std::size_t> cursor_;
  std::vector<RecordedRequest> requests_;
  mutable std::mutex mu_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

}  // namespace capt::mock
