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

#include "capt/mock_endpoint.h"

#include <chrono>

#include <fmt/format.h>
#include <httplib.h>

#include "capt/error.h"
#include "capt/reasoning_item.h"

namespace capt::mock {

Script Script::parse(std::string_view jsonl) {
  Script s;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Step step;
      step.reply = j.value("reply", "");
      step.status = j.value("status", 200);
      step.delay_ms = j.value("delay_ms", 0);
      s.add(j.at("id").get<std::string>(), std::move(step));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParseError, fmt::format("script line {}: {}", line_no, e.what()));
    }
  }
  return s;
}

Script Script::load(const std::filesystem::path& path) { return parse(read_text(path)); }

void Script::add(const std::string& id, Step step) { steps_[id].push_back(std::move(step)); }

std::string Script::to_jsonl() const {
  std::string out;
  for (const auto& [id, steps] : steps_) {
    for (const auto& s : steps) {
      nlohmann::json j = {{"id", id}, {"reply", s.reply}};
      if (s.status != 200) j["status"] = s.status;
      if (s.delay_ms != 0) j["delay_ms"] = s.delay_ms;
      out += j.dump() + "\n";
    }
  }
  return out;
}

MockEndpoint::MockEndpoint(Script script) : script_(std::move(script)), server_(std::make_unique<httplib::Server>()) {
  server_->new_task_queue = [] { return new httplib::ThreadPool(16); };
  install_routes();
}

MockEndpoint::~MockEndpoint() { stop(); }

void MockEndpoint::install_routes() {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    RecordedRequest rec;
    rec.item_id = req.get_header_value("X-Capt-Item-Id");
    rec.authorization = req.get_header_value("Authorization");
    try {
      rec.body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content(R"({"error":"body is not JSON"})", "application/json");
      return;
    }
    Step step;
    {
      std::lock_guard lock(mu_);
      requests_.push_back(rec);
      auto it = script_.steps().find(rec.item_id);
      if (it == script_.steps().end()) it = script_.steps().find("*");
      if (it == script_.steps().end()) {
        res.status = 404;
        res.set_content(nlohmann::json{{"error", fmt::format("no script entry for '{}'", rec.item_id)}}.dump(),
                        "application/json");
        return;
      }
      auto& cur = cursor_[it->first];
      step = it->second[std::min(cur, it->second.size() - 1)];
      ++cur;
    }
    if (step.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(step.delay_ms));
    res.status = step.status;
    if (step.status != 200) {
      res.set_content(R"({"error":"scripted failure"})", "application/json");
      return;
    }
    const nlohmann::json body = {
        {"object", "chat.completion"},
        {"model", rec.body.value("model", "")},
        {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", step.reply}}}}}}};
    res.set_content(body.dump(), "application/json");
  };
  server_->Post(R"(/(.*/)?chat/completions)", handler);
}

int MockEndpoint::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ <= 0) throw Error(ErrorKind::kIoError, fmt::format("cannot bind {}:{}", host, port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockEndpoint::run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) throw Error(ErrorKind::kIoError, fmt::format("cannot listen on {}:{}", host, port));
}

void MockEndpoint::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockEndpoint::base_url() const { return fmt::format("http://{}:{}/v1", host_, port_); }

std::vector<RecordedRequest> MockEndpoint::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

void MockEndpoint::clear_requests() {
  std::lock_guard lock(mu_);
  requests_.clear();
}

}  // namespace capt::mock
