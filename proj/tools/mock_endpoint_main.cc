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

#include <iostream>

#include <CLI11.hpp>

#include "capt/error.h"
#include "capt/mock_endpoint.h"

// Serves scripted chat-completions replies, keyed by the X-Capt-Item-Id
// header. Script lines: {"id": ..., "reply": ..., "status": ..., "delay_ms": ...}.
int main(int argc, char** argv) {
  CLI::App app{"Scripted chat-completions endpoint", "capt-mock-endpoint"};
  std::string script;
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--script", script, "Script JSONL (eval request logs replay as-is)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str()->check(CLI::Range(1, 65535));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    capt::mock::MockEndpoint endpoint(capt::mock::Script::load(script));
    std::cerr << "listening on http://" << host << ":" << port << "/v1\n";
    endpoint.run(host, port);
  } catch (const capt::Error& e) {
    std::cerr << "capt-mock-endpoint: error[" << capt::to_string(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
