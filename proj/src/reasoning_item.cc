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

#include "capt/reasoning_item.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "capt/error.h"
#include "capt/text.h"

namespace capt {

std::string_view to_string(Dataset d) { return d == Dataset::kCladder ? "cladder" : "prontoqa"; }

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kCommonsense:
      return "commonsense";
    case Split::kAntisense:
      return "antisense";
    case Split::kNonsense:
      return "nonsense";
  }
  return "unknown";
}

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::kYes:
      return "Yes";
    case Answer::kNo:
      return "No";
    case Answer::kTrue:
      return "True";
    case Answer::kFalse:
      return "False";
  }
  return "unknown";
}

Dataset dataset_from_string(std::string_view s) {
  if (s == "cladder") return Dataset::kCladder;
  if (s == "prontoqa") return Dataset::kProntoqa;
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown dataset '{}'", s));
}

Split split_from_string(std::string_view s) {
  for (Split sp : kAllSplits) {
    if (s == to_string(sp)) return sp;
  }
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown split '{}'", s));
}

Answer answer_from_string(std::string_view s) {
  for (Answer a : {Answer::kYes, Answer::kNo, Answer::kTrue, Answer::kFalse}) {
    if (s == to_string(a)) return a;
  }
  throw Error(ErrorKind::kParseError, fmt::format("invalid answer '{}'", s));
}

bool answer_valid_for(Answer a, Dataset d) {
  const bool yes_no = a == Answer::kYes || a == Answer::kNo;
  return d == Dataset::kCladder ? yes_no : !yes_no;
}

nlohmann::json to_json(const ReasoningItem& item) {
  return {{"id", item.id},         {"dataset", to_string(item.dataset)}, {"split", to_string(item.split)},
          {"prompt", item.prompt}, {"gold_cot", item.gold_cot},          {"gold_answer", to_string(item.gold_answer)},
          {"events", item.events}, {"seed_trace", item.seed_trace}};
}

ReasoningItem item_from_json(const nlohmann::json& j) {
  try {
    ReasoningItem item;
    item.id = j.at("id").get<std::string>();
    item.dataset = dataset_from_string(j.at("dataset").get<std::string>());
    item.split = split_from_string(j.at("split").get<std::string>());
    item.prompt = j.at("prompt").get<std::string>();
    item.gold_cot = j.at("gold_cot").get<std::string>();
    item.gold_answer = answer_from_string(j.at("gold_answer").get<std::string>());
    item.events = j.at("events").get<std::vector<std::string>>();
    item.seed_trace = j.at("seed_trace").get<std::uint64_t>();
    return item;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, fmt::format("malformed item: {}", e.what()));
  }
}

std::vector<std::string> check_item(const ReasoningItem& item) {
  std::vector<std::string> problems;
  if (item.id.empty()) problems.emplace_back("empty id");
  if (!answer_valid_for(item.gold_answer, item.dataset)) {
    problems.push_back(fmt::format("answer {} invalid for {}", to_string(item.gold_answer), to_string(item.dataset)));
  }
  if (item.dataset == Dataset::kCladder && item.events.size() % 3 != 0) {
    problems.emplace_back("cladder events must come in [name, set, unset] triples");
  }
  for (const auto& e : item.events) {
    if (!text::contains_stem(item.prompt, e)) problems.push_back(fmt::format("event '{}' absent from prompt", e));
  }
  return problems;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, fmt::format("cannot open {}", path.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, fmt::format("cannot write {}", path.string()));
  out << contents;
  if (!out) throw Error(ErrorKind::kIoError, fmt::format("write to {} failed", path.string()));
}

std::vector<ReasoningItem> read_items(const std::filesystem::path& path) {
  std::vector<ReasoningItem> items;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      items.push_back(item_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kParseError, fmt::format("{}:{}: {}", path.string(), n, e.what()));
    }
  }
  return items;
}

void write_items(const std::filesystem::path& path, const std::vector<ReasoningItem>& items) {
  std::string out;
  for (const auto& item : items) {
    out += to_json(item).dump();
    out += '\n';
  }
  write_text(path, out);
}

}  // namespace capt
