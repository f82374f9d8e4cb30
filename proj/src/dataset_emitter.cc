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

#include "capt/dataset_emitter.h"

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "capt/causal_oracle.h"
#include "capt/error.h"
#include "capt/ontology.h"
#include "capt/rng.h"

namespace capt::emitter {
namespace {

std::string record_id(const std::string& item_id, int copy) {
  return copy == 0 ? item_id : fmt::format("{}#{}", item_id, copy);
}

bool is_answer_token(std::string_view s) { return s == "Yes" || s == "No" || s == "True" || s == "False"; }

}  // namespace

std::string_view to_string(SftFormat f) { return f == SftFormat::kCot ? "cot" : "answer_only"; }

SftFormat sft_format_from_string(std::string_view s) {
  if (s == "cot") return SftFormat::kCot;
  if (s == "answer_only") return SftFormat::kAnswerOnly;
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown format '{}'", s));
}

nlohmann::json to_json(const SftRecord& r) {
  return {{"id", r.id},
          {"prompt", r.prompt},
          {"completion", r.completion},
          {"meta",
           {{"dataset", to_string(r.dataset)},
            {"split", to_string(r.split)},
            {"capt_mode", to_string(r.capt_mode)},
            {"assignment_seed", r.assignment_seed}}}};
}

SftRecord record_from_json(const nlohmann::json& j) {
  SftRecord r;
  r.id = j.at("id").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.completion = j.at("completion").get<std::string>();
  const auto& meta = j.at("meta");
  r.dataset = dataset_from_string(meta.at("dataset").get<std::string>());
  r.split = split_from_string(meta.at("split").get<std::string>());
  r.capt_mode = capt_mode_from_string(meta.at("capt_mode").get<std::string>());
  r.assignment_seed = meta.at("assignment_seed").get<std::uint64_t>();
  return r;
}

std::vector<std::string> subsample_ids(std::vector<std::string> ids, std::size_t n, std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  if (n > ids.size()) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("n_samples {} exceeds {} available items", n, ids.size()));
  }
  SplitMix64 rng(derive_seed(seed, "subsample"));
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(n);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::uint64_t assignment_seed(std::uint64_t seed, std::string_view record_id) { return derive_seed(seed, record_id); }

std::vector<std::string> pool_events(Dataset d) {
  return d == Dataset::kCladder ? cladder::pool_event_strings() : ontology::pool_event_strings();
}

std::vector<EventHit> scan_event_freedom(const std::vector<SftRecord>& records,
                                         const std::vector<ReasoningItem>& sources) {
  std::map<std::string, const ReasoningItem*> by_id;
  for (const auto& item : sources) by_id[item.id] = &item;
  std::map<Dataset, std::vector<std::string>> pools;
  std::vector<EventHit> hits;
  for (const auto& r : records) {
    auto& pool = pools[r.dataset];
    if (pool.empty()) pool = pool_events(r.dataset);
    auto events = pool;
    const auto source = by_id.find(r.id.substr(0, r.id.find('#')));
    if (source != by_id.end()) {
      events.insert(events.end(), source->second->events.begin(), source->second->events.end());
    }
    for (const auto& [field, text] : {std::pair{"prompt", &r.prompt}, std::pair{"completion", &r.completion}}) {
      for (auto& [event, pos] : symbolizer::scan_events(*text, events)) {
        hits.push_back({r.id, field, std::move(event), pos});
      }
    }
  }
  return hits;
}

Emission emit_sft(const std::vector<ReasoningItem>& items, const EmitOptions& options) {
  if (options.reassign_per_copy < 1) throw Error(ErrorKind::kInvalidArgument, "reassign_per_copy must be at least 1");
  std::map<std::string, const ReasoningItem*> by_id;
  for (const auto& item : items) {
    if (!by_id.emplace(item.id, &item).second) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("duplicate item id '{}'", item.id));
    }
  }
  std::vector<std::string> ids;
  for (const auto& [id, item] : by_id) ids.push_back(id);
  const std::size_t n = options.n_samples == 0 ? ids.size() : options.n_samples;
  const auto kept = subsample_ids(ids, n, options.seed);

  Emission out;
  auto manifest_records = nlohmann::json::array();
  std::map<std::string, int> by_dataset;
  std::map<std::string, int> by_split;
  std::vector<ReasoningItem> sources;
  for (const auto& id : kept) {
    const ReasoningItem& item = *by_id.at(id);
    sources.push_back(item);
    const auto tx =
        options.mode == CaptMode::kNull ? symbolizer::TransformedExample{} : symbolizer::symbolize_deterministic(item);
    for (int copy = 0; copy < options.reassign_per_copy; ++copy) {
      SftRecord r;
      r.id = record_id(item.id, copy);
      r.dataset = item.dataset;
      r.split = item.split;
      r.capt_mode = options.mode;
      std::string cot = item.gold_cot;
      r.prompt = item.prompt;
      if (options.mode != CaptMode::kNull) {
        r.assignment_seed = assignment_seed(options.seed, r.id);
        const auto fin =
            symbolizer::apply_assignment(tx, symbolizer::assign_letters(tx.table, options.mode, r.assignment_seed));
        r.prompt = fin.prompt.text;
        cot = fin.cot.text;
      }
      r.completion = options.format == SftFormat::kCot ? cot : std::string(to_string(item.gold_answer));
      manifest_records.push_back({{"id", r.id},
                                  {"source_id", item.id},
                                  {"source_seed", item.seed_trace},
                                  {"assignment_seed", r.assignment_seed}});
      ++by_dataset[std::string(to_string(r.dataset))];
      ++by_split[std::string(to_string(r.split))];
      out.records.push_back(std::move(r));
    }
  }

  nlohmann::json freedom = {{"checked", options.mode != CaptMode::kNull}};
  if (options.mode != CaptMode::kNull) {
    const auto hits = scan_event_freedom(out.records, sources);
    if (!hits.empty()) {
      const auto& h = hits.front();
      throw Error(ErrorKind::kEventFreedomViolation,
                  fmt::format("{} event occurrence(s); first: '{}' in {} of {} at {}", hits.size(), h.event, h.field,
                              h.record_id, h.pos));
    }
    std::set<std::string> pool;
    for (Dataset d : {Dataset::kCladder, Dataset::kProntoqa}) {
      if (by_dataset.count(std::string(to_string(d)))) {
        for (auto& e : pool_events(d)) pool.insert(std::move(e));
      }
    }
    freedom["pool_size"] = pool.size();
    freedom["texts_scanned"] = 2 * out.records.size();
    freedom["violations"] = 0;
  }

  out.manifest = {{"format", to_string(options.format)},
                  {"capt_mode", to_string(options.mode)},
                  {"seed", options.seed},
                  {"n_samples", n},
                  {"n_available", ids.size()},
                  {"reassign_per_copy", options.reassign_per_copy},
                  {"counts", {{"records", out.records.size()}, {"by_dataset", by_dataset}, {"by_split", by_split}}},
                  {"records", std::move(manifest_records)},
                  {"event_freedom", std::move(freedom)}};
  return out;
}

std::filesystem::path manifest_path(const std::filesystem::path& jsonl) {
  auto p = jsonl;
  p.replace_filename(jsonl.stem().string() + ".manifest.json");
  return p;
}

void write_emission(const std::filesystem::path& jsonl, const Emission& emission) {
  std::string body;
  for (const auto& r : emission.records) body += to_json(r).dump() + "\n";
  write_text(jsonl, body);
  write_text(manifest_path(jsonl), emission.manifest.dump(2) + "\n");
}

std::vector<SftViolation> validate_sft(const std::filesystem::path& path) { return validate_sft_text(read_text(path)); }

std::vector<SftViolation> validate_sft_text(std::string_view jsonl) {
  static const std::regex kCot(R"(^<think>[\s\S]*</think>\n<answer> (\w+) </answer>$)");
  std::vector<SftViolation> out;
  std::set<std::string> seen;
  std::optional<SftFormat> file_format;
  std::size_t line_no = 0;
  std::size_t records = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string line(jsonl.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++records;
    auto bad = [&](std::string kind, std::string detail) {
      out.push_back({line_no, std::move(kind), std::move(detail)});
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      bad("parse", e.what());
      continue;
    }
    SftRecord r;
    try {
      r = record_from_json(j);
    } catch (const std::exception& e) {
      bad("schema", e.what());
      continue;
    }
    if (!seen.insert(r.id).second) bad("duplicate-id", r.id);
    if (r.prompt.empty()) bad("empty-prompt", r.id);

    std::string answer;
    SftFormat format = SftFormat::kAnswerOnly;
    std::smatch m;
    if (is_answer_token(r.completion)) {
      answer = r.completion;
    } else if (std::regex_match(r.completion, m, kCot)) {
      format = SftFormat::kCot;
      answer = m[1];
    } else if (r.completion.find("<answer>") == std::string::npos) {
      bad("missing-answer-tag", r.id);
    } else if (r.completion.rfind("<think>", 0) != 0 || r.completion.find("</think>") == std::string::npos) {
      bad("missing-think-tag", r.id);
    } else {
      bad("malformed-completion", r.id);
    }
    if (!answer.empty()) {
      if (!is_answer_token(answer) || !answer_valid_for(answer_from_string(answer), r.dataset)) {
        bad("invalid-answer", fmt::format("{}: '{}' for {}", r.id, answer, to_string(r.dataset)));
      }
      if (!file_format) file_format = format;
      if (*file_format != format) bad("mixed-format", fmt::format("{} is {}", r.id, to_string(format)));
    }
    if (r.capt_mode != CaptMode::kNull &&
        (r.prompt.find("{symbol_") != std::string::npos || r.completion.find("{symbol_") != std::string::npos)) {
      bad("unfinalized-placeholder", r.id);
    }
  }
  if (records == 0) out.push_back({0, "empty-file", "no records"});
  return out;
}

}  // namespace capt::emitter
