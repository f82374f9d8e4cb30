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

#include "capt/eval_harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "capt/digest.h"
#include "capt/error.h"
#include "capt/event_estimator.h"
#include "capt/rng.h"
#include "capt/text.h"

namespace capt::eval {
namespace {

std::array<Answer, 2> answer_tokens(Dataset d) {
  return d == Dataset::kCladder ? std::array{Answer::kYes, Answer::kNo} : std::array{Answer::kTrue, Answer::kFalse};
}

std::optional<Answer> match_token(std::string_view word, Dataset d) {
  for (Answer a : answer_tokens(d)) {
    if (text::iequals(word, to_string(a))) return a;
  }
  return std::nullopt;
}

std::string system_prompt(llm::PromptMode mode, Dataset d) {
  const auto tokens = answer_tokens(d);
  const auto yes = to_string(tokens[0]);
  const auto no = to_string(tokens[1]);
  if (mode == llm::PromptMode::kDirect) {
    return fmt::format(
        "Answer the question. Reply with the final answer only, as <answer> {} </answer> or <answer> {} "
        "</answer>.",
        yes, no);
  }
  return fmt::format(
      "Answer the question. Reason step by step inside <think> </think>, then give the final answer "
      "as <answer> {} </answer> or <answer> {} </answer>.",
      yes, no);
}

using Shots = std::vector<std::pair<std::string, std::string>>;

Shots in_context_shots(const llm::EndpointConfig& cfg, const EvalOptions& options, Dataset d) {
  if (cfg.prompt_mode != llm::PromptMode::kCotIc) return {};
  const auto examples =
      cfg.in_context_file.empty() ? estimator::builtin_examples(d) : estimator::load_examples(cfg.in_context_file);
  Shots shots;
  for (std::size_t k = 0; k < examples.size(); ++k) {
    const auto& ex = examples[k];
    if (options.mode == CaptMode::kNull) {
      shots.emplace_back(ex.prompt, ex.response);
      continue;
    }
    const auto a =
        symbolizer::assign_letters(ex.table, options.mode, derive_seed(options.seed, fmt::format("in-context/{}", k)));
    shots.emplace_back(symbolizer::apply_assignment(symbolizer::JournaledText{ex.background_question, {}}, a).text,
                       symbolizer::apply_assignment(symbolizer::JournaledText{ex.reasoning, {}}, a).text);
  }
  return shots;
}

std::vector<llm::Message> assemble(const std::string& system, const Shots& shots, const std::string& prompt) {
  std::vector<llm::Message> msgs{{"system", system}};
  for (const auto& [user, assistant] : shots) {
    msgs.push_back({"user", user});
    msgs.push_back({"assistant", assistant});
  }
  msgs.push_back({"user", prompt});
  return msgs;
}

nlohmann::json config_echo(const llm::EndpointConfig& cfg, const EvalOptions& options) {
  return {{"base_url", cfg.base_url},
          {"model_name", cfg.model_name},
          {"api_key_env", cfg.api_key_env},
          {"temperature", cfg.temperature},
          {"max_in_flight", cfg.max_in_flight},
          {"timeout_ms", cfg.timeout_ms},
          {"retry_max", cfg.retry_max},
          {"backoff_ms", cfg.backoff_ms},
          {"prompt_mode", llm::to_string(cfg.prompt_mode)},
          {"in_context_file", cfg.in_context_file},
          {"capt_mode", to_string(options.mode)},
          {"seed", options.seed},
          {"llm_estimation", options.estimator.has_value()}};
}

nlohmann::json record_json(const ItemRecord& r) {
  return {{"id", r.id},
          {"dataset", to_string(r.dataset)},
          {"split", to_string(r.split)},
          {"gold", to_string(r.gold)},
          {"parsed", r.parsed ? nlohmann::json(to_string(*r.parsed)) : nlohmann::json()},
          {"correct", r.correct},
          {"prompt", r.prompt},
          {"reply", r.reply},
          {"attempts", r.attempts},
          {"assignment_seed", r.assignment_seed}};
}

}  // namespace

std::optional<Answer> parse_answer(std::string_view reply, Dataset d) {
  const std::string lower = text::to_lower(reply);
  const auto open = lower.rfind("<answer>");
  if (open != std::string::npos) {
    const auto body = open + std::string_view("<answer>").size();
    const auto close = lower.find("</answer>", body);
    if (close != std::string::npos) {
      if (auto a = match_token(text::trim(reply.substr(body, close - body)), d)) return a;
    }
  }
  std::optional<Answer> last;
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!text::is_word_char(reply[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < reply.size() && text::is_word_char(reply[j])) ++j;
    if (auto a = match_token(reply.substr(i, j - i), d)) last = a;
    i = j;
  }
  return last;
}

double accuracy_percent(std::size_t correct, std::size_t total) {
  if (total == 0) return 0.0;
  return std::round(10000.0 * static_cast<double>(correct) / static_cast<double>(total)) / 100.0;
}

double sample_std(const std::array<double, 3>& a) {
  const double mean = (a[0] + a[1] + a[2]) / 3.0;
  double ss = 0.0;
  for (double v : a) ss += (v - mean) * (v - mean);
  return std::round(100.0 * std::sqrt(ss / 2.0)) / 100.0;
}

nlohmann::json to_json(const EvalReport& r) {
  auto scores = nlohmann::json::array();
  for (const auto& s : r.scores) {
    scores.push_back({{"split", to_string(s.split)},
                      {"n_total", s.n_total},
                      {"n_correct", s.n_correct},
                      {"n_unparsed", s.n_unparsed},
                      {"accuracy", s.accuracy}});
  }
  auto items = nlohmann::json::array();
  for (const auto& rec : r.items) items.push_back(record_json(rec));
  nlohmann::json j = {{"scores", std::move(scores)},
                      {"std", r.std},
                      {"config", r.config},
                      {"items", std::move(items)},
                      {"partial", r.partial}};
  if (r.partial) j["error"] = r.error;
  return j;
}

EvalReport score_records(std::vector<ItemRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  EvalReport report;
  for (Split s : kAllSplits) report.scores[static_cast<std::size_t>(s)].split = s;
  for (const auto& r : records) {
    auto& score = report.scores[static_cast<std::size_t>(r.split)];
    ++score.n_total;
    if (!r.parsed) ++score.n_unparsed;
    if (r.correct) ++score.n_correct;
  }
  std::array<double, 3> acc{};
  for (std::size_t i = 0; i < 3; ++i) {
    auto& s = report.scores[i];
    s.accuracy = accuracy_percent(s.n_correct, s.n_total);
    acc[i] = s.accuracy;
  }
  report.std = sample_std(acc);
  report.items = std::move(records);
  return report;
}

std::vector<llm::Message> build_messages(const llm::EndpointConfig& cfg, const EvalOptions& options, Dataset d,
                                         const std::string& prompt) {
  return assemble(system_prompt(cfg.prompt_mode, d), in_context_shots(cfg, options, d), prompt);
}

EvalReport evaluate(const llm::EndpointConfig& cfg, const std::vector<ReasoningItem>& items,
                    const EvalOptions& options) {
  llm::validate(cfg);
  std::set<Split> present;
  std::set<std::string> ids;
  for (const auto& item : items) {
    present.insert(item.split);
    if (!ids.insert(item.id).second) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("duplicate item id '{}'", item.id));
    }
  }
  if (present.size() != 3) throw Error(ErrorKind::kInvalidArgument, "items must cover all three splits");

  std::map<Dataset, std::pair<std::string, Shots>> context;
  for (const auto& item : items) {
    if (!context.count(item.dataset)) {
      context[item.dataset] = {system_prompt(cfg.prompt_mode, item.dataset),
                               in_context_shots(cfg, options, item.dataset)};
    }
  }

  nlohmann::json fingerprint = {{"config", config_echo(cfg, options)}, {"items", nlohmann::json::array()}};
  std::vector<const ReasoningItem*> order;
  for (const auto& item : items) order.push_back(&item);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  for (const auto* item : order) fingerprint["items"].push_back({item->id, item->prompt, to_string(item->gold_answer)});

  std::vector<std::optional<ItemRecord>> results(order.size());
  std::vector<nlohmann::json> requests(order.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mu;
  std::optional<Error> first_error;

  auto work = [&] {
    for (std::size_t i = next++; i < order.size() && !abort; i = next++) {
      const ReasoningItem& item = *order[i];
      try {
        ItemRecord rec;
        rec.id = item.id;
        rec.dataset = item.dataset;
        rec.split = item.split;
        rec.gold = item.gold_answer;
        rec.prompt = item.prompt;
        if (options.mode != CaptMode::kNull) {
          estimator::EstimateOptions est;
          est.item_id = item.id;
          const auto tx = options.estimator
                              ? estimator::estimate_events(item.prompt, "", item.dataset, *options.estimator, est)
                              : symbolizer::symbolize_deterministic(item);
          rec.assignment_seed = derive_seed(options.seed, item.id);
          rec.prompt =
              symbolizer::apply_assignment(tx, symbolizer::assign_letters(tx.table, options.mode, rec.assignment_seed))
                  .prompt.text;
        }
        const auto& [system, shots] = context.at(item.dataset);
        const auto msgs = assemble(system, shots, rec.prompt);
        const auto reply = llm::complete(cfg, msgs, item.id);
        rec.reply = reply.content;
        rec.attempts = reply.attempts;
        rec.parsed = parse_answer(rec.reply, item.dataset);
        rec.correct = rec.parsed == item.gold_answer;
        requests[i] = {{"id", item.id},
                       {"request", llm::request_body(cfg, msgs)},
                       {"reply", rec.reply},
                       {"attempts", rec.attempts}};
        results[i] = std::move(rec);
      } catch (const Error& e) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = Error(e.kind(), fmt::format("{}: {}", item.id, e.what()), e.attempts());
        abort = true;
      }
    }
  };
  std::vector<std::thread> workers;
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), order.size());
  for (std::size_t t = 0; t < n_workers; ++t) workers.emplace_back(work);
  for (auto& t : workers) t.join();

  std::vector<ItemRecord> done;
  for (auto& r : results) {
    if (r) done.push_back(std::move(*r));
  }
  EvalReport report = score_records(std::move(done));
  report.config = config_echo(cfg, options);
  if (first_error) {
    report.partial = true;
    report.error = first_error->what();
  }
  if (!options.log_root.empty()) {
    report.log_dir = options.log_root / sha256_hex(fingerprint.dump()).substr(0, 16);
    std::filesystem::create_directories(report.log_dir);
    std::string lines;
    for (const auto& r : requests) {
      if (!r.is_null()) lines += r.dump() + "\n";
    }
    write_text(report.log_dir / "requests.jsonl", lines);
    write_text(report.log_dir / "report.json", to_json(report).dump(2) + "\n");
  }
  if (first_error) {
    const std::string where =
        report.log_dir.empty() ? "" : fmt::format(" (partial report in {})", report.log_dir.string());
    throw Error(first_error->kind(), first_error->what() + where, first_error->attempts());
  }
  return report;
}

std::vector<AblationCell> run_ablation(const llm::EndpointConfig& cfg, const std::vector<ReasoningItem>& items,
                                       const std::vector<CaptMode>& modes, const std::vector<std::uint64_t>& seeds,
                                       const std::filesystem::path& log_root) {
  if (modes.empty() || seeds.empty()) throw Error(ErrorKind::kInvalidArgument, "ablation needs modes and seeds");
  std::vector<AblationCell> cells;
  for (CaptMode mode : modes) {
    for (std::uint64_t seed : seeds) {
      EvalOptions opt;
      opt.mode = mode;
      opt.seed = seed;
      opt.log_root = log_root;
      cells.push_back({mode, seed, evaluate(cfg, items, opt)});
    }
  }
  return cells;
}

std::string ablation_csv(const std::vector<AblationCell>& cells) {
  std::string out = "mode,seed,split,accuracy,std\n";
  for (const auto& c : cells) {
    for (const auto& s : c.report.scores) {
      out += fmt::format("{},{},{},{},{}\n", to_string(c.mode), c.seed, to_string(s.split),
                         text::format_2dp(s.accuracy), text::format_2dp(c.report.std));
    }
  }
  return out;
}

std::string ablation_plot_table(const std::vector<AblationCell>& cells) {
  std::vector<CaptMode> modes;
  for (const auto& c : cells) {
    if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) modes.push_back(c.mode);
  }
  std::string out = "split";
  for (CaptMode m : modes) out += fmt::format(",{}", to_string(m));
  out += "\n";
  for (Split s : kAllSplits) {
    out += to_string(s);
    for (CaptMode m : modes) {
      double sum = 0.0;
      int n = 0;
      for (const auto& c : cells) {
        if (c.mode != m) continue;
        sum += c.report.score(s).accuracy;
        ++n;
      }
      out += "," + text::format_2dp(sum / n);
    }
    out += "\n";
  }
  return out;
}

}  // namespace capt::eval
