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

#include "capt/event_estimator.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "capt/causal_oracle.h"
#include "capt/error.h"
#include "capt/resources.h"

namespace capt::estimator {
namespace {

constexpr std::string_view kSystem =
    "You are an anonymizer. Your task is to extract the abstraction of provided descriptions.";

constexpr std::string_view kUser =
    "Your task is to extract the abstraction of the following background+question paragraph and reasoning "
    "steps:\n\nbackground+question: \"{}\"\n\nReasoning steps: \"{}\"\n\n{}";

constexpr std::string_view kCladderRequirements =
    "Transform events/entities into variable symbols, denoted in order as {symbol_1}, {symbol_2}, {symbol_3}, etc; "
    "where events exist to be 1, non-exist to be 0, like {symbol_1}=1, or {symbol_1}=0.\n"
    "Outputs the following information:\n"
    "1. Variable notations:\n"
    "- the variable symbol, e.g., {symbol_1}.\n"
    "- the original name of the symbol, e.g., sister.\n"
    "- the description if the variable is true ({symbol_1}=1), e.g., have a sister.\n"
    "- the description if the variable is false ({symbol_1}=0), e.g., does not have a sister.\n"
    "2. Transformed background and question, just replace events/entities with variables.\n"
    "3. Transformed reasoning steps, ignoring the original symbol assignments and replacing them with the new "
    "symbols.";

constexpr std::string_view kProntoqaRequirements =
    "Transform all entities and adjectives into variable symbols, denoted in order as {symbol_1}, {symbol_2}, "
    "{symbol_3}, etc. Each symbol represents one thing, like an object, an attribute, an adj. etc. Do not include "
    "\"not\" in the symbol name, e.g., \"not small\" should be transformed to \"not {symbol_1}\". Also, do not "
    "include determiners like \"all\", \"each\", \"every\" and linking verbs like \"be\", \"is\", \"are\" in the "
    "symbol names.\n"
    "Outputs the following information:\n"
    "1. Variable notations:\n"
    "- the variable symbol, e.g., {symbol_1}.\n"
    "- the original name of the symbol, e.g., small/butterfly/segmented/six-legged.\n"
    "2. Transformed background and question, just replace all entities and adjectives with variables.\n"
    "3. Transformed reasoning steps with the new symbols.";

constexpr std::string_view kReplyFormat =
    "\nReply with one JSON object with the keys \"variable2name\", \"background_question\" and \"reasoning\".";

// variable2name comes either as an array or keyed by name.
nlohmann::json as_array(const nlohmann::json& v) {
  if (!v.is_object()) return v;
  auto arr = nlohmann::json::array();
  for (const auto& [k, entry] : v.items()) arr.push_back(entry);
  return arr;
}

std::vector<InContextExample> examples_from_json(const nlohmann::json& doc) {
  std::vector<InContextExample> out;
  try {
    for (const auto& e : doc) {
      InContextExample ex;
      ex.prompt = e.at("raw_prompt").get<std::string>();
      ex.response = e.at("response").get<std::string>();
      ex.background_question = e.at("background_question").get<std::string>();
      ex.reasoning = e.at("reasoning").get<std::string>();
      const auto& v = e.at("variable2name");
      ex.table = symbolizer::table_from_json(as_array(v));
      out.push_back(std::move(ex));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, fmt::format("bad in-context examples: {}", e.what()));
  }
  return out;
}

InContextExample cladder_example(const cladder::CausalStory& story, const cladder::CausalQuery& query) {
  ReasoningItem item;
  item.dataset = Dataset::kCladder;
  item.prompt = cladder::render_prompt(story, query);
  item.gold_cot = cladder::render_causalcot_trace(story, query, cladder::compute_estimand(query));
  item.events = cladder::story_events(story);
  const auto tx = symbolizer::symbolize_deterministic(item);
  return {item.prompt, item.gold_cot, tx.table, tx.prompt.text, tx.cot.text};
}

std::string strip_fence(std::string_view reply) {
  auto first = reply.find('{');
  auto last = reply.rfind('}');
  if (first == std::string_view::npos || last == std::string_view::npos || last < first) {
    throw Error(ErrorKind::kParseError, "reply contains no JSON object");
  }
  return std::string(reply.substr(first, last - first + 1));
}

}  // namespace

std::vector<InContextExample> builtin_examples(Dataset task) {
  if (task == Dataset::kProntoqa)
    return examples_from_json(nlohmann::json::parse(resources::prontoqa_in_context_json()));
  using cladder::Polarity;
  using cladder::QueryType;
  cladder::CausalStory alarm;
  alarm.graph = cladder::GraphTemplate::kMediation;
  alarm.nodes = {cladder::NodeEvent{"husband", "husband sets the alarm", "husband does not set the alarm"},
                 cladder::NodeEvent{"wife", "wife affects the alarm", "wife does not affect the alarm"},
                 cladder::NodeEvent{"alarm clock", "alarm rings", "alarm does not ring"}};
  cladder::CausalStory rixq;
  rixq.graph = cladder::GraphTemplate::kChain;
  rixq.split = Split::kNonsense;
  rixq.nodes = {cladder::NodeEvent{"rixq", "rixq occurs", "rixq does not occur"},
                cladder::NodeEvent{"zuph", "zuph occurs", "zuph does not occur"},
                cladder::NodeEvent{"xevu", "xevu occurs", "xevu does not occur"}};
  auto query = [](QueryType t, Polarity p, double p0, double p1) {
    cladder::CausalQuery q{t, p, {}};
    q.given_data.emplace(cladder::kPy1GivenX0, p0);
    q.given_data.emplace(cladder::kPy1GivenX1, p1);
    return q;
  };
  return {cladder_example(alarm, query(QueryType::kAte, Polarity::kIncrease, 0.42, 0.51)),
          cladder_example(rixq, query(QueryType::kNie, Polarity::kDecrease, 0.48, 0.36))};
}

std::vector<InContextExample> load_examples(const std::filesystem::path& path) {
  try {
    return examples_from_json(nlohmann::json::parse(read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string reply_json(const InContextExample& ex) {
  nlohmann::json j = {{"variable2name", symbolizer::to_json(ex.table)},
                      {"background_question", ex.background_question},
                      {"reasoning", ex.reasoning}};
  for (auto& v : j["variable2name"]) {
    v["variable"] = v["placeholder"];
    v.erase("placeholder");
  }
  return j.dump(2);
}

std::string user_turn(std::string_view prompt, std::string_view response, Dataset task) {
  return fmt::format(fmt::runtime(kUser), prompt, response,
                     task == Dataset::kCladder ? kCladderRequirements : kProntoqaRequirements) +
         std::string(kReplyFormat);
}

std::vector<llm::Message> anonymizer_messages(std::string_view prompt, std::string_view cot, Dataset task,
                                              const std::vector<InContextExample>& examples,
                                              std::string_view feedback) {
  std::vector<llm::Message> msgs = {{"system", std::string(kSystem)}};
  for (const auto& ex : examples) {
    msgs.push_back({"user", user_turn(ex.prompt, ex.response, task)});
    msgs.push_back({"assistant", reply_json(ex)});
  }
  std::string last = user_turn(prompt, cot, task);
  if (!feedback.empty())
    last += fmt::format("\n\nYour previous answer was rejected: {}. Fix these problems.", feedback);
  msgs.push_back({"user", std::move(last)});
  return msgs;
}

symbolizer::TransformedExample parse_reply(std::string_view reply, Dataset task) {
  symbolizer::TransformedExample tx;
  tx.dataset = task;
  try {
    const auto j = nlohmann::json::parse(strip_fence(reply));
    tx.table = symbolizer::table_from_json(as_array(j.at("variable2name")));
    tx.prompt.text = j.at("background_question").get<std::string>();
    tx.cot.text = j.at("reasoning").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, fmt::format("reply is not in the expected layout: {}", e.what()));
  }
  // The keyed-object form has no defined order; restore numbering order.
  std::stable_sort(tx.table.begin(), tx.table.end(), [](const auto& a, const auto& b) {
    return a.placeholder.size() != b.placeholder.size() ? a.placeholder.size() < b.placeholder.size()
                                                        : a.placeholder < b.placeholder;
  });
  return tx;
}

symbolizer::TransformedExample estimate_events(std::string_view prompt, std::string_view cot, Dataset task,
                                               const llm::EndpointConfig& cfg, const EstimateOptions& options) {
  const auto examples = options.examples.empty() ? builtin_examples(task) : options.examples;
  std::string feedback;
  const int attempts = options.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    const auto reply =
        llm::complete(cfg, anonymizer_messages(prompt, cot, task, examples, feedback), options.item_id).content;
    try {
      auto tx = parse_reply(reply, task);
      ReasoningItem original;
      original.id = options.item_id;
      original.dataset = task;
      original.prompt = std::string(prompt);
      original.gold_cot = std::string(cot);
      const auto violations = symbolizer::verify_symbolization(tx, original);
      if (violations.empty()) {
        tx.source_id = options.item_id;
        return tx;
      }
      std::vector<std::string> parts;
      for (const auto& v : violations) parts.push_back(fmt::format("{} ({})", v.kind, v.detail));
      feedback = fmt::format("{}", fmt::join(parts, "; "));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kParseError) throw;
      feedback = e.what();
    }
    spdlog::warn("{}: anonymizer reply rejected on attempt {}/{}: {}", options.item_id, attempt, attempts, feedback);
  }
  throw Error(ErrorKind::kExtractionFailed,
              fmt::format("no valid symbolization after {} attempts: {}", attempts, feedback), attempts);
}

}  // namespace capt::estimator
