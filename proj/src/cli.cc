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

#include "capt/cli.h"

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/pattern_formatter.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>
#include <CLI11.hpp>

#include "capt/causal_oracle.h"
#include "capt/dataset_emitter.h"
#include "capt/digest.h"
#include "capt/error.h"
#include "capt/eval_harness.h"
#include "capt/event_estimator.h"
#include "capt/ontology.h"
#include "capt/rng.h"
#include "capt/scm.h"
#include "capt/text.h"

namespace capt::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kIdentityTolerance = 1e-10;

// Message payload as a JSON string literal.
class JsonPayload : public spdlog::custom_flag_formatter {
 public:
  void format(const spdlog::details::log_msg& msg, const std::tm&, spdlog::memory_buf_t& dest) override {
    const auto s = nlohmann::json(std::string(msg.payload.data(), msg.payload.size())).dump();
    dest.append(s.data(), s.data() + s.size());
  }
  std::unique_ptr<custom_flag_formatter> clone() const override { return std::make_unique<JsonPayload>(); }
};

class LoggerScope {
 public:
  LoggerScope(std::ostream& err, bool json, const std::string& level) : previous_(spdlog::default_logger()) {
    auto logger = std::make_shared<spdlog::logger>("capt", std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true));
    auto formatter = std::make_unique<spdlog::pattern_formatter>();
    if (json) {
      formatter->add_flag<JsonPayload>('*').set_pattern(R"({"ts":"%Y-%m-%dT%H:%M:%S.%e","level":"%l","msg":%*})");
    } else {
      formatter->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
    }
    logger->set_formatter(std::move(formatter));
    logger->set_level(spdlog::level::from_str(level));
    spdlog::set_default_logger(std::move(logger));
  }
  ~LoggerScope() { spdlog::set_default_logger(previous_); }

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

struct Globals {
  bool json_logs = false;
  std::string log_level = "info";
  bool force = false;
};

void ensure_fresh(const fs::path& p, bool force) {
  if (fs::exists(p) && !force) {
    throw Error(ErrorKind::kExistsError, fmt::format("{} exists (pass --force to overwrite)", p.string()));
  }
}

fs::path snapshot_path(const fs::path& output_file) {
  auto p = output_file;
  p.replace_filename(output_file.stem().string() + ".config.toml");
  return p;
}

// Resolved values of every option, in the format --config reads.
std::string snapshot(const CLI::App& app) {
  const std::string active = app.get_subcommands().front()->get_name() + ".";
  std::istringstream in(app.config_to_str(true, false));
  std::string out;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    if (key == "force" || key == "config" || value == "\"\"") continue;
    if (key.find('.') != std::string::npos && key.rfind(active, 0) != 0) continue;
    out += line + "\n";
  }
  return out;
}

std::vector<Split> parse_splits(const std::string& s) {
  if (s == "all") return {std::begin(kAllSplits), std::end(kAllSplits)};
  std::vector<Split> out;
  for (const auto& part : text::split(s, ',')) out.push_back(split_from_string(text::trim(part)));
  return out;
}

std::vector<CaptMode> parse_modes(const std::string& s) {
  std::vector<CaptMode> out;
  for (const auto& part : text::split(s, ',')) out.push_back(capt_mode_from_string(text::trim(part)));
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& part : text::split(s, ',')) {
    try {
      out.push_back(std::stoull(std::string(text::trim(part))));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("bad seed '{}'", part));
    }
  }
  return out;
}

struct EndpointFlags {
  llm::EndpointConfig cfg;
  std::string prompt_mode = "cot";

  llm::EndpointConfig resolve() const {
    auto c = cfg;
    c.prompt_mode = llm::prompt_mode_from_string(prompt_mode);
    llm::validate(c);
    return c;
  }
};

void add_endpoint_options(CLI::App* app, EndpointFlags& f) {
  app->add_option("--endpoint-url", f.cfg.base_url, "Chat-completions base URL")->capture_default_str();
  app->add_option("--model", f.cfg.model_name, "Model name")->capture_default_str();
  app->add_option("--api-key-env", f.cfg.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  app->add_option("--temperature", f.cfg.temperature)->capture_default_str();
  app->add_option("--max-in-flight", f.cfg.max_in_flight)->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--timeout-ms", f.cfg.timeout_ms)->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--retry-max", f.cfg.retry_max)->capture_default_str()->check(CLI::NonNegativeNumber);
  app->add_option("--backoff-ms", f.cfg.backoff_ms)->capture_default_str()->check(CLI::NonNegativeNumber);
  app->add_option("--prompt-mode", f.prompt_mode)
      ->capture_default_str()
      ->check(CLI::IsMember({"direct", "cot", "cot_ic"}));
  app->add_option("--in-context-file", f.cfg.in_context_file, "In-context examples (JSON)")->check(CLI::ExistingFile);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
// capt::Error after every worker stops.
template <typename F>
void parallel_for(std::size_t n, int workers, F fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  std::optional<Error> first;
  auto work = [&] {
    for (std::size_t i = next++; i < n && !abort; i = next++) {
      try {
        fn(i);
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (!first) first = e;
        abort = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min<std::size_t>(static_cast<std::size_t>(workers), n); ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first) throw *first;
}

void print_report(std::ostream& out, const eval::EvalReport& r) {
  for (const auto& s : r.scores) {
    out << fmt::format("{:<12} {:>6}  ({}/{}, {} unparsed)\n", to_string(s.split), text::format_2dp(s.accuracy),
                       s.n_correct, s.n_total, s.n_unparsed);
  }
  out << fmt::format("{:<12} {:>6}\n", "std", text::format_2dp(r.std));
}

struct GenerateArgs {
  std::string dataset;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string splits = "all";
  std::string out;
  std::string graph = "alternate";
  int min_hops = 3;
  int max_hops = 5;
  int min_distractors = 3;
  int max_distractors = 8;
};

void cmd_generate(const GenerateArgs& a, const Globals& g, const CLI::App& app, std::ostream& out) {
  const fs::path dir(a.out);
  const auto items_path = dir / "items.jsonl";
  const auto manifest = dir / "manifest.json";
  const auto config = dir / "config.toml";
  for (const auto& p : {items_path, manifest, config}) ensure_fresh(p, g.force);
  const auto splits = parse_splits(a.splits);

  std::vector<ReasoningItem> items;
  nlohmann::json generator;
  if (a.dataset == "cladder") {
    std::optional<cladder::GraphTemplate> graph;
    if (a.graph != "alternate") graph = cladder::template_from_string(a.graph);
    items = cladder::generate_cladder_batch(a.n, a.seed, splits, graph);
    generator = {{"graph", a.graph}};
  } else {
    ontology::BatchOptions opt{a.min_hops, a.max_hops, a.min_distractors, a.max_distractors};
    items = ontology::generate_prontoqa_batch(a.n, a.seed, splits, opt);
    generator = {{"min_hops", a.min_hops},
                 {"max_hops", a.max_hops},
                 {"min_distractors", a.min_distractors},
                 {"max_distractors", a.max_distractors}};
  }

  std::string body;
  nlohmann::json counts = nlohmann::json::object();
  auto entries = nlohmann::json::array();
  for (const auto& item : items) {
    body += to_json(item).dump() + "\n";
    counts[std::string(to_string(item.split))] = counts.value(std::string(to_string(item.split)), 0) + 1;
    entries.push_back({{"id", item.id}, {"seed", item.seed_trace}});
  }
  auto split_names = nlohmann::json::array();
  for (Split s : splits) split_names.push_back(to_string(s));
  const nlohmann::json m = {
      {"dataset", a.dataset},  {"seed", a.seed},   {"n_per_split", a.n},     {"splits", split_names},
      {"count", items.size()}, {"counts", counts}, {"generator", generator}, {"items_sha256", sha256_hex(body)},
      {"items", entries}};
  fs::create_directories(dir);
  write_text(items_path, body);
  write_text(manifest, m.dump(2) + "\n");
  write_text(config, snapshot(app));
  spdlog::info("generated {} {} items into {}", items.size(), a.dataset, dir.string());
  out << fmt::format("{} items written to {}\n", items.size(), items_path.string());
}

struct TransformArgs {
  std::string items;
  std::string mode = "random";
  std::uint64_t seed = 0;
  std::string out;
  std::string backend = "deterministic";
  EndpointFlags endpoint;
};

void cmd_transform(const TransformArgs& a, const Globals& g, const CLI::App& app, std::ostream& out) {
  const fs::path path(a.out);
  ensure_fresh(path, g.force);
  ensure_fresh(snapshot_path(path), g.force);
  const auto items = read_items(a.items);
  const auto mode = capt_mode_from_string(a.mode);
  std::vector<std::string> lines(items.size());
  auto one = [&](std::size_t i, const std::optional<llm::EndpointConfig>& cfg) {
    const auto& item = items[i];
    symbolizer::TransformedExample tx;
    if (cfg) {
      estimator::EstimateOptions opt;
      opt.item_id = item.id;
      tx = estimator::estimate_events(item.prompt, item.gold_cot, item.dataset, *cfg, opt);
      tx.split = item.split;
      tx.gold_answer = item.gold_answer;
    } else {
      tx = symbolizer::symbolize_deterministic(item);
    }
    lines[i] = symbolizer::to_json(tx, symbolizer::assign_letters(tx.table, mode, derive_seed(a.seed, item.id))).dump();
  };
  if (a.backend == "llm") {
    const auto cfg = a.endpoint.resolve();
    parallel_for(items.size(), cfg.max_in_flight, [&](std::size_t i) { one(i, cfg); });
  } else {
    for (std::size_t i = 0; i < items.size(); ++i) one(i, std::nullopt);
  }
  std::string body;
  for (const auto& l : lines) body += l + "\n";
  write_text(path, body);
  write_text(snapshot_path(path), snapshot(app));
  out << fmt::format("{} transformed examples written to {}\n", items.size(), path.string());
}

struct EmitArgs {
  std::string items;
  std::string format = "cot";
  std::string mode = "random";
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  int reassign_per_copy = 1;
  std::string out;
};

void cmd_emit(const EmitArgs& a, const Globals& g, const CLI::App& app, std::ostream& out) {
  const fs::path path(a.out);
  for (const auto& p : {path, emitter::manifest_path(path), snapshot_path(path)}) ensure_fresh(p, g.force);
  emitter::EmitOptions opt;
  opt.format = emitter::sft_format_from_string(a.format);
  opt.mode = capt_mode_from_string(a.mode);
  opt.seed = a.seed;
  opt.n_samples = a.n_samples;
  opt.reassign_per_copy = a.reassign_per_copy;
  auto emission = emitter::emit_sft(read_items(a.items), opt);
  emission.manifest["source"] = {{"items", a.items}, {"items_sha256", sha256_hex(read_text(a.items))}};
  write_emission(path, emission);
  write_text(snapshot_path(path), snapshot(app));
  out << fmt::format("{} records written to {}\n", emission.records.size(), path.string());
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const auto violations = emitter::validate_sft(path);
  for (const auto& v : violations) out << fmt::format("line {}: {}: {}\n", v.line, v.kind, v.detail);
  if (!violations.empty()) {
    spdlog::error("{}: {} violation(s)", path, violations.size());
    return 1;
  }
  out << fmt::format("{}: ok\n", path);
  return 0;
}

struct EvalArgs {
  EndpointFlags endpoint;
  std::string items;
  std::string mode = "null";
  std::uint64_t seed = 0;
  std::string out;
  bool llm_estimation = false;
};

void cmd_eval(const EvalArgs& a, const Globals& g, const CLI::App& app, std::ostream& out) {
  const fs::path path(a.out);
  ensure_fresh(path, g.force);
  ensure_fresh(snapshot_path(path), g.force);
  const auto cfg = a.endpoint.resolve();
  eval::EvalOptions opt;
  opt.mode = capt_mode_from_string(a.mode);
  opt.seed = a.seed;
  opt.log_root = path.parent_path() / "logs";
  if (a.llm_estimation) opt.estimator = cfg;
  write_text(snapshot_path(path), snapshot(app));
  const auto report = eval::evaluate(cfg, read_items(a.items), opt);
  write_text(path, eval::to_json(report).dump(2) + "\n");
  spdlog::info("run log: {}", report.log_dir.string());
  print_report(out, report);
}

struct AblateArgs {
  EndpointFlags endpoint;
  std::string items;
  std::string modes = "null,order,random";
  std::string seeds = "0";
  std::string out;
};

void cmd_ablate(const AblateArgs& a, const Globals& g, const CLI::App& app, std::ostream& out) {
  const fs::path dir(a.out);
  const auto csv = dir / "ablation.csv";
  const auto table = dir / "accuracy_by_mode.csv";
  const auto config = dir / "config.toml";
  for (const auto& p : {csv, table, config}) ensure_fresh(p, g.force);
  const auto cfg = a.endpoint.resolve();
  const auto modes = parse_modes(a.modes);
  const auto seeds = parse_seeds(a.seeds);
  fs::create_directories(dir / "reports");
  write_text(config, snapshot(app));
  const auto cells = eval::run_ablation(cfg, read_items(a.items), modes, seeds, dir / "logs");
  for (const auto& c : cells) {
    write_text(dir / "reports" / fmt::format("{}-{}.json", to_string(c.mode), c.seed),
               eval::to_json(c.report).dump(2) + "\n");
  }
  write_text(csv, eval::ablation_csv(cells));
  write_text(table, eval::ablation_plot_table(cells));
  out << eval::ablation_csv(cells);
}

struct VerifyArgs {
  std::string shape = "fig1d";
  std::uint64_t seed = 0;
  bool no_confounder = false;
  std::string scm_file;
};

int cmd_verify_scm(const VerifyArgs& a, std::ostream& out) {
  scm::SeededScm model;
  if (a.scm_file.empty()) {
    model = scm::make_random_scm(scm::shape_from_string(a.shape), a.seed, !a.no_confounder);
  } else {
    model.scm = scm::DiscreteScm::from_json(nlohmann::json::parse(read_text(a.scm_file)));
    if (model.scm.graph().find("U")) model.roles.u = "U";
  }
  const auto report = scm::verify_capt_identities(model.scm, model.roles);
  std::vector<std::string> shapes;
  for (auto s : report.shapes) shapes.emplace_back(to_string(s));
  out << fmt::format("shapes: {}\n", fmt::join(shapes, ", "));
  for (const auto& c : report.checks) out << fmt::format("{}: max discrepancy {:.3e}\n", c.identity, c.max_discrepancy);
  if (report.confounder_gap) out << fmt::format("confounder gap: {:.6f}\n", *report.confounder_gap);
  const bool ok = report.worst() <= kIdentityTolerance;
  out << (ok ? "PASS" : "FAIL") << fmt::format(" (tolerance {:.0e})\n", kIdentityTolerance);
  return ok ? 0 : 1;
}

void report_error(std::ostream& err, bool json, std::string_view kind, std::string_view message, int attempts) {
  if (json) {
    nlohmann::json j = {{"level", "error"}, {"kind", kind}, {"message", message}};
    if (attempts > 0) j["attempts"] = attempts;
    err << j.dump() << "\n";
  } else {
    err << fmt::format("capt: error[{}]: {}\n", kind, message);
  }
}

}  // namespace

std::string_view version() { return CAPT_VERSION; }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CAPT toolkit: generate, transform, emit, evaluate, ablate.", "capt"};
  app.set_version_flag("--version", std::string(version()));
  app.set_config("--config", "", "Read options from a TOML-style file (flags given on the command line win)");
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json-logs", g.json_logs, "Log as JSON lines on stderr");
  app.add_option("--log-level", g.log_level)
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_flag("--force", g.force, "Overwrite existing outputs");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate benchmark items for all requested splits");
  generate->add_option("dataset", gen.dataset)->required()->check(CLI::IsMember({"cladder", "prontoqa"}));
  generate->add_option("--n", gen.n, "Items per split")->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--splits", gen.splits, "all or a comma list")->capture_default_str();
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--graph", gen.graph)
      ->capture_default_str()
      ->check(CLI::IsMember({"alternate", "chain", "mediation"}));
  generate->add_option("--min-hops", gen.min_hops)->capture_default_str();
  generate->add_option("--max-hops", gen.max_hops)->capture_default_str();
  generate->add_option("--min-distractors", gen.min_distractors)->capture_default_str();
  generate->add_option("--max-distractors", gen.max_distractors)->capture_default_str();

  TransformArgs tr;
  auto* transform = app.add_subcommand("transform", "Symbolize items and assign letter codes");
  transform->add_option("--items", tr.items)->required()->check(CLI::ExistingFile);
  transform->add_option("--mode", tr.mode)->capture_default_str()->check(CLI::IsMember({"null", "order", "random"}));
  transform->add_option("--seed", tr.seed)->capture_default_str();
  transform->add_option("--out", tr.out, "Output JSONL")->required();
  transform->add_option("--backend", tr.backend)->capture_default_str()->check(CLI::IsMember({"deterministic", "llm"}));
  add_endpoint_options(transform, tr.endpoint);

  EmitArgs em;
  auto* emit = app.add_subcommand("emit", "Emit supervised fine-tuning records");
  emit->add_option("--items", em.items)->required()->check(CLI::ExistingFile);
  emit->add_option("--format", em.format)->capture_default_str()->check(CLI::IsMember({"cot", "answer_only"}));
  emit->add_option("--mode", em.mode)->capture_default_str()->check(CLI::IsMember({"null", "order", "random"}));
  emit->add_option("--seed", em.seed)->capture_default_str();
  emit->add_option("--n-samples", em.n_samples, "0 keeps every item")->capture_default_str();
  emit->add_option("--reassign-per-copy", em.reassign_per_copy)->capture_default_str()->check(CLI::PositiveNumber);
  emit->add_option("--out", em.out, "Output JSONL")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check an emitted SFT file");
  validate->add_option("path", validate_path)->required()->check(CLI::ExistingFile);

  EvalArgs ev;
  auto* evaluate = app.add_subcommand("eval", "Evaluate an endpoint over the three splits");
  add_endpoint_options(evaluate, ev.endpoint);
  evaluate->add_option("--items", ev.items)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--mode", ev.mode)->capture_default_str()->check(CLI::IsMember({"null", "order", "random"}));
  evaluate->add_option("--seed", ev.seed)->capture_default_str();
  evaluate->add_option("--out", ev.out, "Report JSON")->required();
  evaluate->add_flag("--llm-estimation", ev.llm_estimation, "Estimate events through the endpoint");

  AblateArgs ab;
  auto* ablate = app.add_subcommand("ablate", "Evaluate every (mode, seed) cell");
  add_endpoint_options(ablate, ab.endpoint);
  ablate->add_option("--items", ab.items)->required()->check(CLI::ExistingFile);
  ablate->add_option("--modes", ab.modes)->capture_default_str();
  ablate->add_option("--seeds", ab.seeds)->capture_default_str();
  ablate->add_option("--out", ab.out, "Output directory")->required();

  VerifyArgs vs;
  auto* verify = app.add_subcommand("verify-scm", "Check the debiasing identities on a seeded or given SCM");
  verify->add_option("--shape", vs.shape)
      ->capture_default_str()
      ->check(CLI::IsMember({"fig1a", "fig1b", "fig1c", "fig1d"}));
  verify->add_option("--seed", vs.seed)->capture_default_str();
  verify->add_flag("--no-confounder", vs.no_confounder, "Omit U from fig1d");
  verify->add_option("--scm", vs.scm_file, "SCM JSON instead of a seeded one")->check(CLI::ExistingFile);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "capt: " << e.what() << "\n\n";
    const auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failed->help();
    return 2;
  }

  LoggerScope logging(err, g.json_logs, g.log_level);
  try {
    if (*generate) cmd_generate(gen, g, app, out);
    if (*transform) cmd_transform(tr, g, app, out);
    if (*emit) cmd_emit(em, g, app, out);
    if (*validate) return cmd_validate(validate_path, out);
    if (*evaluate) cmd_eval(ev, g, app, out);
    if (*ablate) cmd_ablate(ab, g, app, out);
    if (*verify) return cmd_verify_scm(vs, out);
    return 0;
  } catch (const Error& e) {
    report_error(err, g.json_logs, to_string(e.kind()), e.what(), e.attempts());
  } catch (const nlohmann::json::exception& e) {
    report_error(err, g.json_logs, to_string(ErrorKind::kParseError), e.what(), 0);
  } catch (const fs::filesystem_error& e) {
    report_error(err, g.json_logs, to_string(ErrorKind::kIoError), e.what(), 0);
  }
  return 1;
}

}  // namespace capt::cli
