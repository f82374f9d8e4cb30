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

#include "capt/symbolizer.h"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "capt/error.h"
#include "capt/rng.h"
#include "capt/text.h"

namespace capt {

std::string_view to_string(CaptMode m) {
  switch (m) {
    case CaptMode::kNull:
      return "null";
    case CaptMode::kOrder:
      return "order";
    case CaptMode::kRandom:
      return "random";
  }
  return "unknown";
}

CaptMode capt_mode_from_string(std::string_view s) {
  for (CaptMode m : {CaptMode::kNull, CaptMode::kOrder, CaptMode::kRandom}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown capt mode '{}'", s));
}

namespace symbolizer {
namespace {

constexpr std::string_view kOpen = "{symbol_";
constexpr std::string_view kHeaderStart = "<think> Let X = ";

struct Claim {
  std::size_t pos;
  std::size_t len;
  std::string replacement;
};

bool overlaps(const std::vector<Claim>& claims, std::size_t pos, std::size_t len) {
  return std::any_of(claims.begin(), claims.end(),
                     [&](const Claim& c) { return pos < c.pos + c.len && c.pos < pos + len; });
}

bool is_token_at(std::string_view text, std::size_t pos, std::string_view token) {
  if (text.substr(pos, token.size()) != token) return false;
  if (pos > 0 && text::is_word_char(text[pos - 1])) return false;
  const std::size_t end = pos + token.size();
  return end == text.size() || !text::is_word_char(text[end]);
}

struct Surface {
  std::string text;
  std::string replacement;
};

std::vector<Surface> surfaces_of(const SymbolTable& table) {
  std::vector<Surface> out;
  for (const auto& e : table) {
    if (!e.name.empty()) out.push_back({e.name, e.placeholder});
    if (e.set_description && !e.set_description->empty()) out.push_back({*e.set_description, e.placeholder + "=1"});
    if (e.unset_description && !e.unset_description->empty()) {
      out.push_back({*e.unset_description, e.placeholder + "=0"});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Surface& a, const Surface& b) { return a.text.size() > b.text.size(); });
  return out;
}

void claim_surfaces(std::string_view text, const std::vector<Surface>& surfaces, std::vector<Claim>& claims) {
  for (const auto& s : surfaces) {
    for (auto pos = text::find_stem(text, s.text); pos; pos = text::find_stem(text, s.text, *pos + 1)) {
      if (!overlaps(claims, *pos, s.text.size())) claims.push_back({*pos, s.text.size(), s.replacement});
    }
  }
}

JournaledText rewrite(std::string_view text, std::vector<Claim> claims) {
  std::sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) { return a.pos < b.pos; });
  JournaledText out;
  std::size_t cursor = 0;
  for (const auto& c : claims) {
    out.text.append(text.substr(cursor, c.pos - cursor));
    out.sites.push_back({out.text.size(), c.replacement.size(), std::string(text.substr(c.pos, c.len))});
    out.text += c.replacement;
    cursor = c.pos + c.len;
  }
  out.text.append(text.substr(cursor));
  return out;
}

// CLadder traces open with "Let X = a; V2 = b; Y = c." and then use the
// role letters throughout. The header goes and each letter becomes the
// placeholder of the node it was bound to.
void claim_roles(std::string_view cot, const SymbolTable& table, std::vector<Claim>& claims) {
  if (!cot.starts_with(kHeaderStart)) return;
  const std::size_t start = kHeaderStart.size() - std::string_view("Let X = ").size();
  const auto end = cot.find(".\n\n", start);
  if (end == std::string_view::npos) return;
  claims.push_back({start, end + 3 - start, ""});

  const auto header = cot.substr(start, end - start);
  for (std::string_view role : {"X", "V2", "Y"}) {
    const auto key = fmt::format("{} = ", role);
    const auto at = header.find(key);
    if (at == std::string_view::npos) continue;
    const auto from = at + key.size();
    const auto semi = header.find(';', from);
    const auto name = header.substr(from, semi == std::string_view::npos ? semi : semi - from);
    const auto entry = std::find_if(table.begin(), table.end(), [&](const SymbolEntry& e) { return e.name == name; });
    if (entry == table.end()) continue;
    for (std::size_t pos = cot.find(role, end); pos != std::string_view::npos; pos = cot.find(role, pos + 1)) {
      if (is_token_at(cot, pos, role) && !overlaps(claims, pos, role.size())) {
        claims.push_back({pos, role.size(), entry->placeholder});
      }
    }
  }
}

SymbolTable entries_for(const ReasoningItem& item) {
  SymbolTable table;
  if (item.dataset == Dataset::kCladder) {
    if (item.events.size() % 3 != 0) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("{}: CLadder events must come in triples", item.id));
    }
    for (std::size_t i = 0; i < item.events.size(); i += 3) {
      table.push_back({"", item.events[i], item.events[i + 1], item.events[i + 2]});
    }
  } else {
    for (const auto& e : item.events) table.push_back({"", e, std::nullopt, std::nullopt});
  }
  return table;
}

// Placeholder number at `pos` (which starts with "{symbol_"), or nullopt
// when the placeholder is malformed. `end` receives the index past "}".
std::optional<int> parse_placeholder(std::string_view text, std::size_t pos, std::size_t* end) {
  std::size_t i = pos + kOpen.size();
  std::size_t digits = 0;
  int k = 0;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9' && digits < 6) {
    k = k * 10 + (text[i] - '0');
    ++i;
    ++digits;
  }
  if (digits == 0 || i >= text.size() || text[i] != '}' || text[pos + kOpen.size()] == '0') return std::nullopt;
  *end = i + 1;
  return k;
}

bool sentence_start(std::string_view text, std::size_t pos) {
  while (pos > 0 && text[pos - 1] == ' ') --pos;
  if (pos == 0) return true;
  const char c = text[pos - 1];
  return c == '.' || c == '?' || c == '!' || c == ':' || c == '\n' || c == '>';
}

// Alphanumeric runs shaped like a code ("C", "AB", "Cs"), skipping notation
// such as "E[" and "P(". Returns (start, code length) pairs.
std::vector<std::pair<std::size_t, std::size_t>> code_tokens(std::string_view s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < s.size();) {
    if (!text::is_word_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && text::is_word_char(s[j])) ++j;
    std::size_t caps = i;
    while (caps < j && s[caps] >= 'A' && s[caps] <= 'Z') ++caps;
    const bool shaped = caps > i && caps - i <= 3 && (caps == j || (caps + 1 == j && s[caps] == 's'));
    const bool notation = j < s.size() && (s[j] == '[' || s[j] == '(');
    if (shaped && !notation) out.emplace_back(i, caps - i);
    i = j;
  }
  return out;
}

}  // namespace

std::string placeholder(int k) { return fmt::format("{{symbol_{}}}", k); }

TransformedExample symbolize_with_table(const ReasoningItem& item, const SymbolTable& table) {
  const auto surfaces = surfaces_of(table);
  std::vector<Claim> prompt_claims;
  claim_surfaces(item.prompt, surfaces, prompt_claims);
  std::vector<Claim> cot_claims;
  if (item.dataset == Dataset::kCladder) claim_roles(item.gold_cot, table, cot_claims);
  claim_surfaces(item.gold_cot, surfaces, cot_claims);

  TransformedExample tx;
  tx.source_id = item.id;
  tx.dataset = item.dataset;
  tx.split = item.split;
  tx.table = table;
  tx.prompt = rewrite(item.prompt, std::move(prompt_claims));
  tx.cot = rewrite(item.gold_cot, std::move(cot_claims));
  tx.gold_answer = item.gold_answer;
  return tx;
}

TransformedExample symbolize_deterministic(const ReasoningItem& item) {
  SymbolTable table = entries_for(item);
  for (const auto& e : item.events) {
    if (!text::contains_stem(item.prompt, e)) {
      throw Error(ErrorKind::kEventNotFound, fmt::format("{}: event '{}' not found in prompt", item.id, e));
    }
  }
  // Number by first claimed position in the prompt.
  for (std::size_t i = 0; i < table.size(); ++i) table[i].placeholder = std::to_string(i);
  std::vector<Claim> claims;
  claim_surfaces(item.prompt, surfaces_of(table), claims);
  std::vector<std::size_t> first(table.size(), std::string::npos);
  for (const auto& c : claims) {
    const std::size_t idx = std::stoul(c.replacement);
    first[idx] = std::min(first[idx], c.pos);
  }
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
  SymbolTable sorted;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (first[order[i]] == std::string::npos) {
      throw Error(ErrorKind::kEventNotFound,
                  fmt::format("{}: event '{}' is shadowed by a longer event", item.id, table[order[i]].name));
    }
    sorted.push_back(table[order[i]]);
    sorted.back().placeholder = placeholder(static_cast<int>(i + 1));
  }
  return symbolize_with_table(item, sorted);
}

std::vector<Violation> verify_symbolization(const TransformedExample& tx, const ReasoningItem& original) {
  std::vector<Violation> out;
  auto add = [&](std::string kind, std::string detail) {
    Violation v{std::move(kind), std::move(detail)};
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  };

  std::set<int> declared;
  std::set<std::string> names;
  for (std::size_t i = 0; i < tx.table.size(); ++i) {
    const auto& e = tx.table[i];
    std::size_t end = 0;
    const auto k = e.placeholder.starts_with(kOpen) ? parse_placeholder(e.placeholder, 0, &end) : std::nullopt;
    if (!k || end != e.placeholder.size()) {
      add("malformed-placeholder", e.placeholder);
      continue;
    }
    if (*k != static_cast<int>(i + 1))
      add("non-contiguous-numbering", fmt::format("{} at entry {}", e.placeholder, i + 1));
    declared.insert(*k);
    if (e.name.empty()) add("empty-name", e.placeholder);
    if (!names.insert(e.name).second) add("duplicate-name", e.name);
    const bool has_desc = e.set_description.has_value() && e.unset_description.has_value();
    if (tx.dataset == Dataset::kCladder && !has_desc) add("missing-description", e.placeholder);
    if (tx.dataset == Dataset::kProntoqa && (e.set_description || e.unset_description)) {
      add("unexpected-description", e.placeholder);
    }
  }

  std::vector<std::string> events = original.events;
  for (const auto& e : tx.table) {
    for (const auto* s : {&e.name, e.set_description ? &*e.set_description : nullptr,
                          e.unset_description ? &*e.unset_description : nullptr}) {
      if (s && !s->empty()) events.push_back(*s);
    }
  }
  for (const auto* t : {&tx.prompt.text, &tx.cot.text}) {
    for (const auto& ev : events) {
      if (!ev.empty() && text::contains_stem(*t, ev)) add("residual-event", ev);
    }
  }

  std::set<int> used_in_prompt;
  for (const auto* t : {&tx.prompt.text, &tx.cot.text}) {
    for (std::size_t pos = t->find(kOpen); pos != std::string::npos; pos = t->find(kOpen, pos + 1)) {
      std::size_t end = 0;
      const auto k = parse_placeholder(*t, pos, &end);
      if (!k) {
        add("malformed-placeholder", t->substr(pos, std::min<std::size_t>(12, t->size() - pos)));
        continue;
      }
      if (!declared.contains(*k)) add("undeclared-placeholder", placeholder(*k));
      if (t == &tx.prompt.text) used_in_prompt.insert(*k);
    }
  }
  for (int k : declared) {
    if (!used_in_prompt.contains(k)) add("unused-placeholder", placeholder(k));
  }
  return out;
}

std::string letter_code(std::size_t k) {
  std::string out;
  for (std::size_t n = k + 1; n > 0; n = (n - 1) / 26) out.insert(out.begin(), static_cast<char>('A' + (n - 1) % 26));
  return out;
}

LetterAssignment assign_letters(const SymbolTable& table, CaptMode mode, std::uint64_t seed) {
  LetterAssignment a;
  a.mode = mode;
  a.seed = seed;
  if (mode == CaptMode::kNull) return a;
  const std::size_t k = table.size();
  if (mode == CaptMode::kOrder) {
    for (std::size_t i = 0; i < k; ++i) a.mapping[table[i].placeholder] = letter_code(i);
    return a;
  }
  // Pool: all codes of the shortest length class that fits k symbols.
  std::size_t pool = 26;
  for (std::size_t width = 26; pool < k;) {
    width *= 26;
    pool += width;
  }
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + rng.below(pool - i)]);
    a.mapping[table[i].placeholder] = letter_code(idx[i]);
  }
  return a;
}

JournaledText apply_assignment(const JournaledText& in, const LetterAssignment& a) {
  if (a.mode == CaptMode::kNull) return in;
  struct Edit {
    std::size_t pos, old_len, new_len;
  };
  std::vector<Edit> edits;
  JournaledText out;
  std::size_t cursor = 0;
  for (std::size_t pos = in.text.find(kOpen); pos != std::string::npos; pos = in.text.find(kOpen, pos + 1)) {
    std::size_t end = 0;
    if (!parse_placeholder(in.text, pos, &end)) continue;
    const auto ph = in.text.substr(pos, end - pos);
    const auto it = a.mapping.find(ph);
    if (it == a.mapping.end()) throw Error(ErrorKind::kUncoveredPlaceholder, fmt::format("no code for {}", ph));
    out.text.append(in.text, cursor, pos - cursor);
    out.text += it->second;
    edits.push_back({pos, end - pos, it->second.size()});
    cursor = end;
    pos = end - 1;
  }
  out.text.append(in.text, cursor);
  auto shift = [&](std::size_t p) {
    std::ptrdiff_t delta = 0;
    for (const auto& e : edits) {
      if (e.pos + e.old_len <= p)
        delta += static_cast<std::ptrdiff_t>(e.new_len) - static_cast<std::ptrdiff_t>(e.old_len);
    }
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + delta);
  };
  for (const auto& s : in.sites) {
    const std::size_t begin = shift(s.pos);
    out.sites.push_back({begin, shift(s.pos + s.len) - begin, s.original});
  }
  return out;
}

Finalized apply_assignment(const TransformedExample& tx, const LetterAssignment& a) {
  return {apply_assignment(tx.prompt, a), apply_assignment(tx.cot, a)};
}

std::string desymbolize(const JournaledText& in) {
  std::string out = in.text;
  for (auto it = in.sites.rbegin(); it != in.sites.rend(); ++it) {
    if (it->pos + it->len > out.size()) throw Error(ErrorKind::kJournalMismatch, "journal site past end of text");
    out.replace(it->pos, it->len, it->original);
  }
  return out;
}

std::string desymbolize(std::string_view text, const SymbolTable& table, const LetterAssignment& a) {
  std::vector<std::pair<std::string, const SymbolEntry*>> tokens;
  for (const auto& e : table) {
    if (a.mode == CaptMode::kNull) {
      tokens.emplace_back(e.placeholder, &e);
    } else if (const auto it = a.mapping.find(e.placeholder); it != a.mapping.end()) {
      tokens.emplace_back(it->second, &e);
    }
  }
  auto ends_token = [&](std::size_t end) {
    if (end == text.size() || !text::is_word_char(text[end])) return true;
    return text[end] == 's' && (end + 1 == text.size() || !text::is_word_char(text[end + 1]));
  };

  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const SymbolEntry* hit = nullptr;
    std::size_t len = 0;
    if (i == 0 || !text::is_word_char(text[i - 1])) {
      for (const auto& [token, entry] : tokens) {
        if (token.size() > len && text.substr(i, token.size()) == token && ends_token(i + token.size())) {
          hit = entry;
          len = token.size();
        }
      }
    }
    if (!hit) {
      out += text[i++];
      continue;
    }
    const std::string_view token = text.substr(i, len);
    const std::size_t after = i + len;
    const bool notation = after < text.size() && (text[after] == '[' || text[after] == '(');
    const bool article = token == "A" && sentence_start(text, i) && after + 1 < text.size() && text[after] == ' ' &&
                         text[after + 1] >= 'a' && text[after + 1] <= 'z';
    const bool pronoun = token == "I" && after < text.size() && text[after] == ' ';
    if (a.mode != CaptMode::kNull && (notation || article || pronoun)) {
      throw Error(ErrorKind::kAmbiguousCode, fmt::format("code '{}' also reads as an ordinary token", token));
    }
    std::string restored = hit->name;
    std::size_t consumed = len;
    if (after + 1 < text.size() && text[after] == '=' && (text[after + 1] == '1' || text[after + 1] == '0') &&
        hit->set_description && hit->unset_description) {
      restored = text[after + 1] == '1' ? *hit->set_description : *hit->unset_description;
      consumed += 2;
    }
    if (sentence_start(text, i)) restored = text::capitalize(restored);
    out += restored;
    i += consumed;
  }
  return out;
}

bool related_by_letter_bijection(std::string_view a, std::string_view b) {
  const auto ta = code_tokens(a);
  const auto tb = code_tokens(b);
  if (ta.size() != tb.size()) return false;
  std::map<std::string_view, std::string_view> fwd, back;
  std::size_t ca = 0, cb = 0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (a.substr(ca, ta[i].first - ca) != b.substr(cb, tb[i].first - cb)) return false;
    const auto x = a.substr(ta[i].first, ta[i].second);
    const auto y = b.substr(tb[i].first, tb[i].second);
    const auto [f, fresh_f] = fwd.emplace(x, y);
    const auto [r, fresh_r] = back.emplace(y, x);
    if (f->second != y || r->second != x) return false;
    ca = ta[i].first + ta[i].second;
    cb = tb[i].first + tb[i].second;
  }
  return a.substr(ca) == b.substr(cb);
}

std::vector<std::pair<std::string, std::size_t>> scan_events(std::string_view text,
                                                             const std::vector<std::string>& events) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& e : events) {
    for (auto pos = text::find_stem(text, e); pos; pos = text::find_stem(text, e, *pos + 1)) out.emplace_back(e, *pos);
  }
  return out;
}

nlohmann::json to_json(const SymbolTable& table) {
  auto arr = nlohmann::json::array();
  for (const auto& e : table) {
    arr.push_back(
        {{"placeholder", e.placeholder},
         {"name", e.name},
         {"set_description", e.set_description ? nlohmann::json(*e.set_description) : nlohmann::json()},
         {"unset_description", e.unset_description ? nlohmann::json(*e.unset_description) : nlohmann::json()}});
  }
  return arr;
}

SymbolTable table_from_json(const nlohmann::json& j) {
  SymbolTable table;
  try {
    for (const auto& e : j) {
      SymbolEntry entry;
      entry.placeholder =
          e.contains("placeholder") ? e.at("placeholder").get<std::string>() : e.at("variable").get<std::string>();
      entry.name = e.at("name").get<std::string>();
      for (auto [key, field] : {std::pair{"set_description", &entry.set_description},
                                std::pair{"unset_description", &entry.unset_description}}) {
        if (e.contains(key) && !e.at(key).is_null()) *field = e.at(key).get<std::string>();
      }
      table.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kParseError, fmt::format("bad symbol table: {}", ex.what()));
  }
  return table;
}

nlohmann::json to_json(const TransformedExample& tx, const LetterAssignment& a) {
  return {{"source_id", tx.source_id},
          {"dataset", to_string(tx.dataset)},
          {"split", to_string(tx.split)},
          {"symbol_table", to_json(tx.table)},
          {"sym_prompt", tx.prompt.text},
          {"sym_cot", tx.cot.text},
          {"gold_answer", to_string(tx.gold_answer)},
          {"assignment", {{"mode", to_string(a.mode)}, {"seed", a.seed}, {"mapping", a.mapping}}}};
}

TransformedExample transformed_from_json(const nlohmann::json& j, LetterAssignment* a) {
  TransformedExample tx;
  try {
    tx.source_id = j.at("source_id").get<std::string>();
    tx.dataset = dataset_from_string(j.at("dataset").get<std::string>());
    tx.split = split_from_string(j.at("split").get<std::string>());
    tx.table = table_from_json(j.at("symbol_table"));
    tx.prompt.text = j.at("sym_prompt").get<std::string>();
    tx.cot.text = j.at("sym_cot").get<std::string>();
    tx.gold_answer = answer_from_string(j.at("gold_answer").get<std::string>());
    if (a) {
      const auto& as = j.at("assignment");
      a->mode = capt_mode_from_string(as.at("mode").get<std::string>());
      a->seed = as.at("seed").get<std::uint64_t>();
      a->mapping = as.at("mapping").get<std::map<std::string, std::string>>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kParseError, fmt::format("bad transformed example: {}", ex.what()));
  }
  return tx;
}

}  // namespace symbolizer
}  // namespace capt
