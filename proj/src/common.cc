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

#include <cmath>
#include <cstdio>

#include "capt/error.h"
#include "capt/text.h"

namespace capt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kStateSpaceTooLarge:
      return "state-space-too-large";
    case ErrorKind::kCyclicGraph:
      return "cyclic-graph";
    case ErrorKind::kInvalidModel:
      return "invalid-model";
    case ErrorKind::kZeroProbabilityEvidence:
      return "zero-probability-evidence";
    case ErrorKind::kUnknownVariable:
      return "unknown-variable";
    case ErrorKind::kOutOfRangeState:
      return "out-of-range-state";
    case ErrorKind::kRoleShapeMismatch:
      return "role-shape-mismatch";
    case ErrorKind::kMissingDataField:
      return "missing-data-field";
    case ErrorKind::kUndecidableQuery:
      return "undecidable-query";
    case ErrorKind::kEventNotFound:
      return "event-not-found";
    case ErrorKind::kEndpointError:
      return "endpoint-error";
    case ErrorKind::kTimeout:
      return "timeout";
    case ErrorKind::kExtractionFailed:
      return "extraction-failed";
    case ErrorKind::kUncoveredPlaceholder:
      return "uncovered-placeholder";
    case ErrorKind::kAmbiguousCode:
      return "ambiguous-code";
    case ErrorKind::kJournalMismatch:
      return "journal-mismatch";
    case ErrorKind::kIoError:
      return "io-error";
    case ErrorKind::kParseError:
      return "parse-error";
    case ErrorKind::kEventFreedomViolation:
      return "event-freedom-violation";
    case ErrorKind::kExistsError:
      return "exists-error";
    case ErrorKind::kInvalidArgument:
      return "invalid-argument";
  }
  return "unknown";
}

namespace text {

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = ascii_upper(out[0]);
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
  }
  return true;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view indefinite_article(std::string_view noun) {
  if (noun.empty()) return "a";
  switch (ascii_lower(noun[0])) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return "an";
    default:
      return "a";
  }
}

std::string format_2dp(double value) {
  // Values are differences of two-decimal quantities; round half away from
  // zero on the exact cent grid so 0.09000000000000002 prints as 0.09.
  double cents = std::round(value * 100.0);
  if (cents == 0.0) cents = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", cents / 100.0);
  return buf;
}

bool stem_matches_at(std::string_view text, std::size_t pos, std::string_view stem) {
  if (stem.empty() || pos + stem.size() > text.size()) return false;
  if (pos > 0 && is_word_char(text[pos - 1])) return false;
  if (ascii_lower(text[pos]) != ascii_lower(stem[0])) return false;
  if (text.compare(pos + 1, stem.size() - 1, stem.substr(1)) != 0) return false;
  std::size_t end = pos + stem.size();
  if (end == text.size() || !is_word_char(text[end])) return true;
  return text[end] == 's' && (end + 1 == text.size() || !is_word_char(text[end + 1]));
}

std::optional<std::size_t> find_stem(std::string_view text, std::string_view stem, std::size_t from) {
  if (stem.empty()) return std::nullopt;
  for (std::size_t pos = from; pos + stem.size() <= text.size(); ++pos) {
    if (stem_matches_at(text, pos, stem)) return pos;
  }
  return std::nullopt;
}

}  // namespace text
}  // namespace capt
