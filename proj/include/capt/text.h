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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace capt::text {

inline bool is_word_char(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
inline char ascii_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

std::string capitalize(std::string_view s);
std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);

// "a" or "an" for the noun phrase that follows.
std::string_view indefinite_article(std::string_view noun);

// Fixed two-decimal rendering ("0.09", "-0.12").
std::string format_2dp(double value);

// Stem-level match: `stem` occurs at `pos` starting on a word boundary,
// comparing the first character case-insensitively and the rest exactly,
// and ending on a word boundary, optionally followed by a plural "s".
// Possessive "'s" needs no special case since the apostrophe is a boundary.
bool stem_matches_at(std::string_view text, std::size_t pos, std::string_view stem);

// First stem-level occurrence of `stem` at or after `from`.
std::optional<std::size_t> find_stem(std::string_view text, std::string_view stem, std::size_t from = 0);

inline bool contains_stem(std::string_view text, std::string_view stem) { return find_stem(text, stem).has_value(); }

}  // namespace capt::text
