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

#include "capt/resources.h"

#include <string>

#include "capt/text.h"
#include "embedded_data.h"

namespace capt::resources {

std::string_view lexicon_text() { return embedded::kLexicon; }
std::string_view prontoqa_in_context_json() { return embedded::kProntoqaInContext; }

const std::unordered_set<std::string_view>& lexicon() {
  static const auto* words = [] {
    auto* set = new std::unordered_set<std::string_view>;
    std::string_view all = lexicon_text();
    std::size_t start = 0;
    while (start < all.size()) {
      auto end = all.find('\n', start);
      if (end == std::string_view::npos) end = all.size();
      auto w = text::trim(all.substr(start, end - start));
      if (!w.empty()) set->insert(w);
      start = end + 1;
    }
    return set;
  }();
  return *words;
}

bool in_lexicon(std::string_view word) { return lexicon().contains(text::to_lower(word)); }

std::string nonsense_word(SplitMix64& rng, const std::function<bool(const std::string&)>& reject) {
  while (true) {
    const int len = rng.range(3, 6);
    std::string word;
    for (int i = 0; i < len; ++i) word += static_cast<char>('a' + rng.below(26));
    if (!in_lexicon(word) && !reject(word)) return word;
  }
}

}  // namespace capt::resources
