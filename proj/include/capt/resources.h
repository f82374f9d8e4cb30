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

#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>

#include "capt/rng.h"

namespace capt::resources {

// Files under data/, compiled into the binary.
std::string_view lexicon_text();
std::string_view prontoqa_in_context_json();

// Lowercased lexicon words.
const std::unordered_set<std::string_view>& lexicon();
bool in_lexicon(std::string_view word);

// Random lowercase a-z word of length 3..6 that is outside the lexicon and
// not rejected by `reject`.
std::string nonsense_word(SplitMix64& rng, const std::function<bool(const std::string&)>& reject);

}  // namespace capt::resources
