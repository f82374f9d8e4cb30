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

#include <string>
#include <vector>

namespace capt::oracle {

// Regex-based stand-in for the library's stem matcher: `word` at a word
// boundary, first letter in either case, optional plural "s".
bool mentions(const std::string& text, const std::string& word);

// Words from `words` mentioned anywhere in `text`.
std::vector<std::string> mentioned(const std::string& text, const std::vector<std::string>& words);

}  // namespace capt::oracle
