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

#include "capt/causal_oracle.h"
#include "capt/reasoning_item.h"

namespace capt::test {

inline cladder::CausalStory alarm_story() {
  cladder::CausalStory s;
  s.graph = cladder::GraphTemplate::kMediation;
  s.nodes = {cladder::NodeEvent{"husband", "husband sets the alarm", "husband does not set the alarm"},
             cladder::NodeEvent{"wife", "wife affects the alarm", "wife does not affect the alarm"},
             cladder::NodeEvent{"alarm clock", "alarm rings", "alarm does not ring"}};
  return s;
}

inline cladder::CausalStory rixq_story() {
  cladder::CausalStory s;
  s.graph = cladder::GraphTemplate::kChain;
  s.split = Split::kNonsense;
  s.nodes = {cladder::NodeEvent{"rixq", "rixq occurs", "rixq does not occur"},
             cladder::NodeEvent{"zuph", "zuph occurs", "zuph does not occur"},
             cladder::NodeEvent{"xevu", "xevu occurs", "xevu does not occur"}};
  return s;
}

inline cladder::CausalQuery two_point(cladder::QueryType type, cladder::Polarity pol, double p0, double p1) {
  cladder::CausalQuery q;
  q.type = type;
  q.polarity = pol;
  q.given_data.emplace(cladder::kPy1GivenX0, p0);
  q.given_data.emplace(cladder::kPy1GivenX1, p1);
  return q;
}

// The two worked CLadder examples as items.
inline ReasoningItem worked_cladder_item(int which) {
  using cladder::Polarity;
  using cladder::QueryType;
  const auto story = which == 0 ? alarm_story() : rixq_story();
  const auto q = which == 0 ? two_point(QueryType::kAte, Polarity::kIncrease, 0.42, 0.51)
                            : two_point(QueryType::kNie, Polarity::kDecrease, 0.48, 0.36);
  ReasoningItem item;
  item.id = which == 0 ? "worked-ate" : "worked-nie";
  item.dataset = Dataset::kCladder;
  item.split = story.split;
  item.prompt = cladder::render_prompt(story, q);
  item.gold_cot = cladder::render_causalcot_trace(story, q, cladder::compute_estimand(q));
  item.gold_answer = Answer::kYes;
  item.events = cladder::story_events(story);
  return item;
}

}  // namespace capt::test
