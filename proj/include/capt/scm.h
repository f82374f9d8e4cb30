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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace capt::scm {

// Largest joint state space enumerate_joint accepts.
inline constexpr std::size_t kMaxStates = std::size_t{1} << 20;
// Tolerance for probability vectors (per CPT row) and total joint mass.
inline constexpr double kRowTolerance = 1e-12;
inline constexpr double kMassTolerance = 1e-10;

struct Variable {
  std::string name;
  int arity = 2;

  bool operator==(const Variable&) const = default;
};

class CausalGraph {
 public:
  // Throws kInvalidModel on duplicate names or arity < 2.
  int add_node(Variable v);
  // Throws kUnknownVariable for undeclared endpoints and kInvalidModel for
  // duplicate edges or self loops.
  void add_edge(const std::string& parent, const std::string& child);
  void remove_incoming(int child);

  const std::vector<Variable>& nodes() const { return nodes_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::optional<int> find(const std::string& name) const;
  int index_of(const std::string& name) const;  // throws kUnknownVariable
  std::vector<int> parents(int child) const;
  bool has_edge(const std::string& parent, const std::string& child) const;

  // Kahn's algorithm; throws kCyclicGraph.
  std::vector<int> topological_order() const;

 private:
  std::vector<Variable> nodes_;
  std::vector<std::pair<int, int>> edges_;
};

// Conditional probability table. Rows are indexed by the mixed-radix value
// of the parent states, first parent most significant.
struct Cpt {
  int child = -1;
  std::vector<int> parents;
  std::vector<std::vector<double>> rows;
};

class DiscreteScm {
 public:
  DiscreteScm() = default;
  // Validates every invariant (acyclic graph, one CPT per node whose parent
  // set equals the graph parents, normalized rows); throws on violation.
  DiscreteScm(CausalGraph graph, std::vector<Cpt> cpts);

  const CausalGraph& graph() const { return graph_; }
  const std::vector<Cpt>& cpts() const { return cpts_; }
  const Cpt& cpt(int node) const { return cpts_[static_cast<std::size_t>(node)]; }
  const Cpt& cpt(const std::string& name) const { return cpt(graph_.index_of(name)); }

  // P(node = state | parents) with parent states taken from `states`, which
  // is indexed by node id.
  double conditional(int node, const std::vector<int>& states) const;
  // Same lookup keyed by variable name; every parent must be present.
  double conditional(const std::string& node, const std::map<std::string, int>& states) const;

  std::size_t state_space() const;

  static DiscreteScm from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

 private:
  friend DiscreteScm apply_do(const DiscreteScm&, const std::map<std::string, int>&);
  friend DiscreteScm randomize(const DiscreteScm&, const std::string&);
  void validate() const;

  CausalGraph graph_;
  std::vector<Cpt> cpts_;
};

using Assignment = std::map<std::string, int>;

// Table over a list of variables, row-major with the last variable fastest.
class Factor {
 public:
  Factor() = default;
  Factor(std::vector<Variable> scope, std::vector<double> values);

  const std::vector<Variable>& scope() const { return scope_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::optional<std::size_t> position(const std::string& name) const;
  double at(const std::vector<int>& states) const;
  double at(const Assignment& assignment) const;  // full assignment by name
  std::vector<int> decode(std::size_t index) const;
  double sum() const;

 private:
  std::size_t encode(const std::vector<int>& states) const;

  std::vector<Variable> scope_;
  std::vector<double> values_;
};

Factor enumerate_joint(const DiscreteScm& scm);
Factor condition(const Factor& joint, const Assignment& evidence);
// Sums out every variable not listed in `keep`; output keeps the factor's
// variable order.
Factor marginalize(const Factor& factor, const std::vector<std::string>& keep);

// Graph surgery: intervened nodes lose their incoming edges and get a
// point-mass CPT. The input SCM is not modified.
DiscreteScm apply_do(const DiscreteScm& scm, const Assignment& interventions);
// Randomized assignment: the node loses its incoming edges and gets a
// uniform CPT.
DiscreteScm randomize(const DiscreteScm& scm, const std::string& node);

enum class Shape { kFig1a, kFig1b, kFig1c, kFig1d };

std::string_view to_string(Shape shape);
Shape shape_from_string(std::string_view name);

struct Roles {
  std::string e = "E";
  std::string s = "S";
  std::string x = "X";
  std::string y = "Y";
  std::optional<std::string> u;
};

bool matches_shape(const DiscreteScm& scm, const Roles& roles, Shape shape);

struct IdentityCheck {
  std::string identity;  // "total_probability" ... "uniform_event_adjustment", "post_surgery_structural"
  double max_discrepancy = 0.0;
};

struct IdentityReport {
  std::vector<Shape> shapes;  // every shape the SCM matched
  std::vector<IdentityCheck> checks;
  // max over x,y of |P(y|x) - sum_s P(y|s)P(s|x)|; set for fig1b only.
  std::optional<double> confounder_gap;

  double worst() const;
  const IdentityCheck* find(std::string_view identity) const;
  nlohmann::json to_json() const;
};

// Throws kRoleShapeMismatch when the graph is none of the four shapes.
IdentityReport verify_capt_identities(const DiscreteScm& scm, const Roles& roles);

// Seeded SCM of the given shape with strictly positive CPT rows; arities
// drawn from {2, 3}. fig1d includes U (U -> Y) when `with_confounder`.
struct SeededScm {
  DiscreteScm scm;
  Roles roles;
};
SeededScm make_random_scm(Shape shape, std::uint64_t seed, bool with_confounder = true);

}  // namespace capt::scm
