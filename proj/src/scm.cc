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

#include "capt/scm.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "capt/error.h"
#include "capt/rng.h"
#include "capt/text.h"

namespace capt::scm {
namespace {

Error invalid(const std::string& msg) { return Error(ErrorKind::kInvalidModel, msg); }

std::size_t row_count(const CausalGraph& g, const std::vector<int>& parents) {
  std::size_t n = 1;
  for (int p : parents) n *= static_cast<std::size_t>(g.nodes()[static_cast<std::size_t>(p)].arity);
  return n;
}

std::size_t row_index(const CausalGraph& g, const std::vector<int>& parents, const std::vector<int>& parent_states) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    idx = idx * static_cast<std::size_t>(g.nodes()[static_cast<std::size_t>(parents[i])].arity) +
          static_cast<std::size_t>(parent_states[i]);
  }
  return idx;
}

std::vector<int> decode_row(const CausalGraph& g, const std::vector<int>& parents, std::size_t idx) {
  std::vector<int> states(parents.size());
  for (std::size_t i = parents.size(); i-- > 0;) {
    const auto arity = static_cast<std::size_t>(g.nodes()[static_cast<std::size_t>(parents[i])].arity);
    states[i] = static_cast<int>(idx % arity);
    idx /= arity;
  }
  return states;
}

}  // namespace

// ---------------------------------------------------------------- graph

int CausalGraph::add_node(Variable v) {
  if (v.name.empty()) throw invalid("variable name must be non-empty");
  if (v.arity < 2) throw invalid(fmt::format("variable '{}' has arity {} < 2", v.name, v.arity));
  if (find(v.name)) throw invalid(fmt::format("duplicate variable '{}'", v.name));
  nodes_.push_back(std::move(v));
  return static_cast<int>(nodes_.size()) - 1;
}

void CausalGraph::add_edge(const std::string& parent, const std::string& child) {
  const int p = index_of(parent);
  const int c = index_of(child);
  if (p == c) throw invalid(fmt::format("self loop on '{}'", parent));
  if (std::find(edges_.begin(), edges_.end(), std::pair{p, c}) != edges_.end()) {
    throw invalid(fmt::format("duplicate edge {} -> {}", parent, child));
  }
  edges_.emplace_back(p, c);
}

void CausalGraph::remove_incoming(int child) {
  std::erase_if(edges_, [child](const auto& e) { return e.second == child; });
}

std::optional<int> CausalGraph::find(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

int CausalGraph::index_of(const std::string& name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorKind::kUnknownVariable, fmt::format("unknown variable '{}'", name));
}

std::vector<int> CausalGraph::parents(int child) const {
  std::vector<int> out;
  for (const auto& [p, c] : edges_) {
    if (c == child) out.push_back(p);
  }
  return out;
}

bool CausalGraph::has_edge(const std::string& parent, const std::string& child) const {
  auto p = find(parent);
  auto c = find(child);
  return p && c && std::find(edges_.begin(), edges_.end(), std::pair{*p, *c}) != edges_.end();
}

std::vector<int> CausalGraph::topological_order() const {
  std::vector<int> indegree(nodes_.size(), 0);
  for (const auto& e : edges_) ++indegree[static_cast<std::size_t>(e.second)];
  std::vector<int> ready;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  }
  std::vector<int> order;
  // Pop the smallest ready index so the order is deterministic.
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    const int n = *it;
    ready.erase(it);
    order.push_back(n);
    for (const auto& [p, c] : edges_) {
      if (p == n && --indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
    }
  }
  if (order.size() != nodes_.size()) throw Error(ErrorKind::kCyclicGraph, "graph contains a cycle");
  return order;
}

// ---------------------------------------------------------------- scm

DiscreteScm::DiscreteScm(CausalGraph graph, std::vector<Cpt> cpts) : graph_(std::move(graph)), cpts_(std::move(cpts)) {
  // Accept CPTs in any order; store them indexed by child.
  std::vector<Cpt> sorted(graph_.nodes().size());
  std::vector<bool> seen(graph_.nodes().size(), false);
  for (auto& c : cpts_) {
    if (c.child < 0 || static_cast<std::size_t>(c.child) >= sorted.size()) throw invalid("CPT child out of range");
    if (seen[static_cast<std::size_t>(c.child)]) {
      throw invalid(fmt::format("two CPTs for '{}'", graph_.nodes()[static_cast<std::size_t>(c.child)].name));
    }
    seen[static_cast<std::size_t>(c.child)] = true;
    sorted[static_cast<std::size_t>(c.child)] = std::move(c);
  }
  cpts_ = std::move(sorted);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw invalid(fmt::format("missing CPT for '{}'", graph_.nodes()[i].name));
  }
  validate();
}

void DiscreteScm::validate() const {
  graph_.topological_order();
  for (std::size_t i = 0; i < graph_.nodes().size(); ++i) {
    const Cpt& c = cpts_[i];
    const auto& name = graph_.nodes()[i].name;
    auto graph_parents = graph_.parents(static_cast<int>(i));
    auto cpt_parents = c.parents;
    std::sort(graph_parents.begin(), graph_parents.end());
    std::sort(cpt_parents.begin(), cpt_parents.end());
    if (graph_parents != cpt_parents) throw invalid(fmt::format("CPT parents of '{}' differ from graph parents", name));
    if (c.rows.size() != row_count(graph_, c.parents)) {
      throw invalid(
          fmt::format("CPT of '{}' has {} rows, expected {}", name, c.rows.size(), row_count(graph_, c.parents)));
    }
    for (const auto& row : c.rows) {
      if (row.size() != static_cast<std::size_t>(graph_.nodes()[i].arity)) {
        throw invalid(fmt::format("CPT row of '{}' has wrong length", name));
      }
      double total = 0.0;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) throw invalid(fmt::format("CPT entry of '{}' outside [0,1]", name));
        total += p;
      }
      if (std::abs(total - 1.0) > kRowTolerance) {
        throw invalid(fmt::format("CPT row of '{}' sums to {:.17g}", name, total));
      }
    }
  }
}

double DiscreteScm::conditional(int node, const std::vector<int>& states) const {
  const Cpt& c = cpts_[static_cast<std::size_t>(node)];
  std::size_t idx = 0;
  for (int p : c.parents) {
    idx = idx * static_cast<std::size_t>(graph_.nodes()[static_cast<std::size_t>(p)].arity) +
          static_cast<std::size_t>(states[static_cast<std::size_t>(p)]);
  }
  return c.rows[idx][static_cast<std::size_t>(states[static_cast<std::size_t>(node)])];
}

double DiscreteScm::conditional(const std::string& node, const std::map<std::string, int>& states) const {
  const int n = graph_.index_of(node);
  std::vector<int> dense(graph_.nodes().size(), 0);
  auto fill = [&](int var) {
    const auto& name = graph_.nodes()[static_cast<std::size_t>(var)].name;
    auto it = states.find(name);
    if (it == states.end()) throw Error(ErrorKind::kUnknownVariable, fmt::format("state of '{}' not given", name));
    dense[static_cast<std::size_t>(var)] = it->second;
  };
  fill(n);
  for (int p : cpts_[static_cast<std::size_t>(n)].parents) fill(p);
  return conditional(n, dense);
}

std::size_t DiscreteScm::state_space() const {
  std::size_t total = 1;
  for (const auto& v : graph_.nodes()) {
    total *= static_cast<std::size_t>(v.arity);
    if (total > kMaxStates) return kMaxStates + 1;
  }
  return total;
}

DiscreteScm DiscreteScm::from_json(const nlohmann::json& doc) {
  try {
    CausalGraph g;
    for (const auto& n : doc.at("nodes")) g.add_node({n.at("name").get<std::string>(), n.at("arity").get<int>()});
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw invalid("edge must be a [parent, child] pair");
      g.add_edge(e[0].get<std::string>(), e[1].get<std::string>());
    }
    std::vector<Cpt> cpts;
    for (const auto& [child_name, entry] : doc.at("cpts").items()) {
      Cpt c;
      c.child = g.index_of(child_name);
      for (const auto& p : entry.at("parents")) c.parents.push_back(g.index_of(p.get<std::string>()));
      c.rows.assign(row_count(g, c.parents), {});
      std::vector<bool> filled(c.rows.size(), false);
      for (const auto& [key, probs] : entry.at("table").items()) {
        std::vector<int> ps;
        if (!key.empty()) {
          for (const auto& part : text::split(key, ',')) ps.push_back(std::stoi(std::string(text::trim(part))));
        }
        if (ps.size() != c.parents.size()) {
          throw invalid(fmt::format("table key '{}' of '{}' has wrong arity", key, child_name));
        }
        for (std::size_t i = 0; i < ps.size(); ++i) {
          const int arity = g.nodes()[static_cast<std::size_t>(c.parents[i])].arity;
          if (ps[i] < 0 || ps[i] >= arity) {
            throw Error(ErrorKind::kOutOfRangeState,
                        fmt::format("table key '{}' of '{}' out of range", key, child_name));
          }
        }
        const auto idx = row_index(g, c.parents, ps);
        c.rows[idx] = probs.get<std::vector<double>>();
        filled[idx] = true;
      }
      for (std::size_t i = 0; i < filled.size(); ++i) {
        if (!filled[i]) throw invalid(fmt::format("CPT of '{}' misses a parent combination", child_name));
      }
      cpts.push_back(std::move(c));
    }
    return DiscreteScm(std::move(g), std::move(cpts));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, fmt::format("malformed SCM document: {}", e.what()));
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::kParseError, "malformed CPT table key");
  }
}

nlohmann::json DiscreteScm::to_json() const {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& v : graph_.nodes()) doc["nodes"].push_back({{"name", v.name}, {"arity", v.arity}});
  doc["edges"] = nlohmann::json::array();
  for (const auto& [p, c] : graph_.edges()) {
    doc["edges"].push_back(
        {graph_.nodes()[static_cast<std::size_t>(p)].name, graph_.nodes()[static_cast<std::size_t>(c)].name});
  }
  doc["cpts"] = nlohmann::json::object();
  for (const auto& c : cpts_) {
    nlohmann::json entry;
    entry["parents"] = nlohmann::json::array();
    for (int p : c.parents) entry["parents"].push_back(graph_.nodes()[static_cast<std::size_t>(p)].name);
    entry["table"] = nlohmann::json::object();
    for (std::size_t r = 0; r < c.rows.size(); ++r) {
      std::vector<std::string> key;
      for (int s : decode_row(graph_, c.parents, r)) key.push_back(std::to_string(s));
      entry["table"][text::join(key, ",")] = c.rows[r];
    }
    doc["cpts"][graph_.nodes()[static_cast<std::size_t>(c.child)].name] = entry;
  }
  return doc;
}

// ---------------------------------------------------------------- factor

Factor::Factor(std::vector<Variable> scope, std::vector<double> values)
    : scope_(std::move(scope)), values_(std::move(values)) {
  std::size_t expected = 1;
  for (const auto& v : scope_) expected *= static_cast<std::size_t>(v.arity);
  if (expected != values_.size()) throw invalid("factor size does not match its scope");
}

std::optional<std::size_t> Factor::position(const std::string& name) const {
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    if (scope_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Factor::encode(const std::vector<int>& states) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    idx = idx * static_cast<std::size_t>(scope_[i].arity) + static_cast<std::size_t>(states[i]);
  }
  return idx;
}

std::vector<int> Factor::decode(std::size_t index) const {
  std::vector<int> states(scope_.size());
  for (std::size_t i = scope_.size(); i-- > 0;) {
    const auto arity = static_cast<std::size_t>(scope_[i].arity);
    states[i] = static_cast<int>(index % arity);
    index /= arity;
  }
  return states;
}

double Factor::at(const std::vector<int>& states) const { return values_[encode(states)]; }

double Factor::at(const Assignment& assignment) const {
  std::vector<int> states(scope_.size());
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    auto it = assignment.find(scope_[i].name);
    if (it == assignment.end()) {
      throw Error(ErrorKind::kUnknownVariable, fmt::format("assignment misses '{}'", scope_[i].name));
    }
    states[i] = it->second;
  }
  return at(states);
}

double Factor::sum() const {
  double total = 0.0;
  for (double v : values_) total += v;
  return total;
}

// ---------------------------------------------------------------- inference

Factor enumerate_joint(const DiscreteScm& scm) {
  const auto order = scm.graph().topological_order();
  if (scm.state_space() > kMaxStates) {
    throw Error(ErrorKind::kStateSpaceTooLarge, fmt::format("joint state space exceeds {} assignments", kMaxStates));
  }
  const auto& nodes = scm.graph().nodes();
  std::vector<double> values(scm.state_space(), 0.0);
  Factor layout(nodes, std::vector<double>(values.size(), 0.0));
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const auto states = layout.decode(idx);
    double p = 1.0;
    for (int n : order) {
      p *= scm.conditional(n, states);
      if (p == 0.0) break;
    }
    values[idx] = p;
  }
  return Factor(nodes, std::move(values));
}

Factor condition(const Factor& joint, const Assignment& evidence) {
  std::vector<std::pair<std::size_t, int>> fixed;
  for (const auto& [name, state] : evidence) {
    auto pos = joint.position(name);
    if (!pos) throw Error(ErrorKind::kUnknownVariable, fmt::format("evidence on unknown variable '{}'", name));
    if (state < 0 || state >= joint.scope()[*pos].arity) {
      throw Error(ErrorKind::kOutOfRangeState, fmt::format("evidence {}={} out of range", name, state));
    }
    fixed.emplace_back(*pos, state);
  }
  std::vector<Variable> scope;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < joint.scope().size(); ++i) {
    if (!evidence.contains(joint.scope()[i].name)) {
      scope.push_back(joint.scope()[i]);
      kept.push_back(i);
    }
  }
  std::size_t out_size = 1;
  for (const auto& v : scope) out_size *= static_cast<std::size_t>(v.arity);
  std::vector<double> out(out_size, 0.0);
  Factor out_layout(scope, std::vector<double>(out_size, 0.0));
  double mass = 0.0;
  for (std::size_t idx = 0; idx < joint.size(); ++idx) {
    const auto states = joint.decode(idx);
    bool match = true;
    for (const auto& [pos, state] : fixed) {
      if (states[pos] != state) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    std::vector<int> rest;
    rest.reserve(kept.size());
    for (auto k : kept) rest.push_back(states[k]);
    std::size_t o = 0;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      o = o * static_cast<std::size_t>(scope[i].arity) + static_cast<std::size_t>(rest[i]);
    }
    out[o] += joint.values()[idx];
    mass += joint.values()[idx];
  }
  if (mass <= 0.0) throw Error(ErrorKind::kZeroProbabilityEvidence, "evidence has zero probability");
  for (double& v : out) v /= mass;
  return Factor(std::move(scope), std::move(out));
}

Factor marginalize(const Factor& factor, const std::vector<std::string>& keep) {
  std::vector<std::size_t> kept;
  std::vector<Variable> scope;
  for (std::size_t i = 0; i < factor.scope().size(); ++i) {
    if (std::find(keep.begin(), keep.end(), factor.scope()[i].name) != keep.end()) {
      kept.push_back(i);
      scope.push_back(factor.scope()[i]);
    }
  }
  for (const auto& name : keep) {
    if (!factor.position(name)) throw Error(ErrorKind::kUnknownVariable, fmt::format("cannot keep unknown '{}'", name));
  }
  std::size_t out_size = 1;
  for (const auto& v : scope) out_size *= static_cast<std::size_t>(v.arity);
  std::vector<double> out(out_size, 0.0);
  for (std::size_t idx = 0; idx < factor.size(); ++idx) {
    const auto states = factor.decode(idx);
    std::size_t o = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      o = o * static_cast<std::size_t>(scope[i].arity) + static_cast<std::size_t>(states[kept[i]]);
    }
    out[o] += factor.values()[idx];
  }
  return Factor(std::move(scope), std::move(out));
}

DiscreteScm apply_do(const DiscreteScm& scm, const Assignment& interventions) {
  DiscreteScm out = scm;
  for (const auto& [name, state] : interventions) {
    const int n = out.graph_.index_of(name);
    const int arity = out.graph_.nodes()[static_cast<std::size_t>(n)].arity;
    if (state < 0 || state >= arity) {
      throw Error(ErrorKind::kOutOfRangeState, fmt::format("do({}={}) out of range", name, state));
    }
    out.graph_.remove_incoming(n);
    Cpt& c = out.cpts_[static_cast<std::size_t>(n)];
    c.parents.clear();
    c.rows.assign(1, std::vector<double>(static_cast<std::size_t>(arity), 0.0));
    c.rows[0][static_cast<std::size_t>(state)] = 1.0;
  }
  out.validate();
  return out;
}

DiscreteScm randomize(const DiscreteScm& scm, const std::string& node) {
  DiscreteScm out = scm;
  const int n = out.graph_.index_of(node);
  const int arity = out.graph_.nodes()[static_cast<std::size_t>(n)].arity;
  out.graph_.remove_incoming(n);
  Cpt& c = out.cpts_[static_cast<std::size_t>(n)];
  c.parents.clear();
  c.rows.assign(1, std::vector<double>(static_cast<std::size_t>(arity), 1.0 / arity));
  out.validate();
  return out;
}

// ---------------------------------------------------------------- shapes

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::kFig1a:
      return "fig1a";
    case Shape::kFig1b:
      return "fig1b";
    case Shape::kFig1c:
      return "fig1c";
    case Shape::kFig1d:
      return "fig1d";
  }
  return "unknown";
}

Shape shape_from_string(std::string_view name) {
  for (Shape s : {Shape::kFig1a, Shape::kFig1b, Shape::kFig1c, Shape::kFig1d}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown shape '{}'", name));
}

namespace {

using EdgeSet = std::set<std::pair<std::string, std::string>>;

EdgeSet edge_names(const CausalGraph& g) {
  EdgeSet out;
  for (const auto& [p, c] : g.edges()) {
    out.emplace(g.nodes()[static_cast<std::size_t>(p)].name, g.nodes()[static_cast<std::size_t>(c)].name);
  }
  return out;
}

bool is_uniform_root(const DiscreteScm& scm, const std::string& name) {
  const auto& c = scm.cpt(name);
  if (!c.parents.empty()) return false;
  const double expected = 1.0 / static_cast<double>(c.rows[0].size());
  for (double p : c.rows[0]) {
    if (std::abs(p - expected) > kRowTolerance) return false;
  }
  return true;
}

}  // namespace

bool matches_shape(const DiscreteScm& scm, const Roles& r, Shape shape) {
  const auto& g = scm.graph();
  std::set<std::string> names;
  for (const auto& v : g.nodes()) names.insert(v.name);

  const bool wants_u = shape == Shape::kFig1b || shape == Shape::kFig1c || (shape == Shape::kFig1d && r.u.has_value());
  std::set<std::string> expected_nodes{r.e, r.s, r.x, r.y};
  if (expected_nodes.size() != 4) return false;
  if (wants_u) {
    if (!r.u || expected_nodes.contains(*r.u)) return false;
    expected_nodes.insert(*r.u);
  }
  if (names != expected_nodes) return false;

  EdgeSet expected{{r.e, r.x}, {r.s, r.x}, {r.s, r.y}};
  switch (shape) {
    case Shape::kFig1a:
      break;
    case Shape::kFig1b:
      expected.insert({*r.u, r.e});
      expected.insert({*r.u, r.y});
      break;
    case Shape::kFig1c:
      expected.insert({*r.u, r.y});
      break;
    case Shape::kFig1d:
      if (r.u) expected.insert({*r.u, r.y});
      break;
  }
  if (edge_names(g) != expected) return false;
  if (shape == Shape::kFig1d && !is_uniform_root(scm, r.e)) return false;
  return true;
}

double IdentityReport::worst() const {
  double w = 0.0;
  for (const auto& c : checks) w = std::max(w, c.max_discrepancy);
  return w;
}

const IdentityCheck* IdentityReport::find(std::string_view identity) const {
  for (const auto& c : checks) {
    if (c.identity == identity) return &c;
  }
  return nullptr;
}

nlohmann::json IdentityReport::to_json() const {
  nlohmann::json j;
  j["shapes"] = nlohmann::json::array();
  for (Shape s : shapes) j["shapes"].push_back(std::string(to_string(s)));
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"identity", c.identity}, {"max_discrepancy", c.max_discrepancy}});
  j["max_discrepancy"] = worst();
  if (confounder_gap) j["confounder_gap"] = *confounder_gap;
  return j;
}

namespace {

int arity_of(const DiscreteScm& scm, const std::string& name) {
  return scm.graph().nodes()[static_cast<std::size_t>(scm.graph().index_of(name))].arity;
}

// Conditional distribution P(target | evidence) read off the joint.
std::vector<double> conditional_of(const Factor& joint, const std::string& target, const Assignment& evidence) {
  const Factor f = marginalize(evidence.empty() ? joint : condition(joint, evidence), {target});
  return f.values();
}

// Conditional-factorization route shared by the fig1a and post-surgery checks:
// sum_{e,s} P(y|s) P(s|x) P(e|x,s), every term read off the joint.
double bayes_factorized(const Factor& joint, const Roles& r, int x, int y, int e_arity, int s_arity) {
  const auto p_s_given_x = conditional_of(joint, r.s, {{r.x, x}});
  double total = 0.0;
  for (int s = 0; s < s_arity; ++s) {
    if (p_s_given_x[static_cast<std::size_t>(s)] == 0.0) continue;
    const double p_y_given_s = conditional_of(joint, r.y, {{r.s, s}})[static_cast<std::size_t>(y)];
    const auto p_e_given_xs = conditional_of(joint, r.e, {{r.x, x}, {r.s, s}});
    for (int e = 0; e < e_arity; ++e) {
      total += p_y_given_s * p_s_given_x[static_cast<std::size_t>(s)] * p_e_given_xs[static_cast<std::size_t>(e)];
    }
  }
  return total;
}

double total_probability(const Factor& joint, const Roles& r, int x, int y, int e_arity, int s_arity) {
  const auto p_es_given_x = marginalize(condition(joint, {{r.x, x}}), {r.e, r.s});
  double total = 0.0;
  for (int e = 0; e < e_arity; ++e) {
    for (int s = 0; s < s_arity; ++s) {
      std::vector<int> es = {e, s};
      // marginalize keeps the joint's variable order, which may be (s, e).
      if (p_es_given_x.scope()[0].name != r.e) std::swap(es[0], es[1]);
      const double w = p_es_given_x.at(es);
      if (w == 0.0) continue;
      total += conditional_of(joint, r.y, {{r.x, x}, {r.e, e}, {r.s, s}})[static_cast<std::size_t>(y)] * w;
    }
  }
  return total;
}

}  // namespace

IdentityReport verify_capt_identities(const DiscreteScm& scm, const Roles& r) {
  IdentityReport report;
  for (Shape s : {Shape::kFig1a, Shape::kFig1b, Shape::kFig1c, Shape::kFig1d}) {
    if (matches_shape(scm, r, s)) report.shapes.push_back(s);
  }
  if (report.shapes.empty()) {
    throw Error(ErrorKind::kRoleShapeMismatch, "graph does not match any supported shape under the given roles");
  }
  auto has = [&](Shape s) { return std::find(report.shapes.begin(), report.shapes.end(), s) != report.shapes.end(); };

  const Factor joint = enumerate_joint(scm);
  const int xa = arity_of(scm, r.x), ya = arity_of(scm, r.y);
  const int ea = arity_of(scm, r.e), sa = arity_of(scm, r.s);
  const int ua = r.u && scm.graph().find(*r.u) ? arity_of(scm, *r.u) : 0;
  const auto p_x = marginalize(joint, {r.x}).values();

  IdentityCheck total{"total_probability"}, mediated{"mediated_factorization"}, confounded{"confounded_structural"};
  IdentityCheck surgery_structural{"post_surgery_structural"}, surgery{"post_surgery_factorization"};
  IdentityCheck uniform_e{"uniform_event_adjustment"};
  double gap = 0.0;
  auto bump = [](IdentityCheck& c, double lhs, double rhs) {
    c.max_discrepancy = std::max(c.max_discrepancy, std::abs(lhs - rhs));
  };

  for (int x = 0; x < xa; ++x) {
    if (p_x[static_cast<std::size_t>(x)] <= 0.0) continue;
    const auto lhs_row = conditional_of(joint, r.y, {{r.x, x}});
    const auto p_s_given_x = conditional_of(joint, r.s, {{r.x, x}});
    for (int y = 0; y < ya; ++y) {
      const double lhs = lhs_row[static_cast<std::size_t>(y)];
      bump(total, lhs, total_probability(joint, r, x, y, ea, sa));

      double naive = 0.0;  // sum_s P(y|s) P(s|x)
      for (int s = 0; s < sa; ++s) {
        if (p_s_given_x[static_cast<std::size_t>(s)] == 0.0) continue;
        naive += conditional_of(joint, r.y, {{r.s, s}})[static_cast<std::size_t>(y)] *
                 p_s_given_x[static_cast<std::size_t>(s)];
      }

      if (has(Shape::kFig1a)) bump(mediated, lhs, bayes_factorized(joint, r, x, y, ea, sa));

      if (has(Shape::kFig1b)) {
        // Structural route straight from the CPTs, independent of the joint.
        double num = 0.0, px = 0.0;
        for (int u = 0; u < ua; ++u) {
          for (int e = 0; e < ea; ++e) {
            for (int s = 0; s < sa; ++s) {
              Assignment a{{*r.u, u}, {r.e, e}, {r.s, s}, {r.x, x}, {r.y, y}};
              const double w = scm.conditional(*r.u, a) * scm.conditional(r.e, a) * scm.conditional(r.s, a) *
                               scm.conditional(r.x, a);
              px += w;
              num += scm.conditional(r.y, a) * w;
            }
          }
        }
        bump(confounded, lhs, num / px);
        gap = std::max(gap, std::abs(lhs - naive));
      }

      if (has(Shape::kFig1c) || (has(Shape::kFig1d) && r.u)) {
        // sum_{e,s,u} P(y,u|s) P(e) P(s) P(x|s,e) / P(x), with P(y,u|s) = P(u) P(y|s,u).
        double num = 0.0, px = 0.0;
        for (int e = 0; e < ea; ++e) {
          for (int s = 0; s < sa; ++s) {
            Assignment a{{r.e, e}, {r.s, s}, {r.x, x}, {r.y, y}};
            const double w = scm.conditional(r.e, a) * scm.conditional(r.s, a) * scm.conditional(r.x, a);
            px += w;
            for (int u = 0; u < ua; ++u) {
              a[*r.u] = u;
              num += scm.conditional(*r.u, a) * scm.conditional(r.y, a) * w;
            }
          }
        }
        bump(surgery_structural, lhs, num / px);
        bump(surgery, lhs, bayes_factorized(joint, r, x, y, ea, sa));
      }

      if (has(Shape::kFig1d)) {
        // sum_e P(e|x) sum_s P(y|s) P(s|x)
        const auto p_e_given_x = conditional_of(joint, r.e, {{r.x, x}});
        double rhs = 0.0;
        for (int e = 0; e < ea; ++e) rhs += p_e_given_x[static_cast<std::size_t>(e)] * naive;
        bump(uniform_e, lhs, rhs);
      }
    }
  }

  report.checks.push_back(total);
  if (has(Shape::kFig1a)) report.checks.push_back(mediated);
  if (has(Shape::kFig1b)) {
    report.checks.push_back(confounded);
    report.confounder_gap = gap;
  }
  if (has(Shape::kFig1c) || (has(Shape::kFig1d) && r.u)) {
    report.checks.push_back(surgery_structural);
    report.checks.push_back(surgery);
  }
  if (has(Shape::kFig1d)) report.checks.push_back(uniform_e);
  return report;
}

// ---------------------------------------------------------------- random SCMs

SeededScm make_random_scm(Shape shape, std::uint64_t seed, bool with_confounder) {
  SplitMix64 rng(seed);
  Roles roles;
  const bool use_u = shape == Shape::kFig1b || shape == Shape::kFig1c || (shape == Shape::kFig1d && with_confounder);
  if (use_u) roles.u = "U";

  CausalGraph g;
  std::vector<std::string> order;
  if (use_u) order.push_back("U");
  for (const char* n : {"E", "S", "X", "Y"}) order.emplace_back(n);
  for (const auto& n : order) g.add_node({n, rng.range(2, 3)});

  g.add_edge("E", "X");
  g.add_edge("S", "X");
  g.add_edge("S", "Y");
  if (shape == Shape::kFig1b) g.add_edge("U", "E");
  if (use_u) g.add_edge("U", "Y");

  std::vector<Cpt> cpts;
  for (std::size_t i = 0; i < g.nodes().size(); ++i) {
    Cpt c;
    c.child = static_cast<int>(i);
    c.parents = g.parents(c.child);
    const auto arity = static_cast<std::size_t>(g.nodes()[i].arity);
    const bool uniform = shape == Shape::kFig1d && g.nodes()[i].name == "E";
    for (std::size_t r = 0; r < row_count(g, c.parents); ++r) {
      std::vector<double> row(arity);
      double total = 0.0;
      for (auto& p : row) {
        // Heavier tails than uniform(0,1) so confounding is visible.
        const double u = rng.uniform(0.02, 1.0);
        p = uniform ? 1.0 : u * u;
        total += p;
      }
      for (auto& p : row) p /= total;
      // Absorb rounding into the last entry so rows sum to 1 within an ulp.
      double head = 0.0;
      for (std::size_t k = 0; k + 1 < arity; ++k) head += row[k];
      row[arity - 1] = 1.0 - head;
      c.rows.push_back(std::move(row));
    }
    cpts.push_back(std::move(c));
  }
  return {DiscreteScm(std::move(g), std::move(cpts)), roles};
}

}  // namespace capt::scm
