// Copyright 2026 The ipeng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ipe/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <json.hpp>

namespace ipe {

std::size_t MarkingHash::operator()(const Marking& m) const noexcept {
  // FNV-1a over the counts.
  std::uint64_t h = 1469598103934665603ull;
  for (auto v : m) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

std::optional<std::size_t> ReachabilityGraph::find(const Marking& m) const {
  auto it = index.find(m);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> ReachabilityGraph::shortest_path(std::size_t node) const {
  std::vector<std::size_t> path;
  while (node < parent_edge.size() && parent_edge[node]) {
    const auto& e = edges[*parent_edge[node]];
    path.push_back(e.transition);
    node = e.from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

ReachabilityGraph build_reachability_graph(const ColoredPetriNet& net, const Bounds& bounds) {
  const auto start = std::chrono::steady_clock::now();
  ReachabilityGraph g;
  g.bounds = bounds;
  const FiringRule rule(net);

  auto add_node = [&](Marking m, std::optional<std::size_t> via) {
    const std::size_t id = g.nodes.size();
    g.index.emplace(m, id);
    g.is_final.push_back(std::find(net.finals.begin(), net.finals.end(), m) != net.finals.end());
    g.nodes.push_back(std::move(m));
    g.parent_edge.push_back(via);
    return id;
  };

  add_node(net.initial, std::nullopt);
  Marking next;
  // Nodes are appended in discovery order, so the node vector is the queue.
  for (std::size_t cur = 0; cur < g.nodes.size() && g.bounded; ++cur) {
    for (std::size_t t = 0; t < rule.transition_count(); ++t) {
      if (!rule.fire(g.nodes[cur], t, next)) continue;
      if (std::any_of(next.begin(), next.end(),
                      [&](std::uint16_t v) { return v > bounds.max_tokens_per_place; })) {
        g.bounded = false;
        g.bound_reason = "token bound of " + std::to_string(bounds.max_tokens_per_place) +
                         " per place exceeded by transition '" + net.transitions[t].id + "'";
        break;
      }
      std::size_t to;
      if (auto it = g.index.find(next); it != g.index.end()) {
        to = it->second;
        g.edges.push_back({cur, t, to});
      } else {
        if (g.nodes.size() >= bounds.max_nodes) {
          g.bounded = false;
          g.bound_reason = "node bound of " + std::to_string(bounds.max_nodes) + " markings reached";
          break;
        }
        g.edges.push_back({cur, t, g.nodes.size()});
        add_node(next, g.edges.size() - 1);
      }
    }
  }
  g.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return g;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

DeadlockResult detect_deadlocks(const ReachabilityGraph& graph, const ColoredPetriNet& net) {
  DeadlockResult out;
  out.conclusive = graph.bounded;
  if (!graph.bounded) return out;
  std::vector<bool> has_succ(graph.nodes.size());
  for (const auto& e : graph.edges) has_succ[e.from] = true;
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    if (has_succ[n] || graph.is_final[n]) continue;
    Deadlock d;
    d.node = n;
    d.marking = graph.nodes[n];
    for (auto t : graph.shortest_path(n)) d.witness.push_back(net.transitions[t].id);
    out.deadlocks.push_back(std::move(d));
  }
  return out;
}

Verdict check_termination(const ReachabilityGraph& graph) {
  if (!graph.bounded) return Verdict::Inconclusive;
  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::size_t>> preds(n);
  for (const auto& e : graph.edges) preds[e.to].push_back(e.from);
  std::vector<bool> reaches(n);
  std::deque<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.is_final[i]) {
      reaches[i] = true;
      work.push_back(i);
    }
  }
  while (!work.empty()) {
    const auto cur = work.front();
    work.pop_front();
    for (auto p : preds[cur]) {
      if (!reaches[p]) {
        reaches[p] = true;
        work.push_back(p);
      }
    }
  }
  return std::all_of(reaches.begin(), reaches.end(), [](bool b) { return b; }) ? Verdict::Holds : Verdict::Violated;
}

DeadTransitionResult find_dead_transitions(const ReachabilityGraph& graph, const ColoredPetriNet& net) {
  DeadTransitionResult out;
  out.conclusive = graph.bounded;
  if (!graph.bounded) return out;
  std::vector<bool> fired(net.transitions.size());
  for (const auto& e : graph.edges) fired[e.transition] = true;
  for (std::size_t t = 0; t < fired.size(); ++t) {
    if (!fired[t]) out.transitions.push_back(net.transitions[t].id);
  }
  return out;
}

bool VerificationReport::passed() const {
  return bounded && deadlock_free == Verdict::Holds && proper_termination == Verdict::Holds &&
         no_dead_transitions == Verdict::Holds;
}

VerificationReport verify(const ColoredPetriNet& net, const Bounds& bounds) {
  VerificationReport r;
  r.protocol = net.name;
  const ReachabilityGraph g = build_reachability_graph(net, bounds);
  r.bounded = g.bounded;
  r.bound_reason = g.bound_reason;
  r.nodes = g.nodes.size();
  r.edges = g.edges.size();
  if (g.bounded) {
    auto dl = detect_deadlocks(g, net);
    r.deadlocks = std::move(dl.deadlocks);
    r.deadlock_free = r.deadlocks.empty() ? Verdict::Holds : Verdict::Violated;
    r.proper_termination = check_termination(g);
    auto dead = find_dead_transitions(g, net);
    r.dead_transitions = std::move(dead.transitions);
    r.no_dead_transitions = r.dead_transitions.empty() ? Verdict::Holds : Verdict::Violated;
  }
  r.elapsed_ms = g.elapsed_ms;
  return r;
}

std::string report_to_json(const VerificationReport& r, const ColoredPetriNet& net, bool include_timing) {
  nlohmann::ordered_json j;
  j["protocol"] = r.protocol;
  j["passed"] = r.passed();
  j["bounded"] = r.bounded;
  if (!r.bounded) j["bound_reason"] = r.bound_reason;
  j["deadlock_free"] = to_string(r.deadlock_free);
  j["proper_termination"] = to_string(r.proper_termination);
  j["no_dead_transitions"] = to_string(r.no_dead_transitions);
  auto deadlocks = nlohmann::ordered_json::array();
  for (const auto& d : r.deadlocks) {
    nlohmann::ordered_json dj;
    dj["marking"] = describe_marking(net, d.marking);
    dj["witness"] = d.witness;
    deadlocks.push_back(std::move(dj));
  }
  j["deadlocks"] = std::move(deadlocks);
  j["dead_transitions"] = r.dead_transitions;
  nlohmann::ordered_json stats;
  stats["nodes"] = r.nodes;
  stats["edges"] = r.edges;
  stats["places"] = net.places.size();
  stats["transitions"] = net.transitions.size();
  if (include_timing) stats["elapsed_ms"] = r.elapsed_ms;
  j["statistics"] = std::move(stats);
  return j.dump(2) + "\n";
}

}  // namespace ipe
