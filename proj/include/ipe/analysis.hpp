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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipe/cpn.hpp"

namespace ipe {

struct Bounds {
  std::size_t max_nodes = 200'000;
  std::uint32_t max_tokens_per_place = 8;
};

struct MarkingHash {
  std::size_t operator()(const Marking& m) const noexcept;
};

struct GraphEdge {
  std::size_t from = 0;
  std::size_t transition = 0;
  std::size_t to = 0;
};

/// Explored state space. Node 0 is the initial marking; nodes are numbered
/// in breadth-first discovery order, so two builds over the same net yield
/// identical graphs.
struct ReachabilityGraph {
  std::vector<Marking> nodes;
  std::vector<GraphEdge> edges;
  /// Breadth-first parent edge per node (none for the root).
  std::vector<std::optional<std::size_t>> parent_edge;
  std::vector<bool> is_final;
  Bounds bounds;
  /// false when exploration stopped at a bound; verdicts are then inconclusive.
  bool bounded = true;
  std::string bound_reason;
  double elapsed_ms = 0.0;

  [[nodiscard]] std::size_t root() const { return 0; }
  [[nodiscard]] std::optional<std::size_t> find(const Marking& m) const;
  /// Transition indices along the breadth-first path from the root.
  [[nodiscard]] std::vector<std::size_t> shortest_path(std::size_t node) const;

  std::unordered_map<Marking, std::size_t, MarkingHash> index;
};

ReachabilityGraph build_reachability_graph(const ColoredPetriNet& net, const Bounds& bounds = {});

enum class Verdict { Holds, Violated, Inconclusive };

std::string_view to_string(Verdict v);

struct Deadlock {
  std::size_t node = 0;
  Marking marking;
  /// Transition ids from the initial marking to `marking`, shortest first.
  std::vector<std::string> witness;
};

struct DeadlockResult {
  bool conclusive = true;
  std::vector<Deadlock> deadlocks;
};

DeadlockResult detect_deadlocks(const ReachabilityGraph& graph, const ColoredPetriNet& net);

/// Holds iff every reachable marking can reach a final marking.
Verdict check_termination(const ReachabilityGraph& graph);

struct DeadTransitionResult {
  bool conclusive = true;
  std::vector<std::string> transitions;
};

DeadTransitionResult find_dead_transitions(const ReachabilityGraph& graph, const ColoredPetriNet& net);

struct VerificationReport {
  std::string protocol;
  bool bounded = true;
  std::string bound_reason;
  Verdict deadlock_free = Verdict::Inconclusive;
  Verdict proper_termination = Verdict::Inconclusive;
  Verdict no_dead_transitions = Verdict::Inconclusive;
  std::vector<Deadlock> deadlocks;
  std::vector<std::string> dead_transitions;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double elapsed_ms = 0.0;

  /// All three properties hold and exploration completed.
  [[nodiscard]] bool passed() const;
};

VerificationReport verify(const ColoredPetriNet& net, const Bounds& bounds = {});

/// Structured text (JSON) rendering used by the CLI. Elapsed time is only
/// included on request so repeated runs produce identical documents.
std::string report_to_json(const VerificationReport& report, const ColoredPetriNet& net, bool include_timing = false);

}  // namespace ipe
