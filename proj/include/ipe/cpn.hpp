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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipe/guard.hpp"
#include "ipe/protocol.hpp"

namespace ipe {

enum class PlaceKind { RoleState, MessageBuffer, Control };

/// Token type of a place. Every place produced by translation carries unit
/// tokens; guard data lives in the net-level binding record.
enum class ColorDomain { Unit, Bindings };

struct Place {
  std::string id;
  PlaceKind kind = PlaceKind::Control;
  std::optional<std::string> owner;
  ColorDomain color = ColorDomain::Unit;
};

enum class Phase { Send, Receive, Rendezvous, Fork, Join, Choice };

std::string_view to_string(Phase p);
std::string_view to_string(PlaceKind k);

struct Transition {
  std::string id;
  /// Protocol step (PM or CM name) this transition belongs to.
  std::string step;
  /// Primitive message (branch) name; empty for fork/join.
  std::string branch;
  Phase phase = Phase::Send;
  /// OR alternatives: branch names of the subset this transition serves.
  std::vector<std::string> subset;
  std::optional<GuardExpr> guard;
};

struct Arc {
  std::size_t place = 0;
  std::size_t transition = 0;
  /// true: place -> transition (input), false: transition -> place (output).
  bool input = true;
  std::uint32_t weight = 1;
};

/// Token counts indexed like ColoredPetriNet::places. Places are kept sorted
/// by id, so equal markings are equal vectors.
using Marking = std::vector<std::uint16_t>;

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ColoredPetriNet {
  std::string name;
  std::vector<Place> places;
  std::vector<Transition> transitions;
  std::vector<Arc> arcs;
  Marking initial;
  std::vector<Marking> finals;
  /// Environment guards are evaluated against.
  Bindings guard_env;

  [[nodiscard]] std::optional<std::size_t> place_index(std::string_view id) const;
  [[nodiscard]] std::optional<std::size_t> transition_index(std::string_view id) const;
  [[nodiscard]] std::size_t count_places(PlaceKind kind) const;

  /// Throws NetError if arc endpoints dangle, a transition lacks input or
  /// output arcs, or markings have the wrong width.
  void check_well_formed() const;
};

/// Input/output vectors per transition, precomputed for firing.
class FiringRule {
 public:
  explicit FiringRule(const ColoredPetriNet& net);

  [[nodiscard]] bool enabled(const Marking& m, std::size_t t) const;
  /// Applies transition t. Returns false (leaving `out` unspecified) when it
  /// is not enabled.
  bool fire(const Marking& m, std::size_t t, Marking& out) const;
  [[nodiscard]] std::size_t transition_count() const { return inputs_.size(); }

 private:
  struct Entry {
    std::size_t place;
    std::uint32_t weight;
  };
  std::vector<std::vector<Entry>> inputs_;
  std::vector<std::vector<Entry>> outputs_;
  std::vector<bool> guard_ok_;
};

/// Builds the verification net. Precondition: ip is well formed. Throws
/// NetError for invalid input or OR expansions beyond kMaxBranches.
ColoredPetriNet translate(const InteractionProtocol& ip);

enum class ExportFormat { Pnml, Dot };

std::string export_net(const ColoredPetriNet& net, ExportFormat format);

/// Human-readable marking: "{p:A:1=1, b:m1=1}" listing non-empty places.
std::string describe_marking(const ColoredPetriNet& net, const Marking& m);

}  // namespace ipe
