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
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ipe/guard.hpp"

namespace ipe {

inline constexpr std::size_t kMaxRoles = 32;
inline constexpr std::size_t kMaxBranches = 16;
inline constexpr std::size_t kOrWarnBranches = 8;

/// Position in a protocol document. Locations never take part in structural
/// equality, so a parsed protocol compares equal to a hand-built one.
struct SourceLoc {
  int line = 0;
  int column = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

/// Raised for malformed documents and guard text.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& what, SourceLoc loc);

  [[nodiscard]] int line() const noexcept { return loc_.line; }
  [[nodiscard]] int column() const noexcept { return loc_.column; }

 private:
  SourceLoc loc_;
};

enum class RoleKind { PrivateProcess, WebService };

struct Role {
  std::string name;
  RoleKind kind = RoleKind::PrivateProcess;
  /// Discovery criteria for WebService roles; empty means {name}.
  std::vector<std::string> keywords;
  SourceLoc loc;

  friend bool operator==(const Role&, const Role&) = default;
};

enum class CommunicativeAct {
  Cfp,
  Inform,
  Propose,
  AcceptProposal,
  RejectProposal,
  Request,
  Refuse,
  Agree,
  Failure,
  Cancel,
  NotUnderstood,
};

inline constexpr std::size_t kCommunicativeActCount = 11;

std::string_view to_string(CommunicativeAct act);
std::optional<CommunicativeAct> act_from_string(std::string_view s);

enum class MessageMode { Synchronous, Asynchronous };

struct MessageOption {
  MessageMode mode = MessageMode::Asynchronous;
  std::optional<GuardExpr> guard;
  /// Scheduler ticks; must be > 0 when present.
  std::optional<std::int64_t> deadline;

  friend bool operator==(const MessageOption&, const MessageOption&) = default;
};

struct PrimitiveMessage {
  std::string name;
  std::string sender;
  std::string receiver;
  CommunicativeAct act = CommunicativeAct::Inform;
  MessageOption option;
  SourceLoc loc;

  friend bool operator==(const PrimitiveMessage&, const PrimitiveMessage&) = default;
};

enum class Operator { Xor, Or, And };

std::string_view to_string(Operator op);

struct ComplexMessage {
  std::string name;
  Operator op = Operator::And;
  std::vector<PrimitiveMessage> branches;
  SourceLoc loc;

  friend bool operator==(const ComplexMessage&, const ComplexMessage&) = default;
};

using MessageStep = std::variant<PrimitiveMessage, ComplexMessage>;

struct VarDecl {
  std::string name;
  ValueType type = ValueType::Int;
  std::optional<Value> initial;
  SourceLoc loc;

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

/// Explicit per-role step sequence overriding document order for that role.
struct RoleOrder {
  std::string role;
  std::vector<std::string> steps;
  SourceLoc loc;

  friend bool operator==(const RoleOrder&, const RoleOrder&) = default;
};

using RolePair = std::pair<std::string, std::string>;

struct InteractionProtocol {
  std::string id;
  std::vector<Role> roles;
  std::vector<VarDecl> vars;
  std::vector<MessageStep> messages;
  std::set<RolePair> flow;
  std::vector<RoleOrder> orders;

  [[nodiscard]] const Role* find_role(std::string_view name) const;
  [[nodiscard]] const VarDecl* find_var(std::string_view name) const;
  /// Index into `messages` of the step with this name, if any.
  [[nodiscard]] std::optional<std::size_t> find_step(std::string_view name) const;
  /// Declared initial values; variables without one are left unbound.
  [[nodiscard]] Bindings initial_bindings() const;

  friend bool operator==(const InteractionProtocol&, const InteractionProtocol&) = default;
};

const std::string& step_name(const MessageStep& step);
const std::string& step_sender(const MessageStep& step);
/// Distinct receivers of a step, in branch order.
std::vector<std::string> step_receivers(const MessageStep& step);
bool participates(const MessageStep& step, std::string_view role);
/// Primitive messages of a step (the step itself for a PM).
std::vector<const PrimitiveMessage*> step_primitives(const MessageStep& step);

/// Indices of the steps `role` takes part in, in the order that role performs
/// them: document order unless an `order` entry overrides it.
std::vector<std::size_t> role_chain(const InteractionProtocol& ip, std::string_view role);

/// The flow relation implied by the messages: every (sender, receiver) pair.
std::set<RolePair> projected_flow(const InteractionProtocol& ip);

struct ResponseBounds {
  std::size_t min = 0;
  std::size_t max = 0;

  friend bool operator==(const ResponseBounds&, const ResponseBounds&) = default;
};

/// AND -> (m, m), XOR -> (1, 1), OR -> (1, m).
ResponseBounds expected_responses(const ComplexMessage& cm);

enum class Severity { Error, Warning };

struct Finding {
  Severity severity = Severity::Error;
  std::string code;
  std::string location;
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Finding> findings;

  [[nodiscard]] bool has(std::string_view code) const;
  [[nodiscard]] std::size_t error_count() const;
};

/// Syntax-level parse. Throws ProtocolError on syntax errors and unknown
/// communicative acts; structural problems are left for validation.
InteractionProtocol parse_document(std::string_view source);

/// parse_document followed by validation. Throws ProtocolError citing the
/// first Error finding, so only well-formed protocols escape.
InteractionProtocol parse_protocol(std::string_view source);

ValidationReport validate_well_formedness(const InteractionProtocol& ip);

/// Canonical document text. parse_protocol(serialize_protocol(ip)) == ip.
std::string serialize_protocol(const InteractionProtocol& ip);

}  // namespace ipe
