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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipe/analysis.hpp"
#include "ipe/cpn.hpp"
#include "ipe/protocol.hpp"
#include "ipe/services.hpp"

namespace ipe {

enum class AgentKind { Integrator, Enterprise, Service };

std::string_view to_string(AgentKind k);

struct AgentId {
  std::string name;
  AgentKind kind = AgentKind::Enterprise;

  friend bool operator==(const AgentId&, const AgentId&) = default;
};

/// Role name -> agent playing it. Must cover every PrivateProcess role;
/// WebService roles are served by the Integrator's service manager.
using RoleBindings = std::map<std::string, AgentId>;

/// Message content: variable bindings plus an optional text body. Rendered
/// on the wire as `<content><name>value</name>...</content>`.
struct Content {
  std::map<std::string, std::string> bindings;
  std::string body;

  friend bool operator==(const Content&, const Content&) = default;
};

std::string render_content_xml(const Content& c);

struct AclMessage {
  std::uint64_t id = 0;
  CommunicativeAct performative = CommunicativeAct::Inform;
  std::string sender;
  std::string receiver;
  Content content;
  std::string conversation_id;
  std::string reply_with;
  std::string in_reply_to;
  std::string content_language = "xml";
  std::uint64_t timestamp = 0;
  /// Protocol step and primitive message this message realises; empty for
  /// out-of-protocol traffic (cancel on expiry, not-understood, injected).
  std::string step;
  std::string branch;
};

enum class SessionStatus { Running, Completed, Stuck, DeadlineExpired };

std::string_view to_string(SessionStatus s);

enum class EventKind {
  Sent,
  Delivered,
  Handled,
  VarWrite,
  StatusChange,
  Discover,
  Probe,
  Invoke,
  Cancel,
  Response,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

struct TraceEvent {
  std::uint64_t tick = 0;
  EventKind kind = EventKind::Sent;
  std::string performative;
  std::string sender;
  std::string receiver;
  std::string conversation;
  std::string correlation;
  /// Wire payload (XML content, var delta, status reason, service detail).
  std::string payload;
  std::string step;
  std::string branch;
  /// true for traffic outside the protocol's own firing sequence.
  bool control = false;
  std::uint64_t message_id = 0;
  /// Service discovery flow this event belongs to, if any.
  std::string flow;
};

/// FNV-1a 64-bit digest, hex encoded.
std::string payload_digest(std::string_view payload);

struct ExecutionTrace {
  std::vector<TraceEvent> events;

  /// One JSON record per line, fixed field order: tick, kind, performative,
  /// sender, receiver, conversation, correlation, digest, then msg, step,
  /// branch, control, flow, payload.
  [[nodiscard]] std::string to_ndjson() const;
  static ExecutionTrace from_ndjson(std::string_view text);
  /// Status named by the last StatusChange event, if any.
  [[nodiscard]] std::optional<SessionStatus> final_status() const;
};

struct Skill {
  bool available = true;
  double cost = 0.0;
};

using SkillTable = std::map<std::string, Skill>;

struct Task {
  std::string description;
  std::vector<std::string> requirements;
  std::vector<std::string> constraints;
};

struct SessionOptions {
  std::shared_ptr<const Registry> registry;
  SelectionPolicy policy = SelectionPolicy::MinCost;
  /// Further candidates tried after a failed invocation.
  std::size_t retries = 1;
  /// Run even without a passing verification; recorded in the trace.
  bool force = false;
  /// Skill tables per agent name; agents without one accept any task.
  std::map<std::string, SkillTable> skills;
};

class SessionError : public std::runtime_error {
 public:
  SessionError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  [[nodiscard]] const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Per-CM response accounting kept by the Integrator.
struct ResponseLedger {
  std::size_t received = 0;
  ResponseBounds expectation;
  bool instantiated = false;
};

/// Snapshot of one role's progress.
struct RoleProgress {
  AgentId agent;
  std::size_t cursor = 0;
  std::size_t chain_length = 0;
  std::size_t inbox = 0;
  bool awaiting = false;
  std::optional<Task> assignment;
};

struct ConformanceResult {
  bool ok = true;
  /// Index into the trace of the first event that could not be replayed.
  std::optional<std::size_t> divergence;
  std::string diagnostic;
  Marking marking;
};

/// Replays protocol events (Sent/Handled) as net firings. ok iff every
/// mapped event fires legally and, when the trace ends Completed, the
/// resulting marking is final.
ConformanceResult trace_conformance(const ExecutionTrace& trace, const ColoredPetriNet& net);

class Session {
 public:
  /// Throws SessionError with code BINDINGS_INCOMPLETE, UNKNOWN_ROLE,
  /// NO_INTEGRATOR, DUPLICATE_INTEGRATOR, DUPLICATE_AGENT or UNVERIFIED.
  static Session create(InteractionProtocol ip, ColoredPetriNet net, RoleBindings bindings, std::uint64_t seed,
                        const VerificationReport* verification, SessionOptions options = {});

  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  ~Session();

  /// Instantiates the first protocol step with the task embedded in its
  /// content. XOR/OR selections are deferred to the next step. When an
  /// explicit order makes the Integrator receive first, the task rides on
  /// its first outgoing message instead. Throws
  /// SessionError (ALREADY_ANNOUNCED, NOT_RUNNING, NOT_INTEGRATOR).
  std::vector<TraceEvent> announce(const Task& task);

  /// Delivers the next scheduled item and lets every agent react.
  std::vector<TraceEvent> step();

  /// Steps until a terminal status or `max_steps` (then Stuck, reason
  /// "budget-exhausted").
  SessionStatus run_to_completion(std::size_t max_steps);

  [[nodiscard]] std::optional<Value> dataspace_read(std::string_view key) const;
  /// Returns the new version. Throws SessionError (UNDECLARED_VAR, TYPE_MISMATCH).
  std::uint64_t dataspace_write(std::string_view key, Value value);

  /// Enqueues an out-of-protocol message for fault-injection tests.
  void inject(AclMessage msg);

  [[nodiscard]] SessionStatus status() const;
  [[nodiscard]] const std::string& status_reason() const;
  [[nodiscard]] const ExecutionTrace& trace() const;
  [[nodiscard]] std::uint64_t clock() const;
  [[nodiscard]] std::size_t steps_taken() const;
  [[nodiscard]] const std::string& conversation_id() const;
  [[nodiscard]] RoleProgress progress(std::string_view role) const;
  [[nodiscard]] std::map<std::string, ResponseLedger> ledgers() const;
  [[nodiscard]] const InteractionProtocol& protocol() const;
  [[nodiscard]] const ColoredPetriNet& net() const;
  /// Net marking reached by replaying the trace so far.
  [[nodiscard]] Marking current_marking() const;

 private:
  struct Impl;
  explicit Session(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace ipe
