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

#include <algorithm>
#include <sstream>
#include <tuple>

#include "ipe/runtime.hpp"

namespace ipe {

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Integrator: return "Integrator";
    case AgentKind::Enterprise: return "Enterprise";
    case AgentKind::Service: return "Service";
  }
  return "Enterprise";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Running: return "Running";
    case SessionStatus::Completed: return "Completed";
    case SessionStatus::Stuck: return "Stuck";
    case SessionStatus::DeadlineExpired: return "DeadlineExpired";
  }
  return "Running";
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string plain_value(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return render_value(v);
}

}  // namespace

struct Session::Impl {
  struct RoleState {
    std::string role;
    AgentId agent;
    bool web_service = false;
    std::vector<std::size_t> chain;
    std::size_t cursor = 0;
    bool awaiting = false;
    std::vector<AclMessage> inbox;
    std::optional<Task> assignment;
    std::string last_reply_with;
    std::string last_response;
  };

  struct StepState {
    bool instantiated = false;
    std::vector<std::size_t> selected;
    std::set<std::size_t> handled;
    bool done = false;
  };

  struct Issued {
    AclMessage msg;
    std::size_t step = 0;
    std::size_t branch = 0;
    std::optional<std::uint64_t> deadline_tick;
    bool handled = false;
    bool in_service = false;
  };

  struct Scheduled {
    std::uint64_t ready = 0;
    std::uint64_t jitter = 0;
    std::uint64_t seq = 0;
    bool service_response = false;
    AclMessage msg;
    std::string flow;
    InvocationOutcome outcome;
  };

  struct Flow {
    std::string id;
    std::uint64_t message = 0;
    std::vector<std::string> candidates;
    std::size_t round = 0;
    std::set<std::string> excluded;
  };

  struct Slot {
    std::optional<Value> value;
    std::uint64_t version = 0;
  };

  InteractionProtocol ip;
  ColoredPetriNet net;
  SessionOptions options;
  Rng rng;
  std::string conversation;
  std::string integrator;

  std::vector<RoleState> roles;
  std::map<std::string, std::size_t> role_of_agent;
  std::map<std::string, std::size_t, std::less<>> role_index;
  std::vector<StepState> steps;
  std::map<std::string, ResponseLedger> ledgers;
  std::vector<Scheduled> queue;
  std::map<std::uint64_t, Issued> issued;
  std::map<std::string, Flow> flows;
  std::map<std::string, Slot, std::less<>> dataspace;

  ExecutionTrace trace;
  std::vector<TraceEvent>* sink = nullptr;
  std::uint64_t clock = 0;
  std::uint64_t seq = 0;
  std::uint64_t next_id = 1;
  std::size_t steps_taken = 0;
  SessionStatus status = SessionStatus::Running;
  std::string reason;
  bool announced = false;
  /// Task waiting for the Integrator's first outgoing protocol message.
  std::optional<Task> pending_task;

  Impl(InteractionProtocol p, ColoredPetriNet n, SessionOptions o, std::uint64_t seed)
      : ip(std::move(p)), net(std::move(n)), options(std::move(o)), rng(seed) {
    conversation = ip.id + "-" + std::to_string(seed);
  }

  // -- events ---------------------------------------------------------------

  void emit(TraceEvent ev) {
    ev.conversation = conversation;
    if (sink) sink->push_back(ev);
    trace.events.push_back(std::move(ev));
  }

  TraceEvent message_event(EventKind kind, const AclMessage& m, bool control) const {
    TraceEvent ev;
    ev.tick = clock;
    ev.kind = kind;
    ev.performative = std::string(to_string(m.performative));
    ev.sender = m.sender;
    ev.receiver = m.receiver;
    ev.correlation = m.reply_with + "|" + m.in_reply_to;
    ev.payload = render_content_xml(m.content);
    ev.step = m.step;
    ev.branch = m.branch;
    ev.control = control;
    ev.message_id = m.id;
    return ev;
  }

  void set_status(SessionStatus s, std::string why) {
    status = s;
    reason = std::move(why);
    TraceEvent ev;
    ev.tick = clock;
    ev.kind = EventKind::StatusChange;
    ev.performative = std::string(to_string(s));
    ev.payload = reason;
    emit(std::move(ev));
  }

  // -- protocol view ----------------------------------------------------------

  std::optional<std::size_t> current_step(const RoleState& r) const {
    if (r.cursor >= r.chain.size()) return std::nullopt;
    return r.chain[r.cursor];
  }

  bool at_step(const std::string& role, std::size_t step) const {
    const auto& r = roles[role_index.find(role)->second];
    return current_step(r) == step;
  }

  RoleState& role(const std::string& name) { return roles[role_index.find(name)->second]; }

  Bindings env() const {
    Bindings out;
    for (const auto& [k, slot] : dataspace) {
      if (slot.value) out.emplace(k, *slot.value);
    }
    return out;
  }

  static const PrimitiveMessage& branch_of(const MessageStep& step, std::size_t b) {
    if (const auto* pm = std::get_if<PrimitiveMessage>(&step)) return *pm;
    return std::get<ComplexMessage>(step).branches[b];
  }

  bool skill_available(const RoleState& r) const {
    const auto it = options.skills.find(r.agent.name);
    if (it == options.skills.end() || !r.assignment || r.assignment->requirements.empty()) return true;
    for (const auto& req : r.assignment->requirements) {
      auto s = it->second.find(req);
      if (s != it->second.end() && s->second.available) return true;
    }
    return false;
  }

  std::optional<double> skill_cost(const RoleState& r) const {
    const auto it = options.skills.find(r.agent.name);
    if (it == options.skills.end() || !r.assignment) return std::nullopt;
    for (const auto& req : r.assignment->requirements) {
      auto s = it->second.find(req);
      if (s != it->second.end() && s->second.available) return s->second.cost;
    }
    return std::nullopt;
  }

  Content content_for(const RoleState& sender, const PrimitiveMessage& pm) const {
    Content c;
    for (const auto& [k, slot] : dataspace) {
      if (slot.value) c.bindings[k] = plain_value(*slot.value);
    }
    if (sender.agent.kind == AgentKind::Enterprise && pm.act == CommunicativeAct::Propose) {
      if (auto cost = skill_cost(sender)) {
        std::ostringstream os;
        os << *cost;
        c.bindings["cost"] = os.str();
      }
    }
    if (sender.web_service && !sender.last_response.empty()) c.body = sender.last_response;
    return c;
  }

  // -- sending ----------------------------------------------------------------

  void enqueue(AclMessage msg) {
    Scheduled s;
    s.ready = clock + 1;
    s.jitter = rng.next();
    s.seq = seq++;
    s.msg = std::move(msg);
    queue.push_back(std::move(s));
  }

  AclMessage make_message(const RoleState& sender, const PrimitiveMessage& pm, const std::string& step_name) {
    AclMessage m;
    m.id = next_id++;
    m.performative = pm.act;
    m.sender = sender.agent.name;
    m.receiver = role(pm.receiver).agent.name;
    m.content = content_for(sender, pm);
    m.conversation_id = conversation;
    m.reply_with = "r" + std::to_string(m.id);
    m.in_reply_to = sender.last_reply_with;
    m.timestamp = clock;
    m.step = step_name;
    m.branch = pm.name;
    return m;
  }

  void send_protocol(AclMessage m, std::size_t step, std::size_t branch, const PrimitiveMessage& pm) {
    Issued is;
    is.msg = m;
    is.step = step;
    is.branch = branch;
    if (pm.option.deadline) is.deadline_tick = clock + static_cast<std::uint64_t>(*pm.option.deadline);
    issued.emplace(m.id, std::move(is));
    emit(message_event(EventKind::Sent, m, false));
    enqueue(std::move(m));
  }

  std::size_t choose_exclusive(const RoleState& r, const ComplexMessage& cm, const std::vector<std::size_t>& cands) {
    if (r.agent.kind == AgentKind::Enterprise) {
      std::optional<std::size_t> propose, refuse;
      for (auto i : cands) {
        if (cm.branches[i].act == CommunicativeAct::Propose && !propose) propose = i;
        if (cm.branches[i].act == CommunicativeAct::Refuse && !refuse) refuse = i;
      }
      if (propose && refuse) return skill_available(r) ? *propose : *refuse;
    }
    return cands[rng.below(cands.size())];
  }

  /// The Integrator's first send carries `task`; later sends pass none.
  bool try_send(RoleState& r, bool allow_choice = true, const Task* task = nullptr) {
    if (r.awaiting) return false;
    const auto s = current_step(r);
    if (!s) return false;
    const MessageStep& step = ip.messages[*s];
    if (step_sender(step) != r.role) return false;
    StepState& st = steps[*s];
    if (st.instantiated) return false;
    const Bindings vars = env();
    auto guard_ok = [&](const PrimitiveMessage& pm) { return !pm.option.guard || evaluate(*pm.option.guard, vars); };

    auto decorate = [&](AclMessage& m) {
      if (task == nullptr) return;
      m.content.bindings["task"] = task->description;
      m.content.bindings["requirements"] = join(task->requirements, ",");
      m.content.bindings["constraints"] = join(task->constraints, ",");
    };

    if (const auto* pm = std::get_if<PrimitiveMessage>(&step)) {
      if (!guard_ok(*pm)) return false;
      st.instantiated = true;
      st.selected = {0};
      AclMessage m = make_message(r, *pm, pm->name);
      decorate(m);
      if (task) role(pm->receiver).assignment = *task;
      send_protocol(std::move(m), *s, 0, *pm);
      if (pm->option.mode == MessageMode::Asynchronous) {
        ++r.cursor;
      } else {
        r.awaiting = true;
      }
      return true;
    }

    const auto& cm = std::get<ComplexMessage>(step);
    if (cm.op != Operator::And && !allow_choice) return false;
    std::vector<std::size_t> cands;
    for (std::size_t i = 0; i < cm.branches.size(); ++i) {
      if (cm.op == Operator::And || guard_ok(cm.branches[i])) cands.push_back(i);
    }
    if (cands.empty()) return false;

    if (cm.op == Operator::Xor) {
      const std::size_t pick = choose_exclusive(r, cm, cands);
      const auto& br = cm.branches[pick];
      st.instantiated = true;
      st.selected = {pick};
      auto& ledger = ledgers[cm.name];
      ledger.instantiated = true;
      ledger.expectation = expected_responses(cm);
      send_protocol(make_message(r, br, cm.name), *s, pick, br);
      if (br.option.mode == MessageMode::Asynchronous) {
        ++r.cursor;
      } else {
        r.awaiting = true;
      }
      return true;
    }

    std::vector<std::size_t> chosen;
    if (cm.op == Operator::And) {
      chosen = cands;
    } else {
      const std::uint64_t subsets = (std::uint64_t{1} << cands.size()) - 1;
      const std::uint64_t mask = rng.below(subsets) + 1;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (mask & (std::uint64_t{1} << i)) chosen.push_back(cands[i]);
      }
    }
    st.instantiated = true;
    st.selected = chosen;
    auto& ledger = ledgers[cm.name];
    ledger.instantiated = true;
    ledger.expectation = expected_responses(cm);
    r.awaiting = true;
    for (auto i : chosen) {
      const auto& br = cm.branches[i];
      if (!guard_ok(br)) continue;  // AND branch blocked by its guard
      AclMessage m = make_message(r, br, cm.name);
      decorate(m);
      if (task) role(br.receiver).assignment = *task;
      send_protocol(std::move(m), *s, i, br);
    }
    return true;
  }

  // -- receiving --------------------------------------------------------------

  bool ready(const Issued& is) const {
    const MessageStep& step = ip.messages[is.step];
    if (const auto* cm = std::get_if<ComplexMessage>(&step); cm && cm->op == Operator::Xor) {
      for (const auto& r : step_receivers(step)) {
        if (!at_step(r, is.step)) return false;
      }
      return true;
    }
    return at_step(branch_of(step, is.branch).receiver, is.step);
  }

  void handle(Issued& is) {
    const MessageStep& step = ip.messages[is.step];
    const PrimitiveMessage& pm = branch_of(step, is.branch);
    RoleState& recv = role(pm.receiver);
    RoleState& send = role(pm.sender);
    is.handled = true;
    recv.last_reply_with = is.msg.reply_with;
    emit(message_event(EventKind::Handled, is.msg, false));
    StepState& st = steps[is.step];
    st.handled.insert(is.branch);
    const bool sync = pm.option.mode == MessageMode::Synchronous;

    const auto* cm = std::get_if<ComplexMessage>(&step);
    if (cm == nullptr) {
      ++recv.cursor;
      if (sync) {
        ++send.cursor;
        send.awaiting = false;
      }
      st.done = true;
      return;
    }
    ++ledgers[cm->name].received;
    if (cm->op == Operator::Xor) {
      for (const auto& r : step_receivers(step)) ++role(r).cursor;
      if (sync) {
        ++send.cursor;
        send.awaiting = false;
      }
      st.done = true;
    }
    // AND / OR complete at the join.
  }

  bool try_join(std::size_t s) {
    const auto* cm = std::get_if<ComplexMessage>(&ip.messages[s]);
    if (cm == nullptr || cm->op == Operator::Xor) return false;
    StepState& st = steps[s];
    if (!st.instantiated || st.done) return false;
    for (auto b : st.selected) {
      if (!st.handled.contains(b)) return false;
    }
    const auto receivers = step_receivers(ip.messages[s]);
    for (const auto& r : receivers) {
      if (!at_step(r, s)) return false;
    }
    RoleState& sender = role(cm->branches.front().sender);
    ++sender.cursor;
    sender.awaiting = false;
    for (const auto& r : receivers) ++role(r).cursor;
    st.done = true;
    return true;
  }

  void accept(std::uint64_t id) {
    Issued& is = issued.at(id);
    const auto& recv = role(branch_of(ip.messages[is.step], is.branch).receiver);
    if (recv.web_service) {
      start_flow(is);
    } else {
      handle(is);
    }
  }

  // -- services ---------------------------------------------------------------

  TraceEvent service_event(EventKind kind, const std::string& receiver, std::string payload, const Flow& f) const {
    TraceEvent ev;
    ev.tick = clock;
    ev.kind = kind;
    ev.sender = integrator;
    ev.receiver = receiver;
    ev.payload = std::move(payload);
    ev.control = true;
    ev.flow = f.id;
    ev.message_id = f.message;
    const auto& is = issued.at(f.message);
    ev.step = is.msg.step;
    ev.branch = is.msg.branch;
    return ev;
  }

  // Each round is a full discover / probe / invoke cycle; a retry starts a
  // fresh round that skips services which already failed.
  void start_flow(Issued& is, std::size_t round = 0, std::set<std::string> excluded = {}) {
    is.in_service = true;
    const Role* decl = ip.find_role(branch_of(ip.messages[is.step], is.branch).receiver);
    std::set<std::string> criteria(decl->keywords.begin(), decl->keywords.end());
    if (criteria.empty()) criteria.insert(decl->name);

    Flow f;
    f.id = "f" + std::to_string(flows.size() + 1);
    f.message = is.msg.id;
    f.round = round;
    f.excluded = std::move(excluded);
    std::vector<ServiceDescription> found;
    if (options.registry) found = options.registry->discover(criteria);
    for (const auto& d : found) f.candidates.push_back(d.id);
    emit(service_event(EventKind::Discover, "registry",
                       join(std::vector<std::string>(criteria.begin(), criteria.end()), ",") + " -> [" +
                           join(f.candidates, ",") + "]",
                       f));
    std::map<std::string, AttributeProbe> probes;
    if (options.registry) probes = fetch_attributes(*options.registry, found, &rng);
    for (const auto& id : f.candidates) {
      const auto& p = probes.at(id);
      std::string detail = p.available ? "available" : "unavailable";
      if (p.available) {
        for (const auto& [k, v] : p.attributes) {
          std::ostringstream os;
          os << ' ' << k << '=';
          if (const auto* d = std::get_if<double>(&v)) {
            os << *d;
          } else {
            os << std::get<std::string>(v);
          }
          detail += os.str();
        }
      }
      emit(service_event(EventKind::Probe, id, detail, f));
    }
    for (const auto& id : f.excluded) probes.erase(id);
    const auto order = selection_order(probes, options.policy);
    if (order.empty()) {
      emit(service_event(EventKind::Response, "registry", "failed: no-candidates", f));
      flows.emplace(f.id, std::move(f));
      return;
    }
    const std::string chosen = order.front();
    std::vector<std::string> others;
    for (const auto& c : f.candidates) {
      if (c != chosen) others.push_back(c);
    }
    InvocationOutcome out = invoke_parallel(*options.registry, chosen, others, to_string(is.msg.performative), rng);
    emit(service_event(EventKind::Invoke, chosen, "policy=" + std::string(to_string(options.policy)), f));
    for (const auto& o : others) emit(service_event(EventKind::Cancel, o, "not selected", f));
    Scheduled s;
    s.ready = clock + out.latency;
    s.jitter = rng.next();
    s.seq = seq++;
    s.service_response = true;
    s.flow = f.id;
    s.outcome = std::move(out);
    queue.push_back(std::move(s));
    flows.emplace(f.id, std::move(f));
  }

  void on_response(const Scheduled& s) {
    const Flow& f = flows.at(s.flow);
    emit(service_event(EventKind::Response, s.outcome.chosen,
                       (s.outcome.failed ? "failed: " : "ok: ") + s.outcome.response, f));
    Issued& is = issued.at(f.message);
    if (s.outcome.failed) {
      if (f.round < options.retries) {
        auto excluded = f.excluded;
        excluded.insert(s.outcome.chosen);
        start_flow(is, f.round + 1, std::move(excluded));
      }
      return;
    }
    role(branch_of(ip.messages[is.step], is.branch).receiver).last_response = s.outcome.response;
    handle(is);
  }

  // -- scheduling -------------------------------------------------------------

  void deliver(AclMessage m) {
    auto it = issued.find(m.id);
    const bool legit = it != issued.end() && !it->second.handled && !it->second.in_service &&
                       it->second.msg.sender == m.sender && it->second.msg.receiver == m.receiver &&
                       it->second.msg.performative == m.performative;
    emit(message_event(EventKind::Delivered, m, !legit));
    if (!legit) {
      const bool answerable = m.performative != CommunicativeAct::NotUnderstood &&
                              m.performative != CommunicativeAct::Cancel && role_of_agent.contains(m.sender) &&
                              role_of_agent.contains(m.receiver);
      if (!answerable) return;
      AclMessage reply;
      reply.id = next_id++;
      reply.performative = CommunicativeAct::NotUnderstood;
      reply.sender = m.receiver;
      reply.receiver = m.sender;
      reply.content.body = "unexpected " + std::string(to_string(m.performative));
      reply.conversation_id = conversation;
      reply.reply_with = "r" + std::to_string(reply.id);
      reply.in_reply_to = m.reply_with;
      reply.timestamp = clock;
      emit(message_event(EventKind::Sent, reply, true));
      enqueue(std::move(reply));
      return;
    }
    if (ready(it->second)) {
      accept(m.id);
    } else {
      roles[role_of_agent.at(m.receiver)].inbox.push_back(std::move(m));
    }
  }

  void cascade() {
    bool progress = true;
    while (progress && status == SessionStatus::Running) {
      progress = false;
      for (auto& r : roles) {
        for (std::size_t i = 0; i < r.inbox.size();) {
          const std::uint64_t id = r.inbox[i].id;
          if (ready(issued.at(id))) {
            r.inbox.erase(r.inbox.begin() + static_cast<std::ptrdiff_t>(i));
            accept(id);
            progress = true;
          } else {
            ++i;
          }
        }
        const Task* task = pending_task && r.agent.kind == AgentKind::Integrator ? &*pending_task : nullptr;
        if (try_send(r, true, task)) {
          progress = true;
          if (task != nullptr) pending_task.reset();
        }
      }
      for (std::size_t s = 0; s < steps.size(); ++s) {
        if (try_join(s)) progress = true;
      }
    }
  }

  bool complete() const {
    for (const auto& r : roles) {
      if (r.cursor != r.chain.size() || r.awaiting) return false;
    }
    for (const auto& [name, l] : ledgers) {
      if (l.instantiated && (l.received < l.expectation.min || l.received > l.expectation.max)) return false;
    }
    return true;
  }

  void check_deadlines() {
    for (auto& [id, is] : issued) {
      if (is.handled || !is.deadline_tick || clock < *is.deadline_tick) continue;
      AclMessage cancel;
      cancel.id = next_id++;
      cancel.performative = CommunicativeAct::Cancel;
      cancel.sender = integrator;
      cancel.receiver = is.msg.receiver == integrator ? is.msg.sender : is.msg.receiver;
      cancel.content.body = "deadline passed for " + is.msg.branch;
      cancel.conversation_id = conversation;
      cancel.reply_with = "r" + std::to_string(cancel.id);
      cancel.in_reply_to = is.msg.reply_with;
      cancel.timestamp = clock;
      cancel.step = is.msg.step;
      cancel.branch = is.msg.branch;
      emit(message_event(EventKind::Sent, cancel, true));
      enqueue(std::move(cancel));
      set_status(SessionStatus::DeadlineExpired, "deadline of " + is.msg.branch + " expired at tick " +
                                                     std::to_string(clock));
      return;
    }
  }

  void finish_if_complete() {
    if (status == SessionStatus::Running && complete()) set_status(SessionStatus::Completed, "all roles finished");
  }

  Marking replayed_marking() const { return trace_conformance(trace, net).marking; }

  void go_stuck(const std::string& why) {
    set_status(SessionStatus::Stuck, why + " at marking " + describe_marking(net, replayed_marking()));
  }

  std::vector<TraceEvent> step_once() {
    std::vector<TraceEvent> out;
    if (status != SessionStatus::Running) return out;
    if (!announced) throw SessionError("NOT_ANNOUNCED", "step called before announce");
    sink = &out;
    ++steps_taken;
    cascade();
    finish_if_complete();
    if (status == SessionStatus::Running) {
      if (queue.empty()) {
        go_stuck("no deliverable work");
      } else {
        auto it = std::min_element(queue.begin(), queue.end(), [](const Scheduled& a, const Scheduled& b) {
          return std::tie(a.ready, a.jitter, a.seq) < std::tie(b.ready, b.jitter, b.seq);
        });
        Scheduled item = std::move(*it);
        queue.erase(it);
        clock = std::max(clock + 1, item.ready);
        if (item.service_response) {
          on_response(item);
        } else {
          deliver(std::move(item.msg));
        }
        cascade();
        check_deadlines();
        finish_if_complete();
      }
    }
    sink = nullptr;
    return out;
  }
};

// ---------------------------------------------------------------------------

Session::Session(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;
Session::~Session() = default;

Session Session::create(InteractionProtocol ip, ColoredPetriNet net, RoleBindings bindings, std::uint64_t seed,
                        const VerificationReport* verification, SessionOptions options) {
  std::vector<std::string> missing;
  for (const auto& r : ip.roles) {
    auto it = bindings.find(r.name);
    if (r.kind == RoleKind::WebService) {
      if (it != bindings.end() && it->second.kind != AgentKind::Service) {
        throw SessionError("BINDINGS_INVALID", "WebService role '" + r.name + "' must be bound to a Service agent");
      }
      if (it == bindings.end()) bindings.emplace(r.name, AgentId{"svc:" + r.name, AgentKind::Service});
      continue;
    }
    if (it == bindings.end()) missing.push_back(r.name);
  }
  if (!missing.empty()) {
    throw SessionError("BINDINGS_INCOMPLETE", "no agent bound to role(s): " + join(missing, ", "));
  }
  std::set<std::string> names;
  std::size_t integrators = 0;
  for (const auto& [role, agent] : bindings) {
    if (ip.find_role(role) == nullptr) throw SessionError("UNKNOWN_ROLE", "binding names unknown role '" + role + "'");
    if (!names.insert(agent.name).second) {
      throw SessionError("DUPLICATE_AGENT", "agent '" + agent.name + "' is bound to more than one role");
    }
    if (agent.kind == AgentKind::Integrator) ++integrators;
  }
  if (integrators == 0) throw SessionError("NO_INTEGRATOR", "exactly one Integrator agent is required, found none");
  if (integrators > 1) {
    throw SessionError("DUPLICATE_INTEGRATOR",
                       "exactly one Integrator agent is required, found " + std::to_string(integrators));
  }
  const bool verified = verification != nullptr && verification->proper_termination == Verdict::Holds;
  if (!verified && !options.force) {
    throw SessionError("UNVERIFIED", "protocol lacks a verification report with proper termination; use force");
  }

  const bool forced = !verified;
  auto impl = std::make_unique<Impl>(std::move(ip), std::move(net), std::move(options), seed);
  for (const auto& r : impl->ip.roles) {
    Impl::RoleState rs;
    rs.role = r.name;
    rs.agent = bindings.at(r.name);
    rs.web_service = r.kind == RoleKind::WebService;
    rs.chain = role_chain(impl->ip, r.name);
    if (rs.agent.kind == AgentKind::Integrator) impl->integrator = rs.agent.name;
    impl->role_of_agent.emplace(rs.agent.name, impl->roles.size());
    impl->role_index.emplace(r.name, impl->roles.size());
    impl->roles.push_back(std::move(rs));
  }
  impl->steps.resize(impl->ip.messages.size());
  for (const auto& v : impl->ip.vars) impl->dataspace[v.name] = Impl::Slot{v.initial, 0};
  if (forced) {
    TraceEvent ev;
    ev.kind = EventKind::StatusChange;
    ev.performative = "Running";
    ev.payload = "forced: verification overridden";
    impl->emit(std::move(ev));
  }
  return Session(std::move(impl));
}

std::vector<TraceEvent> Session::announce(const Task& task) {
  Impl& s = *impl_;
  if (s.status != SessionStatus::Running) {
    throw SessionError("NOT_RUNNING", "cannot announce on a session in status " + std::string(to_string(s.status)));
  }
  if (s.announced) throw SessionError("ALREADY_ANNOUNCED", "session was already announced");
  std::vector<TraceEvent> out;
  if (!s.ip.messages.empty()) {
    const std::string& sender = step_sender(s.ip.messages.front());
    auto& r = s.role(sender);
    if (r.agent.kind != AgentKind::Integrator) {
      throw SessionError("NOT_INTEGRATOR", "first step '" + step_name(s.ip.messages.front()) + "' is sent by '" +
                                               sender + "', which is not bound to the Integrator");
    }
    r.assignment = task;
    const auto head = s.current_step(r);
    if (head && step_sender(s.ip.messages[*head]) == r.role) {
      s.sink = &out;
      s.try_send(r, /*allow_choice=*/false, &task);
      s.sink = nullptr;
    } else {
      // An explicit order has the Integrator receive first.
      s.pending_task = task;
    }
  }
  s.announced = true;
  return out;
}

std::vector<TraceEvent> Session::step() { return impl_->step_once(); }

SessionStatus Session::run_to_completion(std::size_t max_steps) {
  Impl& s = *impl_;
  std::size_t n = 0;
  while (s.status == SessionStatus::Running && n < max_steps) {
    s.step_once();
    ++n;
  }
  if (s.status == SessionStatus::Running) {
    std::vector<TraceEvent> sink;
    s.sink = &sink;
    s.go_stuck("budget-exhausted after " + std::to_string(max_steps) + " steps");
    s.sink = nullptr;
  }
  return s.status;
}

std::optional<Value> Session::dataspace_read(std::string_view key) const {
  auto it = impl_->dataspace.find(key);
  if (it == impl_->dataspace.end()) {
    throw SessionError("UNDECLARED_VAR", "variable '" + std::string(key) + "' is not declared by the protocol");
  }
  return it->second.value;
}

std::uint64_t Session::dataspace_write(std::string_view key, Value value) {
  Impl& s = *impl_;
  auto it = s.dataspace.find(key);
  if (it == s.dataspace.end()) {
    throw SessionError("UNDECLARED_VAR", "variable '" + std::string(key) + "' is not declared by the protocol");
  }
  const VarDecl* decl = s.ip.find_var(key);
  if (type_of(value) != decl->type) {
    throw SessionError("TYPE_MISMATCH", "variable '" + std::string(key) + "' has type " +
                                            std::string(to_string(decl->type)));
  }
  it->second.value = value;
  ++it->second.version;
  TraceEvent ev;
  ev.tick = s.clock;
  ev.kind = EventKind::VarWrite;
  ev.performative = std::string(key);
  ev.payload = std::string(key) + "=" + render_value(value) + " v" + std::to_string(it->second.version);
  s.emit(std::move(ev));
  return it->second.version;
}

void Session::inject(AclMessage msg) {
  Impl& s = *impl_;
  msg.id = s.next_id++;
  msg.conversation_id = s.conversation;
  msg.timestamp = s.clock;
  if (msg.reply_with.empty()) msg.reply_with = "r" + std::to_string(msg.id);
  s.emit(s.message_event(EventKind::Sent, msg, true));
  s.enqueue(std::move(msg));
}

SessionStatus Session::status() const { return impl_->status; }
const std::string& Session::status_reason() const { return impl_->reason; }
const ExecutionTrace& Session::trace() const { return impl_->trace; }
std::uint64_t Session::clock() const { return impl_->clock; }
std::size_t Session::steps_taken() const { return impl_->steps_taken; }
const std::string& Session::conversation_id() const { return impl_->conversation; }
const InteractionProtocol& Session::protocol() const { return impl_->ip; }
const ColoredPetriNet& Session::net() const { return impl_->net; }
std::map<std::string, ResponseLedger> Session::ledgers() const { return impl_->ledgers; }
Marking Session::current_marking() const { return impl_->replayed_marking(); }

RoleProgress Session::progress(std::string_view role) const {
  auto it = impl_->role_index.find(role);
  if (it == impl_->role_index.end()) throw SessionError("UNKNOWN_ROLE", "no role '" + std::string(role) + "'");
  const auto& r = impl_->roles[it->second];
  return {r.agent, r.cursor, r.chain.size(), r.inbox.size(), r.awaiting, r.assignment};
}

}  // namespace ipe
