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

#include "ipe/ipe.h"

#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>

#include "ipe/analysis.hpp"
#include "ipe/cpn.hpp"
#include "ipe/protocol.hpp"
#include "ipe/runtime.hpp"
#include "ipe/services.hpp"

struct ipe_protocol {
  ipe::InteractionProtocol ip;
};

struct ipe_net {
  ipe::ColoredPetriNet net;
};

struct ipe_registry {
  std::shared_ptr<const ipe::Registry> registry;
};

struct ipe_session {
  std::optional<ipe::Session> session;
  ipe::VerificationReport report;
  bool verified = false;
};

namespace {

thread_local std::string g_last_error;

ipe_status fail(ipe_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** dst, const std::string& s) {
  if (dst != nullptr) *dst = dup(s);
}

template <typename F>
ipe_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const ipe::ProtocolError& e) {
    return fail(IPE_ERR_PARSE, e.what());
  } catch (const ipe::NetError& e) {
    return fail(IPE_ERR_NET, e.what());
  } catch (const ipe::SessionError& e) {
    return fail(e.code() == "UNVERIFIED" ? IPE_ERR_UNVERIFIED : IPE_ERR_SESSION, e.code() + ": " + e.what());
  } catch (const ipe::ServiceError& e) {
    return fail(e.code() == "IO" ? IPE_ERR_IO : IPE_ERR_SERVICE, e.code() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(IPE_ERR_TRACE, e.what());
  } catch (const std::exception& e) {
    return fail(IPE_ERR_INTERNAL, e.what());
  }
}

ipe_verdict verdict(ipe::Verdict v) {
  switch (v) {
    case ipe::Verdict::Holds: return IPE_HOLDS;
    case ipe::Verdict::Violated: return IPE_VIOLATED;
    case ipe::Verdict::Inconclusive: return IPE_INCONCLUSIVE;
  }
  return IPE_INCONCLUSIVE;
}

ipe_session_status session_status(ipe::SessionStatus s) {
  switch (s) {
    case ipe::SessionStatus::Running: return IPE_SESSION_RUNNING;
    case ipe::SessionStatus::Completed: return IPE_SESSION_COMPLETED;
    case ipe::SessionStatus::Stuck: return IPE_SESSION_STUCK;
    case ipe::SessionStatus::DeadlineExpired: return IPE_SESSION_DEADLINE_EXPIRED;
  }
  return IPE_SESSION_STUCK;
}

ipe::Bounds to_bounds(const ipe_bounds& b) {
  ipe::Bounds out;
  out.max_nodes = static_cast<std::size_t>(b.max_nodes);
  out.max_tokens_per_place = b.max_tokens_per_place;
  return out;
}

ipe::RoleBindings default_bindings(const ipe::InteractionProtocol& ip) {
  ipe::RoleBindings b;
  const std::string integrator = ip.messages.empty() ? ip.roles.front().name : ipe::step_sender(ip.messages.front());
  for (const auto& r : ip.roles) {
    if (r.kind == ipe::RoleKind::WebService) continue;
    b[r.name] = ipe::AgentId{r.name, r.name == integrator ? ipe::AgentKind::Integrator : ipe::AgentKind::Enterprise};
  }
  return b;
}

std::string events_ndjson(std::vector<ipe::TraceEvent> events) {
  ipe::ExecutionTrace t;
  t.events = std::move(events);
  return t.to_ndjson();
}

}  // namespace

extern "C" {

const char* ipe_version(void) { return "0.1.0"; }

const char* ipe_status_string(ipe_status status) {
  switch (status) {
    case IPE_OK: return "ok";
    case IPE_ERR_ARGUMENT: return "invalid argument";
    case IPE_ERR_PARSE: return "parse error";
    case IPE_ERR_INVALID: return "validation error";
    case IPE_ERR_NET: return "net error";
    case IPE_ERR_UNVERIFIED: return "protocol not verified";
    case IPE_ERR_SESSION: return "session error";
    case IPE_ERR_SERVICE: return "service error";
    case IPE_ERR_IO: return "i/o error";
    case IPE_ERR_TRACE: return "trace error";
    case IPE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ipe_last_error(void) { return g_last_error.c_str(); }

void ipe_string_free(char* s) { std::free(s); }

ipe_status ipe_protocol_parse_document(const char* text, size_t len, ipe_protocol** out) {
  if (text == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new ipe_protocol{ipe::parse_document(std::string_view(text, len))};
    return IPE_OK;
  });
}

ipe_status ipe_protocol_parse(const char* text, size_t len, ipe_protocol** out) {
  if (text == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto ip = ipe::parse_document(std::string_view(text, len));
    const auto report = ipe::validate_well_formedness(ip);
    for (const auto& f : report.findings) {
      if (f.severity == ipe::Severity::Error) return fail(IPE_ERR_INVALID, f.location + ": " + f.code + ": " + f.detail);
    }
    *out = new ipe_protocol{std::move(ip)};
    return IPE_OK;
  });
}

void ipe_protocol_free(ipe_protocol* p) { delete p; }

const char* ipe_protocol_id(const ipe_protocol* p) { return p == nullptr ? "" : p->ip.id.c_str(); }

ipe_status ipe_protocol_validate(const ipe_protocol* p, int* ok, char** findings_json) {
  if (p == nullptr) return fail(IPE_ERR_ARGUMENT, "null protocol");
  return guarded([&] {
    const auto report = ipe::validate_well_formedness(p->ip);
    nlohmann::ordered_json j;
    j["protocol"] = p->ip.id;
    j["ok"] = report.ok;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : report.findings) {
      arr.push_back({{"severity", f.severity == ipe::Severity::Error ? "error" : "warning"},
                     {"code", f.code},
                     {"location", f.location},
                     {"detail", f.detail}});
    }
    j["findings"] = std::move(arr);
    if (ok != nullptr) *ok = report.ok ? 1 : 0;
    put(findings_json, j.dump(2) + "\n");
    return IPE_OK;
  });
}

ipe_status ipe_protocol_serialize(const ipe_protocol* p, char** out) {
  if (p == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    put(out, ipe::serialize_protocol(p->ip));
    return IPE_OK;
  });
}

ipe_status ipe_net_translate(const ipe_protocol* p, ipe_net** out) {
  if (p == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new ipe_net{ipe::translate(p->ip)};
    return IPE_OK;
  });
}

void ipe_net_free(ipe_net* n) { delete n; }

size_t ipe_net_place_count(const ipe_net* n) { return n == nullptr ? 0 : n->net.places.size(); }

size_t ipe_net_transition_count(const ipe_net* n) { return n == nullptr ? 0 : n->net.transitions.size(); }

ipe_status ipe_net_export(const ipe_net* n, ipe_format format, char** out) {
  if (n == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  if (format != IPE_FORMAT_PNML && format != IPE_FORMAT_DOT) return fail(IPE_ERR_ARGUMENT, "unknown export format");
  return guarded([&] {
    put(out, ipe::export_net(n->net, format == IPE_FORMAT_PNML ? ipe::ExportFormat::Pnml : ipe::ExportFormat::Dot));
    return IPE_OK;
  });
}

ipe_bounds ipe_default_bounds(void) {
  const ipe::Bounds b;
  return ipe_bounds{b.max_nodes, b.max_tokens_per_place};
}

ipe_status ipe_verify(const ipe_net* n, const ipe_bounds* bounds, int include_timing, ipe_verify_result* out,
                      char** report_json) {
  if (n == nullptr) return fail(IPE_ERR_ARGUMENT, "null net");
  if (bounds != nullptr && (bounds->max_nodes == 0 || bounds->max_tokens_per_place == 0)) {
    return fail(IPE_ERR_ARGUMENT, "bounds must be positive");
  }
  return guarded([&] {
    const auto r = ipe::verify(n->net, bounds != nullptr ? to_bounds(*bounds) : ipe::Bounds{});
    if (out != nullptr) {
      *out = ipe_verify_result{r.passed() ? 1 : 0,         r.bounded ? 1 : 0,
                               verdict(r.deadlock_free),   verdict(r.proper_termination),
                               verdict(r.no_dead_transitions), r.nodes,
                               r.edges,                    r.elapsed_ms};
    }
    put(report_json, ipe::report_to_json(r, n->net, include_timing != 0));
    return IPE_OK;
  });
}

ipe_status ipe_registry_load(const char* path, ipe_registry** out) {
  if (path == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new ipe_registry{std::make_shared<const ipe::Registry>(ipe::load_registry(path))};
    return IPE_OK;
  });
}

ipe_status ipe_registry_parse(const char* json, size_t len, ipe_registry** out) {
  if (json == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new ipe_registry{std::make_shared<const ipe::Registry>(ipe::parse_registry(std::string_view(json, len)))};
    return IPE_OK;
  });
}

void ipe_registry_free(ipe_registry* r) { delete r; }

size_t ipe_registry_size(const ipe_registry* r) { return r == nullptr ? 0 : r->registry->size(); }

ipe_sim_config ipe_default_sim_config(void) {
  return ipe_sim_config{0, 10000, ipe_default_bounds(), IPE_POLICY_MIN_COST, 1, 0, nullptr};
}

ipe_status ipe_session_create(const ipe_protocol* p, const ipe_sim_config* config, ipe_session** out) {
  if (p == nullptr || config == nullptr || out == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  if (config->policy != IPE_POLICY_MIN_COST && config->policy != IPE_POLICY_FIRST) {
    return fail(IPE_ERR_ARGUMENT, "unknown selection policy");
  }
  return guarded([&] {
    auto s = std::make_unique<ipe_session>();
    auto net = ipe::translate(p->ip);
    s->report = ipe::verify(net, to_bounds(config->bounds));
    s->verified = s->report.proper_termination == ipe::Verdict::Holds;
    ipe::SessionOptions opts;
    if (config->registry != nullptr) opts.registry = config->registry->registry;
    opts.policy = config->policy == IPE_POLICY_FIRST ? ipe::SelectionPolicy::First : ipe::SelectionPolicy::MinCost;
    opts.retries = config->retries;
    opts.force = config->force != 0;
    s->session.emplace(ipe::Session::create(p->ip, std::move(net), default_bindings(p->ip), config->seed, &s->report,
                                            std::move(opts)));
    *out = s.release();
    return IPE_OK;
  });
}

void ipe_session_free(ipe_session* s) { delete s; }

ipe_status ipe_session_announce(ipe_session* s, const char* task) {
  if (s == nullptr) return fail(IPE_ERR_ARGUMENT, "null session");
  return guarded([&] {
    ipe::Task t;
    t.description = task != nullptr ? task : "";
    s->session->announce(t);
    return IPE_OK;
  });
}

ipe_status ipe_session_step(ipe_session* s, char** events) {
  if (s == nullptr) return fail(IPE_ERR_ARGUMENT, "null session");
  return guarded([&] {
    auto evs = s->session->step();
    if (events != nullptr) put(events, events_ndjson(std::move(evs)));
    return IPE_OK;
  });
}

ipe_session_status ipe_session_state(const ipe_session* s) {
  return s == nullptr ? IPE_SESSION_STUCK : session_status(s->session->status());
}

ipe_status ipe_session_trace(const ipe_session* s, char** ndjson) {
  if (s == nullptr || ndjson == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    put(ndjson, s->session->trace().to_ndjson());
    return IPE_OK;
  });
}

ipe_status ipe_simulate(const ipe_protocol* p, const ipe_sim_config* config, ipe_sim_result* result,
                        char** trace_ndjson, char** summary_json) {
  ipe_session* raw = nullptr;
  if (const auto st = ipe_session_create(p, config, &raw); st != IPE_OK) return st;
  std::unique_ptr<ipe_session> s(raw);
  return guarded([&] {
    auto& session = *s->session;
    session.announce(ipe::Task{p->ip.id, {}, {}});
    session.run_to_completion(static_cast<std::size_t>(config->max_steps));
    const auto conf = ipe::trace_conformance(session.trace(), session.net());
    if (result != nullptr) {
      *result = ipe_sim_result{session_status(session.status()), conf.ok ? 1 : 0, s->verified ? 1 : 0,
                               session.steps_taken(), session.clock(), session.trace().events.size()};
    }
    put(trace_ndjson, session.trace().to_ndjson());
    if (summary_json != nullptr) {
      nlohmann::ordered_json j;
      j["protocol"] = p->ip.id;
      j["conversation"] = session.conversation_id();
      j["seed"] = config->seed;
      j["status"] = ipe::to_string(session.status());
      j["reason"] = session.status_reason();
      j["conformant"] = conf.ok;
      if (!conf.ok) j["divergence"] = conf.diagnostic;
      j["verified"] = s->verified;
      j["forced"] = config->force != 0;
      j["steps"] = session.steps_taken();
      j["clock"] = session.clock();
      j["events"] = session.trace().events.size();
      j["final_marking"] = ipe::describe_marking(session.net(), conf.marking);
      auto ledgers = nlohmann::ordered_json::object();
      for (const auto& [name, l] : session.ledgers()) {
        ledgers[name] = {{"received", l.received}, {"min", l.expectation.min}, {"max", l.expectation.max}};
      }
      j["ledgers"] = std::move(ledgers);
      put(summary_json, j.dump(2) + "\n");
    }
    return IPE_OK;
  });
}

ipe_status ipe_trace_check(const ipe_net* n, const char* ndjson, size_t len, int* conformant, char** diagnostic) {
  if (n == nullptr || ndjson == nullptr) return fail(IPE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const auto trace = ipe::ExecutionTrace::from_ndjson(std::string_view(ndjson, len));
    const auto r = ipe::trace_conformance(trace, n->net);
    if (conformant != nullptr) *conformant = r.ok ? 1 : 0;
    put(diagnostic, r.diagnostic);
    return IPE_OK;
  });
}

}  // extern "C"
