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

#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "ipe/runtime.hpp"
#include "scanners.hpp"

namespace ipe {
namespace {

using testing::read_fixture;

struct Loaded {
  InteractionProtocol ip;
  ColoredPetriNet net;
  VerificationReport report;
};

Loaded load(const std::string& fixture) {
  Loaded l;
  l.ip = parse_protocol(read_fixture(fixture));
  l.net = translate(l.ip);
  l.report = verify(l.net);
  return l;
}

RoleBindings bind_all(const InteractionProtocol& ip) {
  RoleBindings b;
  const auto& first = step_sender(ip.messages.front());
  for (const auto& r : ip.roles) {
    if (r.kind == RoleKind::WebService) continue;
    b[r.name] = AgentId{"ag-" + r.name, r.name == first ? AgentKind::Integrator : AgentKind::Enterprise};
  }
  return b;
}

Session start(const Loaded& l, std::uint64_t seed, SessionOptions o = {}) {
  return Session::create(l.ip, l.net, bind_all(l.ip), seed, &l.report, std::move(o));
}

std::size_t count_kind(const ExecutionTrace& t, EventKind k, bool control = false) {
  return static_cast<std::size_t>(std::count_if(t.events.begin(), t.events.end(), [&](const TraceEvent& e) {
    return e.kind == k && e.control == control;
  }));
}

std::string create_code(const Loaded& l, RoleBindings b, const VerificationReport* r, bool force = false) {
  SessionOptions o;
  o.force = force;
  try {
    Session::create(l.ip, l.net, std::move(b), 0, r, o);
  } catch (const SessionError& e) {
    return e.code();
  }
  return "";
}

TEST(Session, LinearCompletes) {
  const auto l = load("linear.ipl");
  auto s = start(l, 0);
  s.announce(Task{"buy", {}, {}});
  EXPECT_EQ(s.run_to_completion(100), SessionStatus::Completed);
  const auto& t = s.trace();
  EXPECT_EQ(count_kind(t, EventKind::Sent), 2u);
  EXPECT_EQ(count_kind(t, EventKind::Delivered), 2u);
  EXPECT_EQ(count_kind(t, EventKind::Handled), 2u);
  EXPECT_EQ(t.final_status(), SessionStatus::Completed);
  EXPECT_EQ(s.conversation_id(), "linear-0");
  EXPECT_EQ(s.current_marking(), l.net.finals[0]);
  EXPECT_TRUE(trace_conformance(t, l.net).ok);
  // The answer is a reply to the request.
  const auto answer = std::find_if(t.events.begin(), t.events.end(),
                                   [](const auto& e) { return e.kind == EventKind::Sent && e.step == "answer"; });
  ASSERT_NE(answer, t.events.end());
  EXPECT_EQ(answer->correlation, "r2|r1");
  EXPECT_EQ(s.progress("Buyer").cursor, 2u);
  EXPECT_EQ(s.progress("Seller").chain_length, 2u);
}

TEST(Session, TaskTravelsInTheFirstMessage) {
  const auto l = load("contract_net.ipl");
  auto s = start(l, 1);
  const auto events = s.announce(Task{"weld frame", {"welding", "paint"}, {"by friday"}});
  ASSERT_EQ(events.size(), 2u);
  for (const auto& e : events) {
    EXPECT_EQ(e.kind, EventKind::Sent);
    EXPECT_NE(e.payload.find("<task>weld frame</task>"), std::string::npos);
    EXPECT_NE(e.payload.find("<requirements>welding,paint</requirements>"), std::string::npos);
    EXPECT_NE(e.payload.find("<budget>500</budget>"), std::string::npos);
  }
  EXPECT_EQ(s.progress("Bidder1").assignment->description, "weld frame");
}

TEST(Session, CreateValidatesBindingsAndVerification) {
  const auto l = load("contract_net.ipl");
  auto b = bind_all(l.ip);
  EXPECT_EQ(create_code(l, b, &l.report), "");

  auto missing = b;
  missing.erase("Bidder2");
  EXPECT_EQ(create_code(l, missing, &l.report), "BINDINGS_INCOMPLETE");

  auto unknown = b;
  unknown["Ghost"] = AgentId{"ghost", AgentKind::Enterprise};
  EXPECT_EQ(create_code(l, unknown, &l.report), "UNKNOWN_ROLE");

  auto none = b;
  none["Manager"].kind = AgentKind::Enterprise;
  EXPECT_EQ(create_code(l, none, &l.report), "NO_INTEGRATOR");

  auto two = b;
  two["Bidder1"].kind = AgentKind::Integrator;
  EXPECT_EQ(create_code(l, two, &l.report), "DUPLICATE_INTEGRATOR");

  auto dup = b;
  dup["Bidder1"].name = dup["Bidder2"].name;
  EXPECT_EQ(create_code(l, dup, &l.report), "DUPLICATE_AGENT");

  EXPECT_EQ(create_code(l, b, nullptr), "UNVERIFIED");
  EXPECT_EQ(create_code(l, b, nullptr, true), "");
}

TEST(Session, UnverifiedProtocolNeedsForce) {
  const auto l = load("cyclic_wait.ipl");
  EXPECT_EQ(create_code(l, bind_all(l.ip), &l.report), "UNVERIFIED");
  SessionOptions o;
  o.force = true;
  auto s = start(l, 0, o);
  ASSERT_FALSE(s.trace().events.empty());
  EXPECT_EQ(s.trace().events[0].kind, EventKind::StatusChange);
  EXPECT_NE(s.trace().events[0].payload.find("forced"), std::string::npos);
}

TEST(Session, CyclicWaitGetsStuckAtTheWitnessMarking) {
  const auto l = load("cyclic_wait.ipl");
  SessionOptions o;
  o.force = true;
  auto s = start(l, 0, o);
  s.announce({});
  EXPECT_EQ(s.run_to_completion(100), SessionStatus::Stuck);
  ASSERT_EQ(l.report.deadlocks.size(), 1u);
  EXPECT_EQ(s.current_marking(), l.report.deadlocks[0].marking);
  EXPECT_NE(s.status_reason().find("{p:A:1=1, p:B:1=1}"), std::string::npos);
  EXPECT_TRUE(trace_conformance(s.trace(), l.net).ok);
}

TEST(Session, IntegratorThatReceivesFirstCarriesTaskLater) {
  auto ip = parse_protocol(
      "protocol late\nroles {\n  A: PrivateProcess\n  B: PrivateProcess\n}\nmessages {\n"
      "  pm go: A -> B inform async\n  pm back: B -> A inform async\n}\norder {\n  A: back, go\n  B: back, go\n}\n");
  const auto net = translate(ip);
  const auto report = verify(net);
  ASSERT_EQ(report.proper_termination, Verdict::Holds);
  auto s = Session::create(ip, net, bind_all(ip), 0, &report);
  EXPECT_TRUE(s.announce(Task{"late task", {}, {}}).empty());
  EXPECT_EQ(s.run_to_completion(50), SessionStatus::Completed);
  std::vector<std::string> sent;
  for (const auto& e : s.trace().events) {
    if (e.kind != EventKind::Sent) continue;
    sent.push_back(e.branch);
    EXPECT_EQ(e.payload.find("<task>") != std::string::npos, e.branch == "go") << e.branch;
  }
  EXPECT_EQ(sent, (std::vector<std::string>{"back", "go"}));
}

TEST(Session, AnnounceErrors) {
  const auto l = load("linear.ipl");
  auto s = start(l, 0);
  EXPECT_THROW(s.step(), SessionError);
  s.announce({});
  try {
    s.announce({});
    FAIL();
  } catch (const SessionError& e) {
    EXPECT_EQ(e.code(), "ALREADY_ANNOUNCED");
  }
  s.run_to_completion(10);
  EXPECT_TRUE(s.step().empty());

  auto wrong = bind_all(l.ip);
  wrong["Buyer"].kind = AgentKind::Enterprise;
  wrong["Seller"].kind = AgentKind::Integrator;
  auto s2 = Session::create(l.ip, l.net, wrong, 0, &l.report);
  try {
    s2.announce({});
    FAIL();
  } catch (const SessionError& e) {
    EXPECT_EQ(e.code(), "NOT_INTEGRATOR");
  }
}

TEST(Session, BudgetExhaustion) {
  const auto l = load("contract_net.ipl");
  auto s = start(l, 0);
  s.announce({});
  EXPECT_EQ(s.run_to_completion(2), SessionStatus::Stuck);
  EXPECT_NE(s.status_reason().find("budget-exhausted"), std::string::npos);
  EXPECT_EQ(s.steps_taken(), 2u);
}

TEST(Session, DataspaceReadWrite) {
  const auto l = load("ten_step.ipl");
  auto s = start(l, 0);
  EXPECT_EQ(s.dataspace_read("quantity"), Value{std::int64_t{40}});
  EXPECT_EQ(s.dataspace_write("quantity", std::int64_t{12}), 1u);
  EXPECT_EQ(s.dataspace_write("quantity", std::int64_t{13}), 2u);
  EXPECT_EQ(s.dataspace_read("quantity"), Value{std::int64_t{13}});
  auto code = [&](auto f) {
    try {
      f();
    } catch (const SessionError& e) {
      return e.code();
    }
    return std::string();
  };
  EXPECT_EQ(code([&] { s.dataspace_write("nope", std::int64_t{1}); }), "UNDECLARED_VAR");
  EXPECT_EQ(code([&] { s.dataspace_write("express", std::int64_t{1}); }), "TYPE_MISMATCH");
  EXPECT_EQ(code([&] { (void)s.dataspace_read("nope"); }), "UNDECLARED_VAR");
  EXPECT_EQ(count_kind(s.trace(), EventKind::VarWrite), 2u);
  EXPECT_EQ(s.trace().events.back().payload, "quantity=13 v2");
}

TEST(Session, DataspaceWriteCanLeaveTheVerifiedNet) {
  const auto l = load("ten_step.ipl");
  auto s = start(l, 0);
  s.dataspace_write("express", true);
  s.announce({});
  EXPECT_EQ(s.run_to_completion(200), SessionStatus::Completed);
  // The fast branch is dead in the net, whose guards use declared values.
  const auto c = trace_conformance(s.trace(), l.net);
  EXPECT_FALSE(c.ok);
  EXPECT_NE(c.diagnostic.find("t:mode.fast:choice"), std::string::npos);
}

TEST(Session, DeadlineExpiryCancels) {
  const auto l = load("deadline.ipl");
  ASSERT_TRUE(l.report.passed());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = start(l, seed);
    s.announce({});
    EXPECT_EQ(s.run_to_completion(100), SessionStatus::DeadlineExpired) << seed;
    const auto& ev = s.trace().events;
    const auto cancel = std::find_if(ev.begin(), ev.end(), [](const auto& e) {
      return e.kind == EventKind::Sent && e.performative == "cancel";
    });
    ASSERT_NE(cancel, ev.end());
    EXPECT_TRUE(cancel->control);
    EXPECT_EQ(cancel->sender, "ag-A");
    EXPECT_EQ(cancel->receiver, "ag-C");
    EXPECT_EQ(cancel->branch, "report");
    EXPECT_TRUE(trace_conformance(s.trace(), l.net).ok);
  }
}

TEST(Session, UnexpectedMessageGetsNotUnderstood) {
  const auto l = load("linear.ipl");
  auto s = start(l, 0);
  s.announce({});
  AclMessage m;
  m.performative = CommunicativeAct::Propose;
  m.sender = "ag-Buyer";
  m.receiver = "ag-Seller";
  s.inject(m);
  EXPECT_EQ(s.run_to_completion(100), SessionStatus::Completed);
  const auto& ev = s.trace().events;
  const auto nu = std::find_if(ev.begin(), ev.end(), [](const auto& e) {
    return e.kind == EventKind::Sent && e.performative == "not-understood";
  });
  ASSERT_NE(nu, ev.end());
  EXPECT_TRUE(nu->control);
  EXPECT_EQ(nu->sender, "ag-Seller");
  EXPECT_EQ(nu->receiver, "ag-Buyer");
  EXPECT_EQ(count_kind(s.trace(), EventKind::Handled), 2u);
  EXPECT_TRUE(trace_conformance(s.trace(), l.net).ok);
}

TEST(Session, ReplayedMessageIsNotHandledTwice) {
  const auto l = load("linear.ipl");
  auto s = start(l, 0);
  s.announce({});
  s.step();
  AclMessage dup;
  dup.id = 1;
  dup.performative = CommunicativeAct::Request;
  dup.sender = "ag-Buyer";
  dup.receiver = "ag-Seller";
  s.inject(dup);
  EXPECT_EQ(s.run_to_completion(100), SessionStatus::Completed);
  EXPECT_EQ(count_kind(s.trace(), EventKind::Handled), 2u);
}

TEST(Session, SkillsDriveProposeOrRefuse) {
  const auto l = load("contract_net.ipl");
  SessionOptions o;
  o.skills["ag-Bidder1"] = {{"welding", Skill{false, 0}}};
  o.skills["ag-Bidder2"] = {{"welding", Skill{true, 42.5}}};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = start(l, seed, o);
    s.announce(Task{"frame", {"welding"}, {}});
    ASSERT_EQ(s.run_to_completion(200), SessionStatus::Completed);
    std::set<std::string> sent;
    std::string prop2;
    for (const auto& e : s.trace().events) {
      if (e.kind != EventKind::Sent || e.control) continue;
      sent.insert(e.branch);
      if (e.branch == "prop2") prop2 = e.payload;
    }
    EXPECT_TRUE(sent.contains("ref1"));
    EXPECT_FALSE(sent.contains("prop1"));
    EXPECT_TRUE(sent.contains("prop2"));
    EXPECT_NE(prop2.find("<cost>42.5</cost>"), std::string::npos);
  }
}

TEST(Session, LedgersCountResponses) {
  const auto l = load("contract_net.ipl");
  auto s = start(l, 3);
  s.announce({});
  ASSERT_EQ(s.run_to_completion(200), SessionStatus::Completed);
  const auto ledgers = s.ledgers();
  EXPECT_EQ(ledgers.at("call").received, 2u);
  EXPECT_EQ(ledgers.at("call").expectation, (ResponseBounds{2, 2}));
  EXPECT_EQ(ledgers.at("bid1").received, 1u);
  const auto award = ledgers.at("award");
  EXPECT_GE(award.received, 1u);
  EXPECT_LE(award.received, 2u);
}

TEST(Session, SeedsAreDeterministicAndMatter) {
  const auto l = load("contract_net.ipl");
  std::set<std::string> distinct;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto a = start(l, seed);
    auto b = start(l, seed);
    a.announce({});
    b.announce({});
    a.run_to_completion(200);
    b.run_to_completion(200);
    const auto ta = a.trace().to_ndjson();
    EXPECT_EQ(ta, b.trace().to_ndjson());
    distinct.insert(ta.substr(ta.find('\n')));
    EXPECT_TRUE(testing::scan_operator_semantics(l.ip, a.trace()).ok());
  }
  EXPECT_GT(distinct.size(), 1u);
}

TEST(Session, ServiceRoleRunsDiscoveryFlow) {
  const auto l = load("quote_service.ipl");
  SessionOptions o;
  o.registry = std::make_shared<Registry>(load_registry(testing::fixture_path("registry.json")));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = start(l, seed, o);
    s.announce({});
    s.run_to_completion(200);
    const auto scan = testing::scan_service_flows(s.trace());
    EXPECT_TRUE(scan.ok()) << seed << ": " << (scan.ok() ? "" : scan.violations[0]);
    EXPECT_GE(scan.flows, 2u);
    EXPECT_TRUE(trace_conformance(s.trace(), l.net).ok);
    if (s.status() == SessionStatus::Completed) {
      EXPECT_EQ(count_kind(s.trace(), EventKind::Discover, true), scan.flows);
    }
  }
}

TEST(Session, ServiceFailureRetriesWithAnotherCandidate) {
  const auto l = load("quote_service.ipl");
  auto reg = std::make_shared<Registry>();
  ServiceDescription cheap{"cheap", "cheap", {"quote", "shipping"}, {{"cost", 1.0}}, {}};
  cheap.stub.behaviors["*"] = StubBehavior{"never", 1, 1.0};
  cheap.stub.behaviors["probe"] = StubBehavior{"up", 1, 0.0};
  ServiceDescription solid{"solid", "solid", {"quote", "shipping"}, {{"cost", 2.0}}, {}};
  solid.stub.behaviors["*"] = StubBehavior{"fine", 1, 0.0};
  reg->register_service(cheap);
  reg->register_service(solid);
  SessionOptions o;
  o.registry = reg;
  auto s = start(l, 0, o);
  s.announce({});
  ASSERT_EQ(s.run_to_completion(200), SessionStatus::Completed);
  std::vector<std::string> invoked;
  for (const auto& e : s.trace().events) {
    if (e.kind == EventKind::Invoke) invoked.push_back(e.receiver);
  }
  // Two requests reach the service; each first tries the cheap one.
  EXPECT_EQ(invoked, (std::vector<std::string>{"cheap", "solid", "cheap", "solid"}));
  EXPECT_TRUE(testing::scan_service_flows(s.trace()).ok());

  o.retries = 0;
  auto s0 = start(l, 0, o);
  s0.announce({});
  EXPECT_EQ(s0.run_to_completion(200), SessionStatus::Stuck);
}

TEST(Session, ServiceWithoutCandidatesIsStuck) {
  const auto l = load("quote_service.ipl");
  auto s = start(l, 0);
  s.announce({});
  EXPECT_EQ(s.run_to_completion(200), SessionStatus::Stuck);
  const auto& ev = s.trace().events;
  EXPECT_TRUE(std::any_of(ev.begin(), ev.end(), [](const auto& e) {
    return e.kind == EventKind::Response && e.payload == "failed: no-candidates";
  }));
}

TEST(Trace, NdjsonRoundTrip) {
  const auto l = load("contract_net.ipl");
  auto s = start(l, 5);
  s.announce(Task{"a \"quoted\" task", {}, {}});
  s.run_to_completion(200);
  const auto text = s.trace().to_ndjson();
  const auto back = ExecutionTrace::from_ndjson(text);
  ASSERT_EQ(back.events.size(), s.trace().events.size());
  EXPECT_EQ(back.to_ndjson(), text);
  EXPECT_EQ(back.final_status(), SessionStatus::Completed);
}

TEST(Trace, FieldOrderIsFixed) {
  const auto l = load("linear.ipl");
  auto s = start(l, 0);
  s.announce({});
  s.run_to_completion(10);
  const auto text = s.trace().to_ndjson();
  EXPECT_EQ(text.rfind("{\"tick\":0,\"kind\":\"Sent\",\"performative\":\"request\",\"sender\":\"ag-Buyer\","
                       "\"receiver\":\"ag-Seller\",\"conversation\":\"linear-0\",\"correlation\":\"r1|\",\"digest\":",
                       0),
            0u);
}

TEST(Trace, RejectsCorruptLines) {
  const auto l = load("linear.ipl");
  auto s = start(l, 0);
  s.announce({});
  s.run_to_completion(10);
  auto text = s.trace().to_ndjson();
  const auto pos = text.find("<task>");
  text.replace(pos, 6, "<tusk>");
  EXPECT_THROW(ExecutionTrace::from_ndjson(text), std::invalid_argument);
  EXPECT_THROW(ExecutionTrace::from_ndjson("{\"tick\": 1}\n"), std::invalid_argument);
  EXPECT_THROW(ExecutionTrace::from_ndjson("not json\n"), std::invalid_argument);
  EXPECT_TRUE(ExecutionTrace::from_ndjson("\n\n").events.empty());
}

TEST(Trace, DigestIsFnv1a) {
  EXPECT_EQ(payload_digest(""), "cbf29ce484222325");
  EXPECT_EQ(payload_digest("a"), "af63dc4c8601ec8c");
}

TEST(Content, RendersXml) {
  Content c;
  c.bindings = {{"b", "x<y"}, {"a", "1"}};
  c.body = "hi & bye";
  EXPECT_EQ(render_content_xml(c), "<content><a>1</a><b>x&lt;y</b><body>hi &amp; bye</body></content>");
  EXPECT_EQ(render_content_xml({}), "<content></content>");
}

}  // namespace
}  // namespace ipe
