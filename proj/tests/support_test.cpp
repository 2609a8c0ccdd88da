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

// Sanity checks for the test-side generator, oracle and scanners.

#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "generator.hpp"
#include "oracle.hpp"
#include "scanners.hpp"

namespace ipe::testing {
namespace {

TEST(Generator, IsDeterministicAndValid) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = generate_protocol(seed);
    const auto b = generate_protocol(seed);
    EXPECT_EQ(serialize_protocol(a), serialize_protocol(b));
    EXPECT_TRUE(validate_well_formedness(a).ok) << serialize_protocol(a);
    EXPECT_GE(a.roles.size(), 2u);
    EXPECT_LE(a.roles.size(), 6u);
    EXPECT_LE(a.messages.size(), 10u);
  }
}

TEST(Generator, CoversEveryOperator) {
  std::set<Operator> ops;
  bool simple = false;
  for (const auto& ip : generate_corpus(100, 7)) {
    for (const auto& s : ip.messages) {
      if (const auto* cm = std::get_if<ComplexMessage>(&s)) {
        ops.insert(cm->op);
      } else {
        simple = true;
      }
    }
  }
  EXPECT_TRUE(simple);
  EXPECT_EQ(ops, (std::set<Operator>{Operator::Xor, Operator::And, Operator::Or}));
}

TEST(Generator, ServiceRolesOnRequest) {
  GenOptions o;
  o.service_probability = 1.0;
  std::size_t services = 0;
  for (const auto& ip : generate_corpus(20, 3, o)) {
    for (const auto& r : ip.roles) services += r.kind == RoleKind::WebService ? 1 : 0;
  }
  EXPECT_GT(services, 0u);
}

TEST(Oracle, Linear) {
  const auto r = enumerate_interleavings(parse_protocol(read_fixture("linear.ipl")));
  EXPECT_FALSE(r.exhausted);
  EXPECT_TRUE(r.deadlock_free);
  EXPECT_TRUE(r.proper_termination);
  EXPECT_EQ(r.final_states, 1u);
  EXPECT_EQ(r.states, 5u);
}

TEST(Oracle, CyclicWaitDeadlocks) {
  const auto r = enumerate_interleavings(parse_protocol(read_fixture("cyclic_wait.ipl")));
  EXPECT_FALSE(r.deadlock_free);
  EXPECT_FALSE(r.proper_termination);
  EXPECT_EQ(r.deadlocks, 1u);
  EXPECT_EQ(r.final_states, 0u);
}

TEST(Oracle, ReportsExhaustion) {
  const auto r = enumerate_interleavings(parse_protocol(read_fixture("contract_net.ipl")), 3);
  EXPECT_TRUE(r.exhausted);
}

TEST(Scanners, OperatorViolations) {
  const auto ip = parse_protocol(read_fixture("contract_net.ipl"));
  ExecutionTrace t;
  auto ev = [&](EventKind k, const std::string& step, const std::string& branch) {
    TraceEvent e;
    e.kind = k;
    e.step = step;
    e.branch = branch;
    t.events.push_back(e);
  };
  ev(EventKind::Sent, "bid1", "prop1");
  ev(EventKind::Sent, "bid1", "ref1");
  ev(EventKind::Handled, "call", "cfp1");
  ev(EventKind::Handled, "call", "cfp1");
  TraceEvent done;
  done.kind = EventKind::StatusChange;
  done.performative = "Completed";
  t.events.push_back(done);
  const auto scan = scan_operator_semantics(ip, t);
  EXPECT_FALSE(scan.ok());
  EXPECT_GE(scan.violations.size(), 3u);
}

TEST(Scanners, ServiceFlowViolations) {
  auto ev = [](EventKind k, const std::string& flow, const std::string& to, const std::string& payload = "") {
    TraceEvent e;
    e.kind = k;
    e.flow = flow;
    e.receiver = to;
    e.payload = payload;
    return e;
  };
  ExecutionTrace good;
  good.events = {ev(EventKind::Discover, "f1", "", "quote -> [a,b]"), ev(EventKind::Probe, "f1", "a"),
                 ev(EventKind::Probe, "f1", "b"), ev(EventKind::Invoke, "f1", "a"),
                 ev(EventKind::Cancel, "f1", "b"), ev(EventKind::Response, "f1", "a", "ok: x")};
  EXPECT_TRUE(scan_service_flows(good).ok());

  auto twice = good;
  twice.events.push_back(ev(EventKind::Invoke, "f1", "b"));
  EXPECT_FALSE(scan_service_flows(twice).ok());

  auto wrong_cancel = good;
  wrong_cancel.events[4].receiver = "a";
  EXPECT_FALSE(scan_service_flows(wrong_cancel).ok());

  auto no_probe = good;
  no_probe.events.erase(no_probe.events.begin() + 2);
  EXPECT_FALSE(scan_service_flows(no_probe).ok());

  auto no_discover = good;
  no_discover.events.erase(no_discover.events.begin());
  EXPECT_FALSE(scan_service_flows(no_discover).ok());
}

}  // namespace
}  // namespace ipe::testing
