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

namespace ipe {
namespace {

struct Run {
  ColoredPetriNet net;
  ExecutionTrace trace;
};

Run completed_run(const std::string& fixture, std::uint64_t seed) {
  auto ip = parse_protocol(testing::read_fixture(fixture));
  Run r;
  r.net = translate(ip);
  const auto report = verify(r.net);
  RoleBindings b;
  const auto& first = step_sender(ip.messages.front());
  for (const auto& role : ip.roles) {
    b[role.name] = AgentId{role.name, role.name == first ? AgentKind::Integrator : AgentKind::Enterprise};
  }
  auto s = Session::create(ip, r.net, b, seed, &report);
  s.announce({});
  EXPECT_EQ(s.run_to_completion(500), SessionStatus::Completed);
  r.trace = s.trace();
  return r;
}

std::size_t index_of(const ExecutionTrace& t, EventKind k, std::string_view branch) {
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    if (t.events[i].kind == k && t.events[i].branch == branch && !t.events[i].control) return i;
  }
  ADD_FAILURE() << "no event for " << branch;
  return 0;
}

TEST(Conformance, GeneratedRunsConform) {
  for (const auto* f : {"linear.ipl", "contract_net.ipl", "purchase.ipl", "ten_step.ipl"}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = completed_run(f, seed);
      const auto c = trace_conformance(r.trace, r.net);
      EXPECT_TRUE(c.ok) << f << " seed " << seed << ": " << c.diagnostic;
      EXPECT_EQ(c.marking, r.net.finals[0]);
    }
  }
}

TEST(Conformance, HandledBeforeSentIsRejected) {
  auto r = completed_run("linear.ipl", 0);
  const auto sent = index_of(r.trace, EventKind::Sent, "answer");
  const auto handled = index_of(r.trace, EventKind::Handled, "answer");
  std::swap(r.trace.events[sent], r.trace.events[handled]);
  const auto c = trace_conformance(r.trace, r.net);
  EXPECT_FALSE(c.ok);
  ASSERT_TRUE(c.divergence.has_value());
  EXPECT_EQ(*c.divergence, sent);
}

TEST(Conformance, DroppedMessageLeavesNonFinalMarking) {
  auto r = completed_run("linear.ipl", 0);
  const auto handled = index_of(r.trace, EventKind::Handled, "answer");
  r.trace.events.erase(r.trace.events.begin() + static_cast<std::ptrdiff_t>(handled));
  const auto c = trace_conformance(r.trace, r.net);
  EXPECT_FALSE(c.ok);
  EXPECT_FALSE(c.divergence.has_value());
  EXPECT_NE(c.marking, r.net.finals[0]);
}

TEST(Conformance, BothXorBranchesIsRejected) {
  auto r = completed_run("contract_net.ipl", 0);
  // Duplicate bidder 1's answer under the branch it did not take.
  const auto it = std::find_if(r.trace.events.begin(), r.trace.events.end(), [](const auto& e) {
    return e.kind == EventKind::Sent && e.step == "bid1";
  });
  ASSERT_NE(it, r.trace.events.end());
  auto twin = *it;
  twin.branch = twin.branch == "prop1" ? "ref1" : "prop1";
  r.trace.events.insert(it + 1, twin);
  EXPECT_FALSE(trace_conformance(r.trace, r.net).ok);
}

TEST(Conformance, UnknownStepIsRejected) {
  auto r = completed_run("linear.ipl", 0);
  r.trace.events[0].branch = "nope";
  r.trace.events[0].step = "nope";
  const auto c = trace_conformance(r.trace, r.net);
  EXPECT_FALSE(c.ok);
  EXPECT_EQ(c.divergence, std::optional<std::size_t>{0});
}

TEST(Conformance, ControlTrafficIsIgnored) {
  auto r = completed_run("linear.ipl", 0);
  TraceEvent noise;
  noise.kind = EventKind::Sent;
  noise.performative = "not-understood";
  noise.control = true;
  r.trace.events.insert(r.trace.events.begin() + 1, noise);
  EXPECT_TRUE(trace_conformance(r.trace, r.net).ok);
}

TEST(Conformance, PrefixOfARunIsConformant) {
  const auto r = completed_run("ten_step.ipl", 2);
  for (std::size_t n = 0; n < r.trace.events.size(); n += 3) {
    ExecutionTrace prefix;
    prefix.events.assign(r.trace.events.begin(), r.trace.events.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_TRUE(trace_conformance(prefix, r.net).ok) << n;
  }
}

TEST(Conformance, ClaimingCompletionEarlyIsRejected) {
  const auto r = completed_run("linear.ipl", 0);
  ExecutionTrace t;
  t.events.assign(r.trace.events.begin(), r.trace.events.begin() + 2);
  t.events.push_back(r.trace.events.back());
  ASSERT_EQ(t.final_status(), SessionStatus::Completed);
  EXPECT_FALSE(trace_conformance(t, r.net).ok);
}

}  // namespace
}  // namespace ipe
