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
#include <regex>

#include "fixtures.hpp"
#include "shape.hpp"
#include "generator.hpp"
#include "ipe/cpn.hpp"

namespace ipe {
namespace {

using testing::read_fixture;

std::size_t count_phase(const ColoredPetriNet& net, Phase p) {
  return static_cast<std::size_t>(
      std::count_if(net.transitions.begin(), net.transitions.end(), [&](const auto& t) { return t.phase == p; }));
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

const std::string kTwoRoles = "protocol p\nroles { A: PrivateProcess B: PrivateProcess }\n";

TEST(Translate, LinearAsync) {
  const auto net = translate(parse_protocol(read_fixture("linear.ipl")));
  EXPECT_EQ(net.transitions.size(), 4u);
  EXPECT_EQ(count_phase(net, Phase::Send), 2u);
  EXPECT_EQ(count_phase(net, Phase::Receive), 2u);
  EXPECT_EQ(net.places.size(), 8u);
  EXPECT_EQ(net.count_places(PlaceKind::RoleState), 6u);
  EXPECT_EQ(net.count_places(PlaceKind::MessageBuffer), 2u);
  EXPECT_NO_THROW(net.check_well_formed());
}

TEST(Translate, LinearSync) {
  const auto net = translate(parse_protocol(kTwoRoles +
                                            "messages { pm ask: A -> B request sync pm answer: B -> A inform sync }"));
  EXPECT_EQ(net.transitions.size(), 2u);
  EXPECT_EQ(count_phase(net, Phase::Rendezvous), 2u);
  EXPECT_EQ(net.places.size(), 6u);
  EXPECT_EQ(net.count_places(PlaceKind::MessageBuffer), 0u);
}

TEST(Translate, XorBranchesShareTheSenderPlace) {
  const auto net = translate(parse_protocol(
      kTwoRoles + "messages { cm c XOR { pm yes: A -> B agree async pm no: A -> B refuse async } }"));
  EXPECT_EQ(count_phase(net, Phase::Choice), 2u);
  EXPECT_EQ(count_phase(net, Phase::Receive), 2u);
  EXPECT_EQ(net.count_places(PlaceKind::MessageBuffer), 2u);
  const auto pre = *net.place_index("p:A:0");
  std::vector<std::string> consumers;
  for (const auto& a : net.arcs) {
    if (a.input && a.place == pre) consumers.push_back(net.transitions[a.transition].id);
  }
  std::sort(consumers.begin(), consumers.end());
  EXPECT_EQ(consumers, (std::vector<std::string>{"t:c.no:choice", "t:c.yes:choice"}));
}

TEST(Translate, AndForkAndJoin) {
  const auto net = translate(parse_protocol(read_fixture("contract_net.ipl")));
  ASSERT_TRUE(net.transition_index("t:call:fork").has_value());
  ASSERT_TRUE(net.transition_index("t:call:join").has_value());
  ASSERT_TRUE(net.transition_index("t:call.cfp1:send").has_value());
  ASSERT_TRUE(net.transition_index("t:call.cfp2:recv").has_value());
  // OR award over 2 branches: 3 alternatives, each an AND.
  for (const char* tag : {"[acc1]", "[acc2]", "[acc1+acc2]"}) {
    EXPECT_TRUE(net.transition_index(std::string("t:award") + tag + ":fork").has_value()) << tag;
    EXPECT_TRUE(net.transition_index(std::string("t:award") + tag + ":join").has_value()) << tag;
  }
  const auto& fork = net.transitions[*net.transition_index("t:award[acc1+acc2]:fork")];
  EXPECT_EQ(fork.subset, (std::vector<std::string>{"acc1", "acc2"}));
}

TEST(Translate, GuardsLandOnSendAndChoiceTransitions) {
  const auto net = translate(parse_protocol(read_fixture("contract_net.ipl")));
  for (const auto& t : net.transitions) {
    const bool guarded_branch = t.branch == "acc1" || t.branch == "acc2";
    if (guarded_branch && t.phase == Phase::Send) {
      ASSERT_TRUE(t.guard.has_value()) << t.id;
      EXPECT_EQ(to_string(*t.guard), "budget >= 100");
    } else {
      EXPECT_FALSE(t.guard.has_value()) << t.id;
    }
  }
  EXPECT_EQ(net.guard_env.at("budget"), Value{std::int64_t{500}});
}

TEST(Translate, MarkingsAndPlaceOrdering) {
  const auto net = translate(parse_protocol(read_fixture("linear.ipl")));
  EXPECT_TRUE(std::is_sorted(net.places.begin(), net.places.end(),
                             [](const auto& a, const auto& b) { return a.id < b.id; }));
  EXPECT_EQ(describe_marking(net, net.initial), "{p:Buyer:0=1, p:Seller:0=1}");
  ASSERT_EQ(net.finals.size(), 1u);
  EXPECT_EQ(describe_marking(net, net.finals[0]), "{p:Buyer:2=1, p:Seller:2=1}");
  EXPECT_EQ(net.places[*net.place_index("p:Buyer:1")].owner, "Buyer");
  EXPECT_FALSE(net.places[*net.place_index("b:ask")].owner.has_value());
}

TEST(Translate, EmptyProtocolIsOneFinalMarking) {
  const auto net = translate(parse_protocol(kTwoRoles));
  EXPECT_TRUE(net.transitions.empty());
  ASSERT_EQ(net.finals.size(), 1u);
  EXPECT_EQ(net.initial, net.finals[0]);
}

TEST(Translate, InvalidProtocolIsRejected) {
  auto ip = parse_document(kTwoRoles + "messages { pm m: A -> Z inform }");
  EXPECT_THROW(translate(ip), NetError);
}

TEST(Translate, OrAboveSixteenBranchesIsRejected) {
  auto ip = parse_protocol(kTwoRoles + "messages { cm c OR { pm b0: A -> B inform pm b1: A -> B inform } }");
  auto& cm = std::get<ComplexMessage>(ip.messages[0]);
  while (cm.branches.size() <= kMaxBranches) {
    auto b = cm.branches[0];
    b.name = "x" + std::to_string(cm.branches.size());
    cm.branches.push_back(b);
  }
  EXPECT_THROW(translate(ip), NetError);
}

TEST(Translate, WellFormednessCheckCatchesDanglingArcs) {
  auto net = translate(parse_protocol(read_fixture("linear.ipl")));
  net.arcs.push_back({99, 0, true, 1});
  EXPECT_THROW(net.check_well_formed(), NetError);
  net = translate(parse_protocol(read_fixture("linear.ipl")));
  net.initial.pop_back();
  EXPECT_THROW(net.check_well_formed(), NetError);
}

TEST(Translate, StructuralEquationsOnGeneratedCorpus) {
  for (const auto& ip : testing::generate_corpus(300, 777)) {
    const auto net = translate(ip);
    const auto e = testing::expected_shape(ip);
    ASSERT_EQ(net.transitions.size(), e.transitions) << serialize_protocol(ip);
    ASSERT_EQ(net.count_places(PlaceKind::RoleState), e.role_places) << ip.id;
    ASSERT_EQ(net.count_places(PlaceKind::MessageBuffer), e.buffers) << ip.id;
    ASSERT_EQ(net.count_places(PlaceKind::Control), e.control) << ip.id;
  }
}

TEST(Export, PnmlForLinear) {
  const auto net = translate(parse_protocol(read_fixture("linear.ipl")));
  const auto pnml = export_net(net, ExportFormat::Pnml);
  EXPECT_EQ(count_of(pnml, "<transition id="), 4u);
  EXPECT_EQ(count_of(pnml, "<place id="), 8u);
  EXPECT_EQ(count_of(pnml, "<arc id="), net.arcs.size());
  EXPECT_NE(pnml.find("<initialMarking>"), std::string::npos);
  EXPECT_NE(pnml.find("finalMarking"), std::string::npos);
  EXPECT_EQ(pnml.rfind("<?xml", 0), 0u);
}

TEST(Export, DotForLinear) {
  const auto net = translate(parse_protocol(read_fixture("linear.ipl")));
  const auto dot = export_net(net, ExportFormat::Dot);
  EXPECT_EQ(count_of(dot, "shape=circle"), 8u);
  EXPECT_EQ(count_of(dot, "shape=box"), 4u);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
}

TEST(Export, IsDeterministic) {
  const auto ip = parse_protocol(read_fixture("contract_net.ipl"));
  EXPECT_EQ(export_net(translate(ip), ExportFormat::Pnml), export_net(translate(ip), ExportFormat::Pnml));
}

TEST(Firing, EnabledAndFire) {
  const auto net = translate(parse_protocol(read_fixture("linear.ipl")));
  const FiringRule rule(net);
  const auto send = *net.transition_index("t:ask:send");
  const auto recv = *net.transition_index("t:ask:recv");
  EXPECT_TRUE(rule.enabled(net.initial, send));
  EXPECT_FALSE(rule.enabled(net.initial, recv));
  Marking m;
  ASSERT_TRUE(rule.fire(net.initial, send, m));
  EXPECT_EQ(describe_marking(net, m), "{b:ask=1, p:Buyer:1=1, p:Seller:0=1}");
  EXPECT_TRUE(rule.enabled(m, recv));
}

TEST(Firing, FalseGuardDisablesTransition) {
  const auto net = translate(parse_protocol(
      kTwoRoles + "vars { go: bool = false }\nmessages { pm m: A -> B inform guard go = true }"));
  const FiringRule rule(net);
  EXPECT_FALSE(rule.enabled(net.initial, *net.transition_index("t:m:send")));
}

}  // namespace
}  // namespace ipe
