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

#include "scanners.hpp"

#include <map>
#include <set>

namespace ipe::testing {

ScanResult scan_operator_semantics(const InteractionProtocol& ip, const ExecutionTrace& trace) {
  ScanResult res;
  std::map<std::string, std::set<std::string>> sent, handled;
  std::map<std::string, std::size_t> handled_count;
  for (const auto& e : trace.events) {
    if (e.control || e.step.empty()) continue;
    if (e.kind == EventKind::Sent) sent[e.step].insert(e.branch);
    if (e.kind == EventKind::Handled) {
      handled[e.step].insert(e.branch);
      ++handled_count[e.step];
    }
  }
  const bool completed = trace.final_status() == SessionStatus::Completed;
  for (const auto& step : ip.messages) {
    const auto* cm = std::get_if<ComplexMessage>(&step);
    if (cm == nullptr) continue;
    const std::size_t m = cm->branches.size();
    const std::size_t ns = sent[cm->name].size();
    const std::size_t nh = handled[cm->name].size();
    auto fail = [&](const std::string& what) { res.violations.push_back(ip.id + "/" + cm->name + ": " + what); };
    if (handled_count[cm->name] != nh) fail("a branch was handled twice");
    for (const auto& b : handled[cm->name]) {
      if (!sent[cm->name].contains(b)) fail("branch " + b + " handled without being sent");
    }
    std::size_t lo = 0;
    std::size_t hi = 0;
    switch (cm->op) {
      case Operator::Xor:
        lo = hi = 1;
        if (ns > 1) fail("XOR sent " + std::to_string(ns) + " branches");
        break;
      case Operator::And:
        lo = hi = m;
        if (ns != 0 && ns != m && completed) fail("AND sent " + std::to_string(ns) + " of " + std::to_string(m));
        break;
      case Operator::Or:
        lo = 1;
        hi = m;
        if (ns > m) fail("OR sent more branches than it has");
        break;
    }
    if (!completed) continue;
    if (nh < lo || nh > hi) {
      fail("completed with " + std::to_string(nh) + " responses outside [" + std::to_string(lo) + ", " +
           std::to_string(hi) + "]");
    }
    if (nh != ns) fail("completed with unanswered branches");
  }
  return res;
}

namespace {

std::vector<std::string> discovered(const std::string& payload) {
  std::vector<std::string> out;
  const auto open = payload.rfind('[');
  const auto close = payload.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) return out;
  std::string cur;
  for (std::size_t i = open + 1; i < close; ++i) {
    if (payload[i] == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += payload[i];
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

ScanResult scan_service_flows(const ExecutionTrace& trace) {
  ScanResult res;
  std::map<std::string, std::vector<const TraceEvent*>> flows;
  std::vector<std::string> order;
  for (const auto& e : trace.events) {
    if (e.flow.empty()) continue;
    if (!flows.contains(e.flow)) order.push_back(e.flow);
    flows[e.flow].push_back(&e);
  }
  res.flows = order.size();
  for (const auto& id : order) {
    const auto& evs = flows[id];
    auto fail = [&](const std::string& what) { res.violations.push_back(id + ": " + what); };
    std::size_t i = 0;
    if (evs[i]->kind != EventKind::Discover) {
      fail("does not start with Discover");
      continue;
    }
    const auto cands = discovered(evs[i]->payload);
    ++i;
    bool probes_ok = true;
    for (const auto& c : cands) {
      if (i >= evs.size() || evs[i]->kind != EventKind::Probe || evs[i]->receiver != c) {
        fail("missing probe for " + c);
        probes_ok = false;
        break;
      }
      ++i;
    }
    if (!probes_ok) continue;
    if (i < evs.size() && evs[i]->kind == EventKind::Response && evs[i]->payload == "failed: no-candidates") {
      ++res.empty_flows;
      if (i + 1 != evs.size()) fail("events after a no-candidates response");
      continue;
    }
    if (i >= evs.size() || evs[i]->kind != EventKind::Invoke) {
      fail("no Invoke after probes");
      continue;
    }
    const std::string chosen = evs[i]->receiver;
    ++i;
    std::multiset<std::string> cancelled;
    while (i < evs.size() && evs[i]->kind == EventKind::Cancel) cancelled.insert(evs[i++]->receiver);
    std::multiset<std::string> expected;
    bool chosen_known = false;
    for (const auto& c : cands) {
      if (c == chosen) {
        chosen_known = true;
      } else {
        expected.insert(c);
      }
    }
    if (!chosen_known) fail("invoked " + chosen + " which was not discovered");
    if (cancelled != expected) fail("cancels do not match the non-chosen candidates");
    for (; i < evs.size(); ++i) {
      if (evs[i]->kind == EventKind::Invoke) fail("second Invoke in one flow");
      if (evs[i]->kind == EventKind::Cancel) fail("Cancel after the response");
    }
  }
  return res;
}

}  // namespace ipe::testing
