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
#include <map>
#include <tuple>

#include "ipe/runtime.hpp"

namespace ipe {

namespace {

enum class Slot { Out, In, Fork, Join };

using Key = std::tuple<std::string, std::string, Slot, std::string>;

std::string subset_key(const std::vector<std::string>& subset) {
  std::string out;
  for (const auto& s : subset) out += s + "+";
  return out;
}

Slot slot_of(Phase p) {
  switch (p) {
    case Phase::Send:
    case Phase::Choice: return Slot::Out;
    case Phase::Receive:
    case Phase::Rendezvous: return Slot::In;
    case Phase::Fork: return Slot::Fork;
    case Phase::Join: return Slot::Join;
  }
  return Slot::Out;
}

struct StepInfo {
  bool has_fork = false;
  bool or_like = false;
  std::optional<std::string> subset;  // chosen alternative, once forked
  bool joined = false;
};

}  // namespace

ConformanceResult trace_conformance(const ExecutionTrace& trace, const ColoredPetriNet& net) {
  ConformanceResult res;
  const FiringRule rule(net);
  res.marking = net.initial;

  std::map<Key, std::size_t> lookup;
  std::map<std::string, StepInfo> steps;
  for (std::size_t t = 0; t < net.transitions.size(); ++t) {
    const auto& tr = net.transitions[t];
    lookup[{tr.step, tr.branch, slot_of(tr.phase), subset_key(tr.subset)}] = t;
    if (tr.phase == Phase::Fork) {
      auto& info = steps[tr.step];
      info.has_fork = true;
      if (!tr.subset.empty()) info.or_like = true;
    }
  }

  Marking next;
  auto fire = [&](std::size_t t) {
    if (!rule.fire(res.marking, t, next)) return false;
    res.marking.swap(next);
    return true;
  };
  auto fail = [&](std::size_t i, std::string why) {
    res.ok = false;
    res.divergence = i;
    res.diagnostic = "event " + std::to_string(i) + ": " + why;
    return res;
  };
  auto try_joins = [&] {
    for (auto& [name, info] : steps) {
      if (!info.subset || info.joined) continue;
      auto it = lookup.find({name, "", Slot::Join, *info.subset});
      if (it != lookup.end() && fire(it->second)) info.joined = true;
    }
  };

  const auto& ev = trace.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const auto& e = ev[i];
    if (e.control || (e.kind != EventKind::Sent && e.kind != EventKind::Handled)) continue;
    auto sit = steps.find(e.step);
    StepInfo* info = sit == steps.end() ? nullptr : &sit->second;
    std::string subset;
    if (info != nullptr) {
      if (!info->subset) {
        if (e.kind != EventKind::Sent) return fail(i, "'" + e.branch + "' handled before its step was forked");
        std::vector<std::string> names;
        if (info->or_like) {
          for (std::size_t j = i; j < ev.size() && ev[j].kind == EventKind::Sent && !ev[j].control &&
                                  ev[j].step == e.step;
               ++j) {
            names.push_back(ev[j].branch);
          }
        }
        const std::string key = subset_key(names);
        auto fk = lookup.find({e.step, "", Slot::Fork, key});
        if (fk == lookup.end()) return fail(i, "no alternative of '" + e.step + "' matches the sent branches");
        if (!fire(fk->second)) return fail(i, "fork of '" + e.step + "' is not enabled");
        info->subset = key;
      }
      subset = *info->subset;
    }
    const Slot slot = e.kind == EventKind::Sent ? Slot::Out : Slot::In;
    auto it = lookup.find({e.step, e.branch, slot, subset});
    if (it == lookup.end()) {
      const bool sync_send = slot == Slot::Out && lookup.contains({e.step, e.branch, Slot::In, subset});
      if (sync_send) continue;
      return fail(i, "no transition realises " + std::string(to_string(e.kind)) + " of '" + e.branch + "'");
    }
    const auto& tr = net.transitions[it->second];
    if (!fire(it->second)) {
      return fail(i, "transition '" + tr.id + "' is not enabled at " + describe_marking(net, res.marking));
    }
    try_joins();
  }

  if (trace.final_status() == SessionStatus::Completed &&
      std::find(net.finals.begin(), net.finals.end(), res.marking) == net.finals.end()) {
    res.ok = false;
    res.diagnostic = "trace completed at non-final marking " + describe_marking(net, res.marking);
  }
  return res;
}

}  // namespace ipe
