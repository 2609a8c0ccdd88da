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

// Protocol -> net translation.
//
// Each role owns a chain of state places p:<role>:0..k, one more than the
// number of steps it takes part in. Tokens are unit-colored; exactly one
// starts in each p:<role>:0. The final marking holds one token in each
// p:<role>:k and nothing else.
//
//   async PM   send (sender pre -> post + buffer), recv (buffer + receiver
//              pre -> receiver post)
//   sync PM    one rendezvous consuming and producing both parties' states
//   XOR CM     one choice/rendezvous per branch, all sharing the sender's
//              pre place; the branch's receive consumes every CM receiver
//   AND CM     fork -> per-branch go tokens; branch send/recv or rendezvous
//              producing a done token (receivers are read, not moved);
//              join consumes all done tokens and moves sender and receivers
//   OR CM      an AND per non-empty branch subset, subsets in conflict on
//              the sender's pre place; buffers are shared per branch and a
//              per-subset pending token ties each receive to its subset

#include <algorithm>
#include <map>
#include <numeric>

#include "ipe/cpn.hpp"

namespace ipe {
namespace {

class NetBuilder {
 public:
  std::size_t place(const std::string& id, PlaceKind kind, std::optional<std::string> owner = std::nullopt) {
    auto [it, inserted] = index_.try_emplace(id, net_.places.size());
    if (inserted) net_.places.push_back({id, kind, std::move(owner), ColorDomain::Unit});
    return it->second;
  }

  std::size_t transition(Transition t) {
    net_.transitions.push_back(std::move(t));
    return net_.transitions.size() - 1;
  }

  void in(std::size_t t, std::size_t p) { net_.arcs.push_back({p, t, true, 1}); }
  void out(std::size_t t, std::size_t p) { net_.arcs.push_back({p, t, false, 1}); }
  void read(std::size_t t, std::size_t p) {
    in(t, p);
    out(t, p);
  }

  ColoredPetriNet& net() { return net_; }

 private:
  ColoredPetriNet net_;
  std::map<std::string, std::size_t> index_;
};

class Translator {
 public:
  explicit Translator(const InteractionProtocol& ip) : ip_(ip) {}

  ColoredPetriNet run() {
    b_.net().name = ip_.id;
    b_.net().guard_env = ip_.initial_bindings();
    for (const auto& r : ip_.roles) {
      const auto chain = role_chain(ip_, r.name);
      for (std::size_t k = 0; k < chain.size(); ++k) position_[{r.name, chain[k]}] = k;
      chain_len_[r.name] = chain.size();
      for (std::size_t k = 0; k <= chain.size(); ++k) state(r.name, k);
    }
    for (std::size_t s = 0; s < ip_.messages.size(); ++s) {
      step_ = s;
      if (const auto* pm = std::get_if<PrimitiveMessage>(&ip_.messages[s])) {
        translate_pm(*pm);
      } else {
        const auto& cm = std::get<ComplexMessage>(ip_.messages[s]);
        switch (cm.op) {
          case Operator::Xor: translate_xor(cm); break;
          case Operator::And: translate_and(cm); break;
          case Operator::Or: translate_or(cm); break;
        }
      }
    }
    return finish();
  }

 private:
  std::size_t state(const std::string& role, std::size_t k) {
    return b_.place("p:" + role + ":" + std::to_string(k), PlaceKind::RoleState, role);
  }
  std::size_t pre(const std::string& role) { return state(role, position_.at({role, step_})); }
  std::size_t post(const std::string& role) { return state(role, position_.at({role, step_}) + 1); }
  std::size_t buffer(const PrimitiveMessage& pm) { return b_.place("b:" + pm.name, PlaceKind::MessageBuffer); }
  std::size_t control(const std::string& id) { return b_.place("c:" + id, PlaceKind::Control); }

  std::size_t make(std::string id, std::string step, std::string branch, Phase phase,
                   std::vector<std::string> subset = {}, std::optional<GuardExpr> guard = std::nullopt) {
    Transition t;
    t.id = std::move(id);
    t.step = std::move(step);
    t.branch = std::move(branch);
    t.phase = phase;
    t.subset = std::move(subset);
    t.guard = std::move(guard);
    return b_.transition(std::move(t));
  }

  void translate_pm(const PrimitiveMessage& pm) {
    if (pm.option.mode == MessageMode::Synchronous) {
      auto t = make("t:" + pm.name + ":rdv", pm.name, pm.name, Phase::Rendezvous, {}, pm.option.guard);
      b_.in(t, pre(pm.sender));
      b_.in(t, pre(pm.receiver));
      b_.out(t, post(pm.sender));
      b_.out(t, post(pm.receiver));
      return;
    }
    auto send = make("t:" + pm.name + ":send", pm.name, pm.name, Phase::Send, {}, pm.option.guard);
    b_.in(send, pre(pm.sender));
    b_.out(send, post(pm.sender));
    b_.out(send, buffer(pm));
    auto recv = make("t:" + pm.name + ":recv", pm.name, pm.name, Phase::Receive);
    b_.in(recv, buffer(pm));
    b_.in(recv, pre(pm.receiver));
    b_.out(recv, post(pm.receiver));
  }

  void move_all(std::size_t t, const std::vector<std::string>& roles) {
    for (const auto& r : roles) {
      b_.in(t, pre(r));
      b_.out(t, post(r));
    }
  }

  void translate_xor(const ComplexMessage& cm) {
    const auto receivers = step_receivers(ip_.messages[step_]);
    const std::string& sender = cm.branches.front().sender;
    for (const auto& br : cm.branches) {
      const std::string base = "t:" + cm.name + "." + br.name;
      if (br.option.mode == MessageMode::Synchronous) {
        auto t = make(base + ":rdv", cm.name, br.name, Phase::Rendezvous, {}, br.option.guard);
        b_.in(t, pre(sender));
        b_.out(t, post(sender));
        move_all(t, receivers);
        continue;
      }
      auto choice = make(base + ":choice", cm.name, br.name, Phase::Choice, {}, br.option.guard);
      b_.in(choice, pre(sender));
      b_.out(choice, post(sender));
      b_.out(choice, buffer(br));
      auto recv = make(base + ":recv", cm.name, br.name, Phase::Receive);
      b_.in(recv, buffer(br));
      move_all(recv, receivers);
    }
  }

  // One AND instance over `members` (indices into cm.branches). `tag` is
  // empty for a plain AND and names the subset for OR alternatives.
  void translate_parallel(const ComplexMessage& cm, const std::vector<std::size_t>& members,
                          const std::string& tag) {
    const auto receivers = step_receivers(ip_.messages[step_]);
    const std::string& sender = cm.branches.front().sender;
    const std::string key = cm.name + tag;
    std::vector<std::string> subset;
    if (!tag.empty()) {
      for (auto i : members) subset.push_back(cm.branches[i].name);
    }
    auto fork = make("t:" + key + ":fork", cm.name, "", Phase::Fork, subset);
    b_.in(fork, pre(sender));
    std::vector<std::size_t> done;
    for (auto i : members) {
      const auto& br = cm.branches[i];
      const std::string cbase = key + ":" + br.name;
      const std::string tbase = "t:" + key + "." + br.name;
      auto go = control(cbase + ":go");
      auto fin = control(cbase + ":done");
      done.push_back(fin);
      b_.out(fork, go);
      if (br.option.mode == MessageMode::Synchronous) {
        auto t = make(tbase + ":rdv", cm.name, br.name, Phase::Rendezvous, subset, br.option.guard);
        b_.in(t, go);
        b_.read(t, pre(br.receiver));
        b_.out(t, fin);
        continue;
      }
      auto send = make(tbase + ":send", cm.name, br.name, Phase::Send, subset, br.option.guard);
      b_.in(send, go);
      b_.out(send, buffer(br));
      auto recv = make(tbase + ":recv", cm.name, br.name, Phase::Receive, subset);
      b_.in(recv, buffer(br));
      b_.read(recv, pre(br.receiver));
      b_.out(recv, fin);
      if (!tag.empty()) {
        auto pend = control(cbase + ":pend");
        b_.out(send, pend);
        b_.in(recv, pend);
      }
    }
    auto join = make("t:" + key + ":join", cm.name, "", Phase::Join, subset);
    for (auto d : done) b_.in(join, d);
    b_.out(join, post(sender));
    move_all(join, receivers);
  }

  void translate_and(const ComplexMessage& cm) {
    std::vector<std::size_t> all(cm.branches.size());
    std::iota(all.begin(), all.end(), 0);
    translate_parallel(cm, all, "");
  }

  void translate_or(const ComplexMessage& cm) {
    const std::size_t m = cm.branches.size();
    if (m > kMaxBranches) {
      throw NetError("OR message '" + cm.name + "' has " + std::to_string(m) + " branches; expansion is limited to " +
                     std::to_string(kMaxBranches));
    }
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      std::vector<std::size_t> members;
      std::string tag = "[";
      for (std::size_t i = 0; i < m; ++i) {
        if (mask & (1u << i)) {
          if (!members.empty()) tag += "+";
          tag += cm.branches[i].name;
          members.push_back(i);
        }
      }
      tag += "]";
      translate_parallel(cm, members, tag);
    }
  }

  ColoredPetriNet finish() {
    ColoredPetriNet& net = b_.net();
    // Canonical place order: sorted by id.
    std::vector<std::size_t> order(net.places.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return net.places[a].id < net.places[b].id; });
    std::vector<std::size_t> remap(order.size());
    std::vector<Place> sorted;
    sorted.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      remap[order[i]] = i;
      sorted.push_back(std::move(net.places[order[i]]));
    }
    net.places = std::move(sorted);
    for (auto& a : net.arcs) a.place = remap[a.place];

    net.initial.assign(net.places.size(), 0);
    Marking fin(net.places.size(), 0);
    for (const auto& r : ip_.roles) {
      net.initial[*net.place_index("p:" + r.name + ":0")] = 1;
      fin[*net.place_index("p:" + r.name + ":" + std::to_string(chain_len_.at(r.name)))] += 1;
    }
    net.finals.push_back(std::move(fin));
    return std::move(net);
  }

  const InteractionProtocol& ip_;
  NetBuilder b_;
  std::size_t step_ = 0;
  std::map<std::pair<std::string, std::size_t>, std::size_t> position_;
  std::map<std::string, std::size_t> chain_len_;
};

}  // namespace

ColoredPetriNet translate(const InteractionProtocol& ip) {
  for (const auto& step : ip.messages) {
    if (const auto* cm = std::get_if<ComplexMessage>(&step); cm && cm->op == Operator::Or &&
                                                             cm->branches.size() > kMaxBranches) {
      throw NetError("OR message '" + cm->name + "' has " + std::to_string(cm->branches.size()) +
                     " branches; expansion is limited to " + std::to_string(kMaxBranches));
    }
  }
  const ValidationReport report = validate_well_formedness(ip);
  if (!report.ok) {
    for (const auto& f : report.findings) {
      if (f.severity == Severity::Error) {
        throw NetError("cannot translate ill-formed protocol: " + f.code + " at " + f.location + ": " + f.detail);
      }
    }
  }
  ColoredPetriNet net = Translator(ip).run();
  net.check_well_formed();
  return net;
}

}  // namespace ipe
