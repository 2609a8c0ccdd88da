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

#include "generator.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace ipe::testing {

namespace {

constexpr CommunicativeAct kActs[] = {
    CommunicativeAct::Cfp,     CommunicativeAct::Inform,  CommunicativeAct::Propose,
    CommunicativeAct::AcceptProposal, CommunicativeAct::RejectProposal, CommunicativeAct::Request,
    CommunicativeAct::Refuse,  CommunicativeAct::Agree,   CommunicativeAct::Failure,
};

class Gen {
 public:
  Gen(std::uint64_t seed, const GenOptions& o) : rng_(seed), o_(o) {}

  InteractionProtocol run(std::uint64_t seed) {
    InteractionProtocol ip;
    ip.id = "gen-" + std::to_string(seed);
    const std::size_t n = range(o_.min_roles, o_.max_roles);
    for (std::size_t i = 0; i < n; ++i) {
      Role r;
      r.name = "R" + std::to_string(i);
      if (i > 0 && chance(o_.service_probability)) {
        r.kind = RoleKind::WebService;
        r.keywords = {"svc"};
      }
      ip.roles.push_back(std::move(r));
    }
    const std::size_t nvars = range(0, 2);
    for (std::size_t i = 0; i < nvars; ++i) {
      VarDecl v;
      v.name = "v" + std::to_string(i);
      v.type = static_cast<ValueType>(range(0, 2));
      if (!chance(0.15)) v.initial = literal(v.type);
      ip.vars.push_back(std::move(v));
    }
    vars_ = ip.vars;

    const std::size_t steps = range(o_.min_steps, o_.max_steps);
    std::string prev_receiver;
    for (std::size_t s = 0; s < steps; ++s) {
      // The first sender is a PrivateProcess so an Integrator can start it.
      const std::string sender = s == 0 ? ip.roles.front().name : pick_role(ip, "");
      const std::string name = "s" + std::to_string(s);
      const std::size_t kind = range(0, 5);
      if (kind < 3) {
        ip.messages.emplace_back(pm(ip, name, sender));
        continue;
      }
      ComplexMessage cm;
      cm.name = name;
      cm.op = kind == 3 ? Operator::Xor : (kind == 4 ? Operator::And : Operator::Or);
      const std::size_t m = range(2, o_.max_branches);
      for (std::size_t b = 0; b < m; ++b) cm.branches.push_back(pm(ip, name + "b" + std::to_string(b), sender));
      ip.messages.emplace_back(std::move(cm));
    }
    ip.flow = projected_flow(ip);
    if (chance(0.1)) {
      // An unused but declared pair is only a warning.
      ip.flow.emplace(ip.roles.back().name, ip.roles.front().name);
    }
    if (chance(o_.order_probability)) shuffle_order(ip);
    return ip;
  }

 private:
  std::size_t range(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  Value literal(ValueType t) {
    switch (t) {
      case ValueType::Int: return static_cast<std::int64_t>(range(0, 10)) - 5;
      case ValueType::Bool: return chance(0.5);
      case ValueType::String: return std::string(chance(0.5) ? "a" : "b \"q\"");
    }
    return std::int64_t{0};
  }

  std::string pick_role(const InteractionProtocol& ip, const std::string& except) {
    while (true) {
      const auto& r = ip.roles[range(0, ip.roles.size() - 1)].name;
      if (r != except) return r;
    }
  }

  GuardExpr guard(int depth) {
    const std::size_t k = depth > 1 ? 0 : range(0, 5);
    if (k <= 2 || vars_.empty()) {
      if (vars_.empty()) return GuardExpr::constant(chance(0.8));
      const auto& v = vars_[range(0, vars_.size() - 1)];
      CmpOp op = CmpOp::Eq;
      if (v.type == ValueType::Int) {
        op = static_cast<CmpOp>(range(0, 5));
      } else if (chance(0.5)) {
        op = CmpOp::Ne;
      }
      return GuardExpr::compare(v.name, op, literal(v.type));
    }
    if (k == 3) return GuardExpr::conj(guard(depth + 1), guard(depth + 1));
    if (k == 4) return GuardExpr::disj(guard(depth + 1), guard(depth + 1));
    return GuardExpr::negate(guard(depth + 1));
  }

  PrimitiveMessage pm(const InteractionProtocol& ip, std::string name, const std::string& sender) {
    PrimitiveMessage m;
    m.name = std::move(name);
    m.sender = sender;
    m.receiver = pick_role(ip, sender);
    m.act = kActs[range(0, std::size(kActs) - 1)];
    m.option.mode = chance(0.3) ? MessageMode::Synchronous : MessageMode::Asynchronous;
    if (chance(o_.guard_probability)) m.option.guard = guard(0);
    // Deadlines stay far beyond any generated run so they never expire.
    if (chance(0.1)) m.option.deadline = static_cast<std::int64_t>(range(500, 1000));
    return m;
  }

  void shuffle_order(InteractionProtocol& ip) {
    std::vector<std::size_t> candidates;
    for (std::size_t r = 0; r < ip.roles.size(); ++r) {
      if (role_chain(ip, ip.roles[r].name).size() >= 2) candidates.push_back(r);
    }
    if (candidates.empty()) return;
    const auto& role = ip.roles[candidates[range(0, candidates.size() - 1)]].name;
    RoleOrder o;
    o.role = role;
    for (auto s : role_chain(ip, role)) o.steps.push_back(step_name(ip.messages[s]));
    std::shuffle(o.steps.begin(), o.steps.end(), rng_);
    ip.orders.push_back(std::move(o));
  }

  std::mt19937_64 rng_;
  GenOptions o_;
  std::vector<VarDecl> vars_;
};

}  // namespace

InteractionProtocol generate_protocol(std::uint64_t seed, const GenOptions& options) {
  // Rare draws can break a rule (e.g. a uniform sender that is also the only
  // other role); re-draw from a derived seed until the result validates.
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Gen g(seed * 1315423911ull + attempt, options);
    auto ip = g.run(seed);
    if (validate_well_formedness(ip).ok) return ip;
  }
  throw std::logic_error("generator could not produce a valid protocol for seed " + std::to_string(seed));
}

std::vector<InteractionProtocol> generate_corpus(std::size_t count, std::uint64_t base_seed,
                                                 const GenOptions& options) {
  std::vector<InteractionProtocol> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_protocol(base_seed + i, options));
  return out;
}

}  // namespace ipe::testing
