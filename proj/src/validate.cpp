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
#include <regex>

#include "ipe/protocol.hpp"

namespace ipe {
namespace {

class Validator {
 public:
  explicit Validator(const InteractionProtocol& ip) : ip_(ip) {}

  ValidationReport run() {
    check_header();
    check_roles();
    check_vars();
    check_messages();
    check_flow();
    check_orders();
    report_.ok = report_.error_count() == 0;
    return std::move(report_);
  }

 private:
  void error(std::string code, std::string where, std::string detail) {
    report_.findings.push_back({Severity::Error, std::move(code), std::move(where), std::move(detail)});
  }
  void warn(std::string code, std::string where, std::string detail) {
    report_.findings.push_back({Severity::Warning, std::move(code), std::move(where), std::move(detail)});
  }

  bool known_role(const std::string& name) const { return ip_.find_role(name) != nullptr; }

  void check_header() {
    static const std::regex kIdent("[A-Za-z_][A-Za-z0-9_-]*");
    if (ip_.id.empty()) {
      error("ID_EMPTY", "protocol", "protocol identifier must be non-empty");
    } else if (!std::regex_match(ip_.id, kIdent)) {
      error("ID_INVALID", ip_.id, "protocol identifier is not a valid identifier");
    }
  }

  void check_roles() {
    if (ip_.roles.size() < 2) {
      error("ROLES_TOO_FEW", "roles",
            "roles.size >= 2 violated: protocol declares " + std::to_string(ip_.roles.size()) + " role(s)");
    }
    if (ip_.roles.size() > kMaxRoles) {
      error("ROLES_TOO_MANY", "roles",
            "at most " + std::to_string(kMaxRoles) + " roles supported, got " + std::to_string(ip_.roles.size()));
    }
    std::set<std::string> seen;
    for (const auto& r : ip_.roles) {
      if (!seen.insert(r.name).second) error("ROLE_DUPLICATE", r.name, "role '" + r.name + "' declared twice");
      if (r.kind == RoleKind::PrivateProcess && !r.keywords.empty()) {
        warn("ROLE_KEYWORDS_IGNORED", r.name, "discovery keywords only apply to WebService roles");
      }
    }
  }

  void check_vars() {
    std::set<std::string> seen;
    for (const auto& v : ip_.vars) {
      if (!seen.insert(v.name).second) error("VAR_DUPLICATE", v.name, "variable '" + v.name + "' declared twice");
      if (v.initial && type_of(*v.initial) != v.type) {
        error("VAR_INITIAL_TYPE", v.name,
              "initial value of '" + v.name + "' is not of type " + std::string(to_string(v.type)));
      }
    }
  }

  void check_guard(const PrimitiveMessage& pm) {
    if (!pm.option.guard) return;
    check_guard_node(pm, *pm.option.guard);
  }

  void check_guard_node(const PrimitiveMessage& pm, const GuardExpr& g) {
    if (g.kind == GuardExpr::Kind::Compare) {
      const VarDecl* v = ip_.find_var(g.var);
      if (!v) {
        error("GUARD_UNKNOWN_VAR", pm.name, "guard references undeclared variable '" + g.var + "'");
      } else if (type_of(g.rhs) != v->type) {
        error("GUARD_TYPE_MISMATCH", pm.name,
              "'" + g.var + "' is " + std::string(to_string(v->type)) + " but is compared with " +
                  render_value(g.rhs));
      } else if (v->type != ValueType::Int && g.op != CmpOp::Eq && g.op != CmpOp::Ne) {
        error("GUARD_TYPE_MISMATCH", pm.name,
              "ordering comparison on non-integer variable '" + g.var + "'");
      }
    }
    for (const auto& c : g.children) check_guard_node(pm, c);
  }

  void check_pm(const PrimitiveMessage& pm) {
    if (!names_.insert(pm.name).second) {
      error("MSG_DUPLICATE", pm.name, "message name '" + pm.name + "' is not unique");
    }
    if (!known_role(pm.sender)) {
      error("UNKNOWN_ROLE", pm.name, "sender '" + pm.sender + "' is not a declared role");
    }
    if (!known_role(pm.receiver)) {
      error("UNKNOWN_ROLE", pm.name, "receiver '" + pm.receiver + "' is not a declared role");
    }
    if (pm.sender == pm.receiver) {
      error("PM_SELF_MESSAGE", pm.name, "sender and receiver are both '" + pm.sender + "'");
    }
    if (pm.option.deadline && *pm.option.deadline <= 0) {
      error("DEADLINE_NONPOSITIVE", pm.name, "deadline must be > 0 ticks");
    }
    check_guard(pm);
  }

  void check_messages() {
    if (ip_.messages.empty()) warn("MESSAGES_EMPTY", "messages", "protocol exchanges no messages");
    for (const auto& step : ip_.messages) {
      if (const auto* pm = std::get_if<PrimitiveMessage>(&step)) {
        check_pm(*pm);
        continue;
      }
      const auto& cm = std::get<ComplexMessage>(step);
      if (!names_.insert(cm.name).second) {
        error("MSG_DUPLICATE", cm.name, "message name '" + cm.name + "' is not unique");
      }
      const std::size_t m = cm.branches.size();
      if (m < 2) {
        error("CM_TOO_FEW_BRANCHES", cm.name, "m >= 2 violated: complex message has " + std::to_string(m) +
                                                  " branch(es)");
      }
      if (m > kMaxBranches) {
        error("CM_TOO_MANY_BRANCHES", cm.name,
              "at most " + std::to_string(kMaxBranches) + " branches supported, got " + std::to_string(m));
      } else if (cm.op == Operator::Or && m > kOrWarnBranches) {
        warn("CM_OR_LARGE", cm.name,
             "OR over " + std::to_string(m) + " branches expands to " + std::to_string((1u << m) - 1) +
                 " alternatives");
      }
      for (const auto& b : cm.branches) {
        if (!cm.branches.empty() && b.sender != cm.branches.front().sender) {
          error("CM_MIXED_SENDER", cm.name,
                "all branches must share one sender (uniform-sender rule): '" + b.name + "' is sent by '" +
                    b.sender + "', not '" + cm.branches.front().sender + "'");
        }
        check_pm(b);
      }
    }
  }

  void check_flow() {
    for (const auto& [a, b] : ip_.flow) {
      const std::string where = "(" + a + ", " + b + ")";
      if (a == b) error("FLOW_SELF_PAIR", where, "flow pair relates role '" + a + "' to itself");
      if (!known_role(a) || !known_role(b)) error("FLOW_UNKNOWN_ROLE", where, "flow pair names an undeclared role");
    }
    const auto projected = projected_flow(ip_);
    for (const auto& p : projected) {
      if (!ip_.flow.contains(p)) {
        warn("FLOW_MISSING_PAIR", "(" + p.first + ", " + p.second + ")",
             "messages flow from " + p.first + " to " + p.second + " but the pair is not in the flow relation");
      }
    }
    for (const auto& p : ip_.flow) {
      if (p.first != p.second && !projected.contains(p)) {
        warn("FLOW_UNUSED_PAIR", "(" + p.first + ", " + p.second + ")", "no message realises this flow pair");
      }
    }
  }

  void check_orders() {
    std::set<std::string> seen;
    for (const auto& o : ip_.orders) {
      if (!known_role(o.role)) {
        error("ORDER_UNKNOWN_ROLE", o.role, "order entry for undeclared role '" + o.role + "'");
        continue;
      }
      if (!seen.insert(o.role).second) error("ORDER_DUPLICATE", o.role, "role has two order entries");
      std::vector<std::size_t> listed;
      bool resolved = true;
      for (const auto& name : o.steps) {
        auto idx = ip_.find_step(name);
        if (!idx) {
          error("ORDER_UNKNOWN_STEP", o.role, "order names unknown step '" + name + "'");
          resolved = false;
        } else {
          listed.push_back(*idx);
        }
      }
      if (!resolved) continue;
      std::vector<std::size_t> natural;
      for (std::size_t i = 0; i < ip_.messages.size(); ++i) {
        if (participates(ip_.messages[i], o.role)) natural.push_back(i);
      }
      std::sort(listed.begin(), listed.end());
      if (listed != natural) {
        error("ORDER_NOT_PERMUTATION", o.role,
              "order for '" + o.role + "' must list each step the role takes part in exactly once");
      }
    }
  }

  const InteractionProtocol& ip_;
  ValidationReport report_;
  std::set<std::string> names_;
};

}  // namespace

ValidationReport validate_well_formedness(const InteractionProtocol& ip) { return Validator(ip).run(); }

}  // namespace ipe
