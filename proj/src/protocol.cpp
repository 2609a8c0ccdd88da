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

#include "ipe/protocol.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "lexer.hpp"

namespace ipe {
namespace {

constexpr std::array<std::string_view, kCommunicativeActCount> kActNames = {
    "cfp",    "inform", "propose", "accept-proposal", "reject-proposal", "request",
    "refuse", "agree",  "failure", "cancel",          "not-understood",
};

std::string located(const std::string& what, SourceLoc loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + what;
}

}  // namespace

ProtocolError::ProtocolError(const std::string& what, SourceLoc loc)
    : std::runtime_error(located(what, loc)), loc_(loc) {}

std::string_view to_string(CommunicativeAct act) { return kActNames[static_cast<std::size_t>(act)]; }

std::optional<CommunicativeAct> act_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kActNames.size(); ++i) {
    if (kActNames[i] == s) return static_cast<CommunicativeAct>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Operator op) {
  switch (op) {
    case Operator::Xor: return "XOR";
    case Operator::Or: return "OR";
    case Operator::And: return "AND";
  }
  return "AND";
}

const Role* InteractionProtocol::find_role(std::string_view name) const {
  auto it = std::find_if(roles.begin(), roles.end(), [&](const Role& r) { return r.name == name; });
  return it == roles.end() ? nullptr : &*it;
}

const VarDecl* InteractionProtocol::find_var(std::string_view name) const {
  auto it = std::find_if(vars.begin(), vars.end(), [&](const VarDecl& v) { return v.name == name; });
  return it == vars.end() ? nullptr : &*it;
}

std::optional<std::size_t> InteractionProtocol::find_step(std::string_view name) const {
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (step_name(messages[i]) == name) return i;
  }
  return std::nullopt;
}

Bindings InteractionProtocol::initial_bindings() const {
  Bindings env;
  for (const auto& v : vars) {
    if (v.initial) env.emplace(v.name, *v.initial);
  }
  return env;
}

const std::string& step_name(const MessageStep& step) {
  return std::visit([](const auto& s) -> const std::string& { return s.name; }, step);
}

const std::string& step_sender(const MessageStep& step) {
  if (const auto* pm = std::get_if<PrimitiveMessage>(&step)) return pm->sender;
  const auto& cm = std::get<ComplexMessage>(step);
  static const std::string kNone;
  return cm.branches.empty() ? kNone : cm.branches.front().sender;
}

std::vector<std::string> step_receivers(const MessageStep& step) {
  std::vector<std::string> out;
  for (const auto* pm : step_primitives(step)) {
    if (std::find(out.begin(), out.end(), pm->receiver) == out.end()) out.push_back(pm->receiver);
  }
  return out;
}

bool participates(const MessageStep& step, std::string_view role) {
  if (step_sender(step) == role) return true;
  for (const auto* pm : step_primitives(step)) {
    if (pm->receiver == role || pm->sender == role) return true;
  }
  return false;
}

std::vector<const PrimitiveMessage*> step_primitives(const MessageStep& step) {
  std::vector<const PrimitiveMessage*> out;
  if (const auto* pm = std::get_if<PrimitiveMessage>(&step)) {
    out.push_back(pm);
  } else {
    for (const auto& b : std::get<ComplexMessage>(step).branches) out.push_back(&b);
  }
  return out;
}

std::vector<std::size_t> role_chain(const InteractionProtocol& ip, std::string_view role) {
  std::vector<std::size_t> natural;
  for (std::size_t i = 0; i < ip.messages.size(); ++i) {
    if (participates(ip.messages[i], role)) natural.push_back(i);
  }
  for (const auto& o : ip.orders) {
    if (o.role != role) continue;
    std::vector<std::size_t> ordered;
    for (const auto& name : o.steps) {
      auto idx = ip.find_step(name);
      if (!idx) return natural;
      ordered.push_back(*idx);
    }
    auto a = ordered;
    auto b = natural;
    std::sort(a.begin(), a.end());
    if (a != b) return natural;  // not a permutation; validation reports it
    return ordered;
  }
  return natural;
}

std::set<RolePair> projected_flow(const InteractionProtocol& ip) {
  std::set<RolePair> out;
  for (const auto& step : ip.messages) {
    for (const auto* pm : step_primitives(step)) out.emplace(pm->sender, pm->receiver);
  }
  return out;
}

ResponseBounds expected_responses(const ComplexMessage& cm) {
  const std::size_t m = cm.branches.size();
  switch (cm.op) {
    case Operator::And: return {m, m};
    case Operator::Xor: return {1, 1};
    case Operator::Or: return {1, m};
  }
  return {m, m};
}

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; });
}

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Severity::Error; }));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

using detail::TokenCursor;
using detail::TokenKind;

class DocumentParser {
 public:
  explicit DocumentParser(std::string_view src) : cur_(detail::tokenize(src)) {}

  InteractionProtocol parse() {
    cur_.expect_word("protocol");
    ip_.id = cur_.expect_identifier("protocol identifier");
    bool saw_flow = false;
    std::set<std::string> seen;
    while (!cur_.at_end()) {
      const auto& tok = cur_.peek();
      if (tok.kind != TokenKind::Word) cur_.fail("expected a section keyword");
      const std::string section = tok.text;
      if (!seen.insert(section).second) cur_.fail("duplicate section '" + section + "'");
      cur_.next();
      cur_.expect_symbol("{");
      if (section == "roles") {
        parse_roles();
      } else if (section == "vars") {
        parse_vars();
      } else if (section == "messages") {
        parse_messages();
      } else if (section == "flow") {
        parse_flow();
        saw_flow = true;
      } else if (section == "order") {
        parse_order();
      } else {
        TokenCursor::fail_at(tok, "unknown section '" + section + "'");
      }
      cur_.expect_symbol("}");
    }
    if (!saw_flow) ip_.flow = projected_flow(ip_);
    return std::move(ip_);
  }

 private:
  void parse_roles() {
    while (!cur_.is_symbol("}")) {
      Role r;
      r.loc = cur_.peek().loc;
      r.name = cur_.expect_identifier("role name");
      cur_.expect_symbol(":");
      const auto& kt = cur_.peek();
      const std::string kind = cur_.expect_identifier("role kind");
      if (kind == "PrivateProcess" || kind == "private") {
        r.kind = RoleKind::PrivateProcess;
      } else if (kind == "WebService" || kind == "service") {
        r.kind = RoleKind::WebService;
      } else {
        TokenCursor::fail_at(kt, "unknown role kind '" + kind + "'");
      }
      if (cur_.accept_symbol("[")) {
        while (!cur_.accept_symbol("]")) {
          r.keywords.push_back(cur_.expect_identifier("keyword"));
          cur_.accept_symbol(",");
        }
      }
      ip_.roles.push_back(std::move(r));
    }
  }

  void parse_vars() {
    while (!cur_.is_symbol("}")) {
      VarDecl v;
      v.loc = cur_.peek().loc;
      v.name = cur_.expect_identifier("variable name");
      cur_.expect_symbol(":");
      const auto& tt = cur_.peek();
      auto type = value_type_from_string(cur_.expect_identifier("variable type"));
      if (!type) TokenCursor::fail_at(tt, "unknown variable type '" + tt.text + "'");
      v.type = *type;
      if (cur_.accept_symbol("=")) v.initial = detail::parse_literal(cur_);
      ip_.vars.push_back(std::move(v));
    }
  }

  void parse_messages() {
    while (!cur_.is_symbol("}")) {
      if (cur_.is_word("pm")) {
        ip_.messages.emplace_back(parse_pm());
      } else if (cur_.is_word("cm")) {
        ip_.messages.emplace_back(parse_cm());
      } else {
        cur_.fail("expected 'pm' or 'cm'");
      }
    }
  }

  PrimitiveMessage parse_pm() {
    PrimitiveMessage pm;
    pm.loc = cur_.peek().loc;
    cur_.expect_word("pm");
    pm.name = cur_.expect_identifier("message name");
    cur_.expect_symbol(":");
    pm.sender = cur_.expect_identifier("sender role");
    cur_.expect_symbol("->");
    pm.receiver = cur_.expect_identifier("receiver role");
    const auto& at = cur_.peek();
    const std::string act = cur_.expect_identifier("communicative act");
    auto parsed = act_from_string(act);
    if (!parsed) TokenCursor::fail_at(at, "unknown communicative act '" + act + "'");
    pm.act = *parsed;
    bool mode_set = false;
    while (true) {
      if (cur_.is_word("sync") || cur_.is_word("async")) {
        if (mode_set) cur_.fail("message mode given twice");
        pm.option.mode = cur_.next().text == "sync" ? MessageMode::Synchronous : MessageMode::Asynchronous;
        mode_set = true;
      } else if (cur_.is_word("guard")) {
        if (pm.option.guard) cur_.fail("guard given twice");
        cur_.next();
        pm.option.guard = detail::parse_guard_expr(cur_);
      } else if (cur_.is_word("deadline")) {
        if (pm.option.deadline) cur_.fail("deadline given twice");
        cur_.next();
        if (cur_.peek().kind != TokenKind::Int) cur_.fail("expected deadline ticks");
        pm.option.deadline = cur_.next().number;
      } else {
        break;
      }
    }
    return pm;
  }

  ComplexMessage parse_cm() {
    ComplexMessage cm;
    cm.loc = cur_.peek().loc;
    cur_.expect_word("cm");
    cm.name = cur_.expect_identifier("complex message name");
    const auto& ot = cur_.peek();
    const std::string op = cur_.expect_identifier("operator");
    if (op == "AND") {
      cm.op = Operator::And;
    } else if (op == "OR") {
      cm.op = Operator::Or;
    } else if (op == "XOR") {
      cm.op = Operator::Xor;
    } else {
      TokenCursor::fail_at(ot, "unknown operator '" + op + "' (expected AND, OR or XOR)");
    }
    cur_.expect_symbol("{");
    while (!cur_.accept_symbol("}")) cm.branches.push_back(parse_pm());
    return cm;
  }

  void parse_flow() {
    while (!cur_.is_symbol("}")) {
      cur_.expect_symbol("(");
      std::string a = cur_.expect_identifier("role name");
      cur_.expect_symbol(",");
      std::string b = cur_.expect_identifier("role name");
      cur_.expect_symbol(")");
      cur_.accept_symbol(",");
      ip_.flow.emplace(std::move(a), std::move(b));
    }
  }

  void parse_order() {
    while (!cur_.is_symbol("}")) {
      RoleOrder o;
      o.loc = cur_.peek().loc;
      o.role = cur_.expect_identifier("role name");
      cur_.expect_symbol(":");
      o.steps.push_back(cur_.expect_identifier("step name"));
      while (cur_.accept_symbol(",")) o.steps.push_back(cur_.expect_identifier("step name"));
      ip_.orders.push_back(std::move(o));
    }
  }

  TokenCursor cur_;
  InteractionProtocol ip_;
};

SourceLoc finding_loc(const InteractionProtocol& ip, const Finding& f) {
  if (const auto* r = ip.find_role(f.location)) return r->loc;
  for (const auto& step : ip.messages) {
    if (step_name(step) == f.location) return std::visit([](const auto& s) { return s.loc; }, step);
    for (const auto* pm : step_primitives(step)) {
      if (pm->name == f.location) return pm->loc;
    }
  }
  if (const auto* v = ip.find_var(f.location)) return v->loc;
  return {1, 1};
}

}  // namespace

InteractionProtocol parse_document(std::string_view source) { return DocumentParser(source).parse(); }

InteractionProtocol parse_protocol(std::string_view source) {
  InteractionProtocol ip = parse_document(source);
  const ValidationReport report = validate_well_formedness(ip);
  for (const auto& f : report.findings) {
    if (f.severity == Severity::Error) {
      throw ProtocolError(f.code + ": " + f.detail, finding_loc(ip, f));
    }
  }
  return ip;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_pm(std::ostream& os, const PrimitiveMessage& pm, std::string_view indent) {
  os << indent << "pm " << pm.name << ": " << pm.sender << " -> " << pm.receiver << ' ' << to_string(pm.act)
     << (pm.option.mode == MessageMode::Synchronous ? " sync" : " async");
  if (pm.option.guard) os << " guard " << to_string(*pm.option.guard);
  if (pm.option.deadline) os << " deadline " << *pm.option.deadline;
  os << '\n';
}

}  // namespace

std::string serialize_protocol(const InteractionProtocol& ip) {
  std::ostringstream os;
  os << "protocol " << ip.id << "\n\nroles {\n";
  for (const auto& r : ip.roles) {
    os << "  " << r.name << ": " << (r.kind == RoleKind::WebService ? "WebService" : "PrivateProcess");
    if (!r.keywords.empty()) {
      os << " [";
      for (std::size_t i = 0; i < r.keywords.size(); ++i) os << (i ? " " : "") << r.keywords[i];
      os << ']';
    }
    os << '\n';
  }
  os << "}\n";
  if (!ip.vars.empty()) {
    os << "\nvars {\n";
    for (const auto& v : ip.vars) {
      os << "  " << v.name << ": " << to_string(v.type);
      if (v.initial) os << " = " << render_value(*v.initial);
      os << '\n';
    }
    os << "}\n";
  }
  os << "\nmessages {\n";
  for (const auto& step : ip.messages) {
    if (const auto* pm = std::get_if<PrimitiveMessage>(&step)) {
      write_pm(os, *pm, "  ");
    } else {
      const auto& cm = std::get<ComplexMessage>(step);
      os << "  cm " << cm.name << ' ' << to_string(cm.op) << " {\n";
      for (const auto& b : cm.branches) write_pm(os, b, "    ");
      os << "  }\n";
    }
  }
  os << "}\n\nflow {\n";
  for (const auto& [a, b] : ip.flow) os << "  (" << a << ", " << b << ")\n";
  os << "}\n";
  if (!ip.orders.empty()) {
    os << "\norder {\n";
    for (const auto& o : ip.orders) {
      os << "  " << o.role << ": ";
      for (std::size_t i = 0; i < o.steps.size(); ++i) os << (i ? ", " : "") << o.steps[i];
      os << '\n';
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace ipe
