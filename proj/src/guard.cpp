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

#include "ipe/guard.hpp"

#include <utility>

#include "lexer.hpp"

namespace ipe {

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::Int: return "int";
    case ValueType::Bool: return "bool";
    case ValueType::String: return "string";
  }
  return "int";
}

std::optional<ValueType> value_type_from_string(std::string_view s) {
  if (s == "int") return ValueType::Int;
  if (s == "bool") return ValueType::Bool;
  if (s == "string") return ValueType::String;
  return std::nullopt;
}

ValueType type_of(const Value& v) {
  switch (v.index()) {
    case 0: return ValueType::Int;
    case 1: return ValueType::Bool;
    default: return ValueType::String;
  }
}

std::string render_value(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  std::string out = "\"";
  for (char c : std::get<std::string>(v)) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "=";
}

GuardExpr GuardExpr::constant(bool b) {
  GuardExpr g;
  g.kind = Kind::Literal;
  g.literal = b;
  return g;
}

GuardExpr GuardExpr::compare(std::string var, CmpOp op, Value rhs) {
  GuardExpr g;
  g.kind = Kind::Compare;
  g.var = std::move(var);
  g.op = op;
  g.rhs = std::move(rhs);
  return g;
}

GuardExpr GuardExpr::conj(GuardExpr lhs, GuardExpr rhs) {
  GuardExpr g;
  g.kind = Kind::And;
  g.children.push_back(std::move(lhs));
  g.children.push_back(std::move(rhs));
  return g;
}

GuardExpr GuardExpr::disj(GuardExpr lhs, GuardExpr rhs) {
  GuardExpr g;
  g.kind = Kind::Or;
  g.children.push_back(std::move(lhs));
  g.children.push_back(std::move(rhs));
  return g;
}

GuardExpr GuardExpr::negate(GuardExpr inner) {
  GuardExpr g;
  g.kind = Kind::Not;
  g.children.push_back(std::move(inner));
  return g;
}

GuardExpr parse_guard(std::string_view text) {
  detail::TokenCursor cur(detail::tokenize(text));
  GuardExpr g = detail::parse_guard_expr(cur);
  if (!cur.at_end()) cur.fail("unexpected trailing input in guard");
  return g;
}

namespace {

// or = 1, and = 2, everything else binds tighter.
int precedence(const GuardExpr& g) {
  switch (g.kind) {
    case GuardExpr::Kind::Or: return 1;
    case GuardExpr::Kind::And: return 2;
    default: return 3;
  }
}

void render(const GuardExpr& g, std::string& out) {
  using K = GuardExpr::Kind;
  switch (g.kind) {
    case K::Literal:
      out += g.literal ? "true" : "false";
      return;
    case K::Compare:
      out += g.var;
      out += ' ';
      out += to_string(g.op);
      out += ' ';
      out += render_value(g.rhs);
      return;
    case K::Not: {
      out += "not ";
      const bool wrap = precedence(g.children[0]) < 3;
      if (wrap) out += '(';
      render(g.children[0], out);
      if (wrap) out += ')';
      return;
    }
    case K::And:
    case K::Or: {
      const int p = precedence(g);
      // Left-associative: the right child needs parens at equal precedence.
      const bool wrap_l = precedence(g.children[0]) < p;
      const bool wrap_r = precedence(g.children[1]) <= p;
      if (wrap_l) out += '(';
      render(g.children[0], out);
      if (wrap_l) out += ')';
      out += g.kind == K::And ? " and " : " or ";
      if (wrap_r) out += '(';
      render(g.children[1], out);
      if (wrap_r) out += ')';
      return;
    }
  }
}

void collect(const GuardExpr& g, std::set<std::string>& out) {
  if (g.kind == GuardExpr::Kind::Compare) out.insert(g.var);
  for (const auto& c : g.children) collect(c, out);
}

bool compare_values(const Value& lhs, CmpOp op, const Value& rhs) {
  if (lhs.index() != rhs.index()) return false;
  if (const auto* a = std::get_if<std::int64_t>(&lhs)) {
    const auto b = std::get<std::int64_t>(rhs);
    switch (op) {
      case CmpOp::Eq: return *a == b;
      case CmpOp::Ne: return *a != b;
      case CmpOp::Lt: return *a < b;
      case CmpOp::Le: return *a <= b;
      case CmpOp::Gt: return *a > b;
      case CmpOp::Ge: return *a >= b;
    }
  }
  switch (op) {
    case CmpOp::Eq: return lhs == rhs;
    case CmpOp::Ne: return lhs != rhs;
    default: return false;
  }
}

bool eval(const GuardExpr& g, const Bindings& env) {
  using K = GuardExpr::Kind;
  switch (g.kind) {
    case K::Literal: return g.literal;
    case K::Compare: return compare_values(env.at(g.var), g.op, g.rhs);
    case K::Not: return !eval(g.children[0], env);
    case K::And: return eval(g.children[0], env) && eval(g.children[1], env);
    case K::Or: return eval(g.children[0], env) || eval(g.children[1], env);
  }
  return false;
}

}  // namespace

std::string to_string(const GuardExpr& g) {
  std::string out;
  render(g, out);
  return out;
}

std::set<std::string> referenced_variables(const GuardExpr& g) {
  std::set<std::string> out;
  collect(g, out);
  return out;
}

bool evaluate(const GuardExpr& g, const Bindings& env) {
  for (const auto& v : referenced_variables(g)) {
    if (!env.contains(v)) return false;
  }
  return eval(g, env);
}

}  // namespace ipe
