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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ipe {

enum class ValueType { Int, Bool, String };

using Value = std::variant<std::int64_t, bool, std::string>;

/// Variable name -> current value. Absent names are unbound.
using Bindings = std::map<std::string, Value>;

std::string_view to_string(ValueType t);
std::optional<ValueType> value_type_from_string(std::string_view s);
ValueType type_of(const Value& v);
/// Literal rendering used by the document format (strings are quoted).
std::string render_value(const Value& v);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op);

/// Boolean expression over dataspace variables.
///
/// Leaves are literals (`true`/`false`) or comparisons of one variable
/// against one literal. Interior nodes are binary `and`/`or` and unary `not`.
struct GuardExpr {
  enum class Kind { Literal, Compare, And, Or, Not };

  Kind kind = Kind::Literal;
  bool literal = true;
  std::string var;
  CmpOp op = CmpOp::Eq;
  Value rhs;
  std::vector<GuardExpr> children;

  static GuardExpr constant(bool b);
  static GuardExpr compare(std::string var, CmpOp op, Value rhs);
  static GuardExpr conj(GuardExpr lhs, GuardExpr rhs);
  static GuardExpr disj(GuardExpr lhs, GuardExpr rhs);
  static GuardExpr negate(GuardExpr inner);

  friend bool operator==(const GuardExpr&, const GuardExpr&) = default;
};

/// Parses a standalone guard expression. Throws ProtocolError.
GuardExpr parse_guard(std::string_view text);

/// Canonical text; parse_guard(to_string(g)) == g.
std::string to_string(const GuardExpr& g);

/// Names of every variable the expression references.
std::set<std::string> referenced_variables(const GuardExpr& g);

/// Fail-closed evaluation: a guard that references any unbound variable, or
/// compares values of different types, is false.
bool evaluate(const GuardExpr& g, const Bindings& env);

}  // namespace ipe
