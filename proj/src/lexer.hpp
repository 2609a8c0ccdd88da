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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ipe/guard.hpp"
#include "ipe/protocol.hpp"

namespace ipe::detail {

enum class TokenKind {
  Word,    // identifiers, keywords, acts (may contain '-')
  Int,
  String,  // unquoted value
  Symbol,  // { } ( ) [ ] , : -> = == != < <= > >=
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::int64_t number = 0;
  SourceLoc loc;
};

/// Splits document text into tokens. `#` starts a comment running to end of
/// line. Throws ProtocolError on stray characters.
std::vector<Token> tokenize(std::string_view source);

class TokenCursor {
 public:
  explicit TokenCursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  [[nodiscard]] const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  [[nodiscard]] bool at_end() const { return peek().kind == TokenKind::End; }

  [[nodiscard]] bool is_symbol(std::string_view s, std::size_t ahead = 0) const;
  [[nodiscard]] bool is_word(std::string_view w, std::size_t ahead = 0) const;
  bool accept_symbol(std::string_view s);
  bool accept_word(std::string_view w);

  void expect_symbol(std::string_view s);
  void expect_word(std::string_view w);
  std::string expect_identifier(std::string_view what);

  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] static void fail_at(const Token& tok, const std::string& message);

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

/// Guard grammar over an existing cursor; stops at the first token that
/// cannot continue the expression.
GuardExpr parse_guard_expr(TokenCursor& cur);

/// Literal value: integer, quoted string, true/false.
Value parse_literal(TokenCursor& cur);

bool is_reserved_in_guard(std::string_view word);

}  // namespace ipe::detail
