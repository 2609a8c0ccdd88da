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

#include "lexer.hpp"

#include <cctype>
#include <charconv>
#include <utility>

namespace ipe::detail {
namespace {

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token tok;
    tok.loc = {line, col};
    if (word_start(c)) {
      std::size_t j = i;
      while (j < src.size()) {
        if (word_char(src[j])) {
          ++j;
        } else if (src[j] == '-' && j + 1 < src.size() && word_char(src[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
      tok.kind = TokenKind::Word;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      tok.kind = TokenKind::Int;
      tok.text = std::string(src.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
      if (ec != std::errc{}) throw ProtocolError("integer literal out of range: " + tok.text, tok.loc);
      advance(j - i);
    } else if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == '\\' && j + 1 < src.size()) {
          value.push_back(src[j + 1]);
          j += 2;
        } else if (src[j] == '"') {
          closed = true;
          ++j;
          break;
        } else if (src[j] == '\n') {
          break;
        } else {
          value.push_back(src[j++]);
        }
      }
      if (!closed) throw ProtocolError("unterminated string literal", tok.loc);
      tok.kind = TokenKind::String;
      tok.text = std::move(value);
      advance(j - i);
    } else {
      static constexpr std::string_view kTwo[] = {"->", "==", "!=", "<=", ">="};
      std::string_view rest = src.substr(i);
      std::size_t len = 0;
      for (auto two : kTwo) {
        if (rest.substr(0, 2) == two) {
          len = 2;
          break;
        }
      }
      if (len == 0) {
        if (std::string_view("{}()[],:=<>").find(c) == std::string_view::npos) {
          throw ProtocolError(std::string("unexpected character '") + c + "'", tok.loc);
        }
        len = 1;
      }
      tok.kind = TokenKind::Symbol;
      tok.text = std::string(rest.substr(0, len));
      advance(len);
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.loc = {line, col};
  out.push_back(std::move(end));
  return out;
}

const Token& TokenCursor::peek(std::size_t ahead) const {
  const std::size_t idx = pos_ + ahead;
  return idx < tokens_.size() ? tokens_[idx] : tokens_.back();
}

const Token& TokenCursor::next() {
  const Token& t = peek();
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool TokenCursor::is_symbol(std::string_view s, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokenKind::Symbol && t.text == s;
}

bool TokenCursor::is_word(std::string_view w, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokenKind::Word && t.text == w;
}

bool TokenCursor::accept_symbol(std::string_view s) {
  if (!is_symbol(s)) return false;
  next();
  return true;
}

bool TokenCursor::accept_word(std::string_view w) {
  if (!is_word(w)) return false;
  next();
  return true;
}

void TokenCursor::expect_symbol(std::string_view s) {
  if (!accept_symbol(s)) fail("expected '" + std::string(s) + "' but found " + describe(peek()));
}

void TokenCursor::expect_word(std::string_view w) {
  if (!accept_word(w)) fail("expected '" + std::string(w) + "' but found " + describe(peek()));
}

std::string TokenCursor::expect_identifier(std::string_view what) {
  const Token& t = peek();
  if (t.kind != TokenKind::Word) fail("expected " + std::string(what) + " but found " + describe(t));
  return next().text;
}

void TokenCursor::fail(const std::string& message) const { fail_at(peek(), message); }

void TokenCursor::fail_at(const Token& tok, const std::string& message) {
  throw ProtocolError(message, tok.loc);
}

bool is_reserved_in_guard(std::string_view w) {
  return w == "and" || w == "or" || w == "not" || w == "true" || w == "false" || w == "deadline" ||
         w == "guard" || w == "sync" || w == "async";
}

Value parse_literal(TokenCursor& cur) {
  const Token& t = cur.peek();
  if (t.kind == TokenKind::Int) return cur.next().number;
  if (t.kind == TokenKind::String) return cur.next().text;
  if (cur.accept_word("true")) return true;
  if (cur.accept_word("false")) return false;
  cur.fail("expected a literal but found " + describe(t));
}

namespace {

std::optional<CmpOp> comparison_at(const TokenCursor& cur) {
  const Token& t = cur.peek();
  if (t.kind != TokenKind::Symbol) return std::nullopt;
  if (t.text == "=" || t.text == "==") return CmpOp::Eq;
  if (t.text == "!=") return CmpOp::Ne;
  if (t.text == "<") return CmpOp::Lt;
  if (t.text == "<=") return CmpOp::Le;
  if (t.text == ">") return CmpOp::Gt;
  if (t.text == ">=") return CmpOp::Ge;
  return std::nullopt;
}

GuardExpr parse_or(TokenCursor& cur);

GuardExpr parse_unary(TokenCursor& cur) {
  if (cur.accept_word("not")) return GuardExpr::negate(parse_unary(cur));
  if (cur.accept_symbol("(")) {
    GuardExpr inner = parse_or(cur);
    cur.expect_symbol(")");
    return inner;
  }
  if (cur.accept_word("true")) return GuardExpr::constant(true);
  if (cur.accept_word("false")) return GuardExpr::constant(false);
  const Token& t = cur.peek();
  if (t.kind != TokenKind::Word || is_reserved_in_guard(t.text)) {
    cur.fail("expected a guard term but found " + describe(t));
  }
  std::string var = cur.next().text;
  auto op = comparison_at(cur);
  if (!op) cur.fail("expected a comparison operator after '" + var + "'");
  cur.next();
  Value rhs = parse_literal(cur);
  return GuardExpr::compare(std::move(var), *op, std::move(rhs));
}

GuardExpr parse_and(TokenCursor& cur) {
  GuardExpr lhs = parse_unary(cur);
  while (cur.accept_word("and")) lhs = GuardExpr::conj(std::move(lhs), parse_unary(cur));
  return lhs;
}

GuardExpr parse_or(TokenCursor& cur) {
  GuardExpr lhs = parse_and(cur);
  while (cur.accept_word("or")) lhs = GuardExpr::disj(std::move(lhs), parse_and(cur));
  return lhs;
}

}  // namespace

GuardExpr parse_guard_expr(TokenCursor& cur) { return parse_or(cur); }

}  // namespace ipe::detail
