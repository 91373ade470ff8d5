#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dirloc/ast.hpp"
#include "dirloc/errors.hpp"
#include "dirloc/grammar.hpp"

namespace dirloc::lang {

namespace detail {

enum class TokenKind { Int, Float, String, Ident, Keyword, Punct, End };

struct Token {
  TokenKind kind;
  std::string text;
  std::uint64_t int_value = 0;  // magnitude; the sign comes from context
  double float_value = 0.0;
  int line = 1;
  int column = 1;
};

inline bool is_keyword(std::string_view word) {
  return word == "function" || word == "let" || word == "if" || word == "else" ||
         word == "while" || word == "return" || word == "true" || word == "false";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = TokenKind::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = is_keyword(t.text) ? TokenKind::Keyword : TokenKind::Ident;
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, line_, col_); }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    std::size_t start = pos_;
    bool is_float = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      is_float = true;
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      int save_col = col_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        is_float = true;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      } else {
        pos_ = save;
        col_ = save_col;
      }
    }
    if (pos_ < src_.size() &&
        (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      fail("malformed number literal");
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (is_float) {
      t.kind = TokenKind::Float;
      auto [ptr, ec] = std::from_chars(first, last, t.float_value);
      if (ec != std::errc() || ptr != last) fail("float literal out of range");
    } else {
      t.kind = TokenKind::Int;
      auto [ptr, ec] = std::from_chars(first, last, t.int_value);
      if (ec != std::errc() || ptr != last) fail("integer literal out of range");
    }
  }

  void lex_string(Token& t) {
    t.kind = TokenKind::String;
    advance();
    std::string out;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') fail("unterminated string literal");
      char c = src_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) fail("unterminated string literal");
        char e = src_[pos_];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
    t.text = std::move(out);
  }

  void lex_punct(Token& t) {
    t.kind = TokenKind::Punct;
    static constexpr std::string_view two[] = {"==", "!=", "<=", ">=", "&&", "||"};
    std::string_view rest = src_.substr(pos_);
    for (auto op : two) {
      if (rest.substr(0, 2) == op) {
        t.text = std::string(op);
        advance();
        advance();
        return;
      }
    }
    static constexpr std::string_view one = "+-*/%<>!~=(){},;.";
    char c = src_[pos_];
    if (one.find(c) == std::string_view::npos) fail(std::string("unexpected character '") + c + "'");
    t.text = std::string(1, c);
    advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  AstNode program() {
    AstNode root(NodeKind::Block);
    while (!at_end()) root.children.push_back(statement(/*top_level=*/true));
    return root;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokenKind::End; }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == TokenKind::Punct && t.text == p;
  }
  bool is_keyword(std::string_view k) const {
    return peek().kind == TokenKind::Keyword && peek().text == k;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    std::string got = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(msg + ", got " + got, t.line, t.column);
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    ++pos_;
  }

  std::string expect_ident() {
    if (peek().kind != TokenKind::Ident) fail("expected identifier");
    return toks_[pos_++].text;
  }

  AstNode statement(bool top_level = false) {
    if (is_keyword("function")) {
      if (!top_level) fail("function declarations are only allowed at top level");
      return function_decl();
    }
    if (is_keyword("let")) {
      ++pos_;
      std::string name = expect_ident();
      expect_punct("=");
      AstNode init = expression();
      expect_punct(";");
      return AstNode(NodeKind::Let, name, {std::move(init)});
    }
    if (is_keyword("if")) {
      ++pos_;
      expect_punct("(");
      AstNode cond = expression();
      expect_punct(")");
      AstNode node(NodeKind::If, {}, {std::move(cond), statement()});
      if (is_keyword("else")) {
        ++pos_;
        node.children.push_back(statement());
      }
      return node;
    }
    if (is_keyword("while")) {
      ++pos_;
      expect_punct("(");
      AstNode cond = expression();
      expect_punct(")");
      return AstNode(NodeKind::While, {}, {std::move(cond), statement()});
    }
    if (is_keyword("return")) {
      if (function_depth_ == 0) fail("'return' outside of a function");
      ++pos_;
      AstNode value = expression();
      expect_punct(";");
      return AstNode(NodeKind::Return, {}, {std::move(value)});
    }
    if (is_punct("{")) return block();
    if (peek().kind == TokenKind::Ident && is_punct("=", 1)) {
      std::string name = toks_[pos_].text;
      pos_ += 2;
      AstNode value = expression();
      expect_punct(";");
      return AstNode(NodeKind::Assign, name, {std::move(value)});
    }
    AstNode e = expression();
    expect_punct(";");
    return AstNode(NodeKind::ExprStmt, {}, {std::move(e)});
  }

  AstNode block() {
    expect_punct("{");
    AstNode b(NodeKind::Block);
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}'");
      b.children.push_back(statement());
    }
    ++pos_;
    return b;
  }

  AstNode function_decl() {
    ++pos_;
    AstNode fn(NodeKind::Function, expect_ident());
    expect_punct("(");
    if (!is_punct(")")) {
      while (true) {
        fn.children.emplace_back(NodeKind::Param, expect_ident());
        if (is_punct(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    ++function_depth_;
    fn.children.push_back(block());
    --function_depth_;
    return fn;
  }

  AstNode expression(int min_prec = 1) {
    AstNode lhs = unary();
    while (peek().kind == TokenKind::Punct) {
      int prec = binary_precedence(peek().text);
      if (prec == 0 || prec < min_prec) break;
      std::string op = toks_[pos_++].text;
      AstNode rhs = expression(prec + 1);
      lhs = AstNode(NodeKind::BinaryOp, op, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  AstNode unary() {
    if (peek().kind == TokenKind::Punct &&
        (peek().text == "+" || peek().text == "-" || peek().text == "~" || peek().text == "!")) {
      std::string op = toks_[pos_++].text;
      return AstNode(NodeKind::UnaryOp, op, {unary()});
    }
    return postfix();
  }

  AstNode postfix() {
    AstNode callee_or_value = primary();
    if (is_punct("(")) {
      NodeKind k = callee_or_value.kind;
      if (k != NodeKind::Identifier && k != NodeKind::BuiltinRef) fail("only names can be called");
      ++pos_;
      AstNode call(NodeKind::Call, {}, {std::move(callee_or_value)});
      if (!is_punct(")")) {
        while (true) {
          call.children.push_back(expression());
          if (is_punct(",")) {
            ++pos_;
            continue;
          }
          break;
        }
      }
      expect_punct(")");
      if (call.children.front().kind == NodeKind::BuiltinRef) {
        auto info = find_builtin(call.children.front().text());
        if (static_cast<int>(call.children.size()) - 1 != info->arity) {
          fail(call.children.front().text() + " expects " + std::to_string(info->arity) +
               " argument(s)");
        }
      }
      return call;
    }
    if (callee_or_value.kind == NodeKind::BuiltinRef) fail("builtin must be called");
    return callee_or_value;
  }

  // `( - <number> )` is a negative literal; every other minus is a UnaryOp.
  bool negative_literal_ahead() const {
    const auto& n = peek(2);
    return is_punct("(") && is_punct("-", 1) &&
           (n.kind == TokenKind::Int || n.kind == TokenKind::Float) && is_punct(")", 3);
  }

  AstNode primary() {
    const Token& t = peek();
    if (negative_literal_ahead()) {
      const Token& num = peek(2);
      pos_ += 4;
      if (num.kind == TokenKind::Float) return AstNode(NodeKind::NumberLit, -num.float_value);
      constexpr auto kMinMagnitude =
          static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) + 1;
      if (num.int_value > kMinMagnitude) fail("integer literal out of range");
      std::int64_t v = num.int_value == kMinMagnitude
                           ? std::numeric_limits<std::int64_t>::min()
                           : -static_cast<std::int64_t>(num.int_value);
      return AstNode(NodeKind::NumberLit, v);
    }
    switch (t.kind) {
      case TokenKind::Int: {
        if (t.int_value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
          fail("integer literal out of range");
        }
        ++pos_;
        return AstNode(NodeKind::NumberLit, static_cast<std::int64_t>(t.int_value));
      }
      case TokenKind::Float:
        ++pos_;
        return AstNode(NodeKind::NumberLit, t.float_value);
      case TokenKind::String:
        ++pos_;
        return AstNode(NodeKind::StringLit, t.text);
      case TokenKind::Keyword:
        if (t.text == "true" || t.text == "false") {
          ++pos_;
          return AstNode(NodeKind::BoolLit, t.text == "true");
        }
        fail("unexpected keyword");
      case TokenKind::Ident: {
        std::string name = toks_[pos_++].text;
        if (is_punct(".")) {
          ++pos_;
          std::string member = expect_ident();
          std::string full = name + "." + member;
          if (!find_builtin(full)) {
            --pos_;
            fail("unknown builtin '" + full + "'");
          }
          return AstNode(NodeKind::BuiltinRef, full);
        }
        return AstNode(NodeKind::Identifier, name);
      }
      case TokenKind::Punct:
        if (t.text == "(") {
          ++pos_;
          AstNode inner = expression();
          expect_punct(")");
          return inner;
        }
        fail("expected expression");
      case TokenKind::End:
        fail("expected expression");
    }
    fail("expected expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int function_depth_ = 0;
};

}  // namespace detail

/// Parses a mini-language program into a pre-order numbered tree rooted at a
/// Block.  Throws SyntaxError on malformed input.
inline AstNode parse(std::string_view source) {
  detail::Lexer lexer(source);
  detail::Parser parser(lexer.run());
  AstNode root = parser.program();
  renumber_in_place(root);
  return root;
}

/// Non-throwing variant for callers that only need validity.
inline std::optional<AstNode> try_parse(std::string_view source) {
  try {
    return parse(source);
  } catch (const SyntaxError&) {
    return std::nullopt;
  }
}

}  // namespace dirloc::lang
