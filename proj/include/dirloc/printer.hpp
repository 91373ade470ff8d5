#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

#include "dirloc/ast.hpp"
#include "dirloc/errors.hpp"
#include "dirloc/grammar.hpp"

namespace dirloc::lang {

namespace detail {

/// Shortest round-trip spelling that the lexer reads back as a float.
inline std::string float_literal_magnitude(double magnitude) {
  if (!std::isfinite(magnitude)) throw PreconditionError("non-finite float literal cannot be printed");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, magnitude);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

class Printer {
 public:
  std::string program(const AstNode& root) {
    if (root.kind == NodeKind::Block) {
      for (const auto& s : root.children) statement(s, 0);
    } else if (is_statement(root.kind)) {
      statement(root, 0);
    } else {
      out_ += expr(root, 0, false);
    }
    return std::move(out_);
  }

  static std::string literal(const AstNode& n) {
    if (const auto* i = std::get_if<std::int64_t>(&n.value)) {
      if (*i >= 0) return std::to_string(*i);
      std::uint64_t mag = 0 - static_cast<std::uint64_t>(*i);
      return "(-" + std::to_string(mag) + ")";
    }
    double d = std::get<double>(n.value);
    if (std::signbit(d)) return "(-" + float_literal_magnitude(-d) + ")";
    return float_literal_magnitude(d);
  }

  static std::string expr(const AstNode& n, int parent_prec, bool right_operand) {
    switch (n.kind) {
      case NodeKind::BinaryOp: {
        const std::string& op = n.text();
        int prec = binary_precedence(op);
        std::string s = expr(n.children[0], prec, false) + " " + op + " " +
                        expr(n.children[1], prec, true);
        bool parens = prec < parent_prec || (prec == parent_prec && right_operand);
        return parens ? "(" + s + ")" : s;
      }
      case NodeKind::UnaryOp:
        return n.text() + expr(n.children[0], kUnaryPrecedence, false);
      case NodeKind::Call: {
        std::string s = n.children[0].text() + "(";
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          if (i > 1) s += ", ";
          s += expr(n.children[i], 0, false);
        }
        return s + ")";
      }
      case NodeKind::BuiltinRef:
      case NodeKind::Identifier:
        return n.text();
      case NodeKind::NumberLit:
        return literal(n);
      case NodeKind::StringLit:
        return quote(n.text());
      case NodeKind::BoolLit:
        return std::get<bool>(n.value) ? "true" : "false";
      default:
        throw PreconditionError("statement node in expression position");
    }
  }

 private:
  static bool is_statement(NodeKind k) {
    switch (k) {
      case NodeKind::Block:
      case NodeKind::Function:
      case NodeKind::Let:
      case NodeKind::Assign:
      case NodeKind::If:
      case NodeKind::While:
      case NodeKind::Return:
      case NodeKind::ExprStmt:
        return true;
      default:
        return false;
    }
  }

  void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 2, ' '); }

  // Emits the body of an if/while: braces for blocks, inline otherwise.
  void body(const AstNode& s, int depth) {
    if (s.kind == NodeKind::Block) {
      out_ += " ";
      block(s, depth);
    } else {
      out_ += "\n";
      statement(s, depth + 1);
      out_.pop_back();
    }
  }

  void block(const AstNode& b, int depth) {
    out_ += "{\n";
    for (const auto& s : b.children) statement(s, depth + 1);
    indent(depth);
    out_ += "}";
  }

  void statement(const AstNode& s, int depth) {
    indent(depth);
    switch (s.kind) {
      case NodeKind::Block:
        block(s, depth);
        break;
      case NodeKind::Function: {
        out_ += "function " + s.text() + "(";
        bool first = true;
        for (std::size_t i = 0; i + 1 < s.children.size(); ++i) {
          if (!first) out_ += ", ";
          out_ += s.children[i].text();
          first = false;
        }
        out_ += ") ";
        block(s.children.back(), depth);
        break;
      }
      case NodeKind::Let:
        out_ += "let " + s.text() + " = " + expr(s.children[0], 0, false) + ";";
        break;
      case NodeKind::Assign:
        out_ += s.text() + " = " + expr(s.children[0], 0, false) + ";";
        break;
      case NodeKind::Return:
        out_ += "return " + expr(s.children[0], 0, false) + ";";
        break;
      case NodeKind::ExprStmt:
        out_ += expr(s.children[0], 0, false) + ";";
        break;
      case NodeKind::If:
        out_ += "if (" + expr(s.children[0], 0, false) + ")";
        body(s.children[1], depth);
        if (s.children.size() == 3) {
          if (s.children[1].kind == NodeKind::Block) {
            out_ += " else";
          } else {
            out_ += "\n";
            indent(depth);
            out_ += "else";
          }
          body(s.children[2], depth);
        }
        break;
      case NodeKind::While:
        out_ += "while (" + expr(s.children[0], 0, false) + ")";
        body(s.children[1], depth);
        break;
      default:
        throw PreconditionError("expression node in statement position");
    }
    out_ += "\n";
  }

  std::string out_;
};

}  // namespace detail

/// Renders a tree as source text; `parse(print(t))` reproduces `t`.
inline std::string print(const AstNode& root) { return detail::Printer{}.program(root); }

inline std::string print_expression(const AstNode& expr) {
  return detail::Printer::expr(expr, 0, false);
}

}  // namespace dirloc::lang
