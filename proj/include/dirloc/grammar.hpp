#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace dirloc::lang {

inline constexpr std::array<std::string_view, 13> kBinaryOperators = {
    "+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||"};

inline constexpr std::array<std::string_view, 4> kUnaryOperators = {"+", "-", "~", "!"};

struct BuiltinInfo {
  std::string_view name;
  int arity;
};

inline constexpr std::array<BuiltinInfo, 10> kBuiltins = {{
    {"Math.max", 2},
    {"Math.min", 2},
    {"Math.abs", 1},
    {"Math.sqrt", 1},
    {"Math.pow", 2},
    {"Math.floor", 1},
    {"Math.ceil", 1},
    {"Str.concat", 2},
    {"Str.substring", 2},
    {"Str.length", 1},
}};

inline std::optional<BuiltinInfo> find_builtin(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return b;
  }
  return std::nullopt;
}

/// Binding power used by both the parser and the printer; higher binds tighter.
inline int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  return 0;
}

inline constexpr int kUnaryPrecedence = 7;

}  // namespace dirloc::lang
