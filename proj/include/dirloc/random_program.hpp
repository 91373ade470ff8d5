#pragma once

#include <string>
#include <vector>

#include "dirloc/ast.hpp"
#include "dirloc/parser.hpp"
#include "dirloc/rng.hpp"

namespace dirloc::lang {

struct RandomProgramOptions {
  int max_functions = 3;
  int max_statements = 6;  // per block
  int max_depth = 3;       // expression nesting
};

namespace detail {

// Writes type-directed source text so that most programs run without a
// runtime error. Values are kept small and the expression shapes lean toward
// the patterns the optimizer rewrites (signed zeros, self comparisons,
// constant divisors, min/max).
class ProgramWriter {
 public:
  ProgramWriter(Rng& rng, const RandomProgramOptions& opt) : r_(rng), opt_(opt) {}

  std::string program() {
    std::string out;
    int functions = r_.between(1, opt_.max_functions);
    for (int f = 0; f < functions; ++f) out += function(f);
    std::vector<Var> globals;
    scope_ = &globals;
    int top = r_.between(1, 4);
    for (int i = 0; i < top; ++i) {
      if (r_.chance(1, 4)) {
        Type t = any_type();
        std::string name = fresh();
        out += "let " + name + " = " + expr(t, opt_.max_depth) + ";\n";
        globals.push_back({name, t});
        out += name + ";\n";
      } else {
        const auto& fn = r_.pick(fns_);
        out += call(fn, /*literal_args=*/true) + ";\n";
      }
    }
    return out;
  }

 private:
  enum class Type { Int, Float, Str, Bool };

  struct Var {
    std::string name;
    Type type;
  };

  struct Fn {
    std::string name;
    std::vector<Type> params;
    Type result;
  };

  Type any_type() {
    static const std::vector<Type> all = {Type::Int, Type::Float, Type::Float, Type::Str, Type::Bool};
    return r_.pick(all);
  }

  std::string fresh() { return "v" + std::to_string(counter_++); }

  std::string function(int index) {
    Fn fn;
    fn.name = "f" + std::to_string(index);
    int arity = r_.between(0, 3);
    std::vector<Var> locals;
    std::string params;
    for (int i = 0; i < arity; ++i) {
      Type t = any_type();
      fn.params.push_back(t);
      std::string name = "p" + std::to_string(i);
      locals.push_back({name, t});
      params += (i ? ", " : "") + name;
    }
    fn.result = any_type();
    result_ = fn.result;
    scope_ = &locals;
    loops_ = 0;
    std::string body = block(1, r_.between(1, opt_.max_statements));
    body += indent(1) + "return " + expr(fn.result, opt_.max_depth) + ";\n";
    fns_.push_back(fn);
    return "function " + fn.name + "(" + params + ") {\n" + body + "}\n";
  }

  static std::string indent(int depth) { return std::string(2 * static_cast<std::size_t>(depth), ' '); }

  // Variables declared inside a nested block go out of scope when it closes.
  std::string nested(int depth) {
    auto saved = scope_->size();
    std::string body = block(depth, r_.between(1, 3));
    scope_->resize(saved);
    return body;
  }

  std::string block(int depth, int count) {
    std::string out;
    for (int i = 0; i < count; ++i) out += statement(depth);
    return out;
  }

  std::string statement(int depth) {
    std::string pad = indent(depth);
    int roll = static_cast<int>(r_.below(10));
    if (depth < 3 && roll == 0) {
      return pad + "if (" + expr(Type::Bool, 2) + ") {\n" + nested(depth + 1) + pad + "} else {\n" +
             nested(depth + 1) + pad + "}\n";
    }
    if (depth < 3 && roll == 1) {
      std::string cond = r_.chance(1, 2) ? "true" : "false";
      return pad + "if (" + cond + ") {\n" + nested(depth + 1) + pad + "}\n";
    }
    if (depth < 3 && roll == 2) {
      if (r_.chance(1, 2)) return pad + "while (false) {\n" + nested(depth + 1) + pad + "}\n";
      // Counted loop; the counter is never reassigned by the body.
      std::string i = "i" + std::to_string(loops_++);
      std::string bound = std::to_string(r_.between(1, 4));
      return pad + "let " + i + " = 0;\n" + pad + "while (" + i + " < " + bound + ") {\n" +
             nested(depth + 1) + indent(depth + 1) + i + " = " + i + " + 1;\n" + pad + "}\n";
    }
    if (depth < 3 && roll == 3 && r_.chance(1, 2)) {
      // An early exit; under a constant condition the statements after it die.
      std::string cond = r_.chance(1, 2) ? "true" : expr(Type::Bool, 1);
      return pad + "if (" + cond + ") {\n" + indent(depth + 1) + "return " + expr(result_, 2) + ";\n" +
             pad + "}\n";
    }
    if (roll <= 4 && !scope_->empty()) {
      Var v = r_.pick(*scope_);
      if (v.name[0] == 'v') return pad + v.name + " = " + expr(v.type, opt_.max_depth) + ";\n";
    }
    Type t = any_type();
    std::string name = fresh();
    std::string line = pad + "let " + name + " = " + expr(t, opt_.max_depth) + ";\n";
    scope_->push_back({name, t});
    return line;
  }

  std::string var_of(Type t) {
    std::vector<std::string> names;
    for (const auto& v : *scope_) {
      if (v.type == t) names.push_back(v.name);
    }
    if (names.empty()) return {};
    return r_.pick(names);
  }

  std::string literal(Type t) {
    static const std::vector<std::string> ints = {"0", "1", "2", "3", "7", "8", "255", "(-1)", "(-5)"};
    static const std::vector<std::string> floats = {"0.0",  "(-0.0)", "0.5", "1.5",  "2.0",  "(-2.5)",
                                                    "10.0", "0.1",    "3.0", "1e10", "0.25", "(-1.0)"};
    static const std::vector<std::string> strings = {"\"\"", "\"a\"", "\"ab\"", "\"hello\"", "\"0\""};
    switch (t) {
      case Type::Int: return r_.pick(ints);
      case Type::Float: return r_.pick(floats);
      case Type::Str: return r_.pick(strings);
      case Type::Bool: return r_.chance(1, 2) ? "true" : "false";
    }
    return "0";
  }

  std::string leaf(Type t) {
    std::string v = var_of(t);
    if (!v.empty() && r_.chance(2, 3)) return v;
    return literal(t);
  }

  std::string call(const Fn& fn, bool literal_args) {
    std::string out = fn.name + "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
      if (i) out += ", ";
      out += literal_args ? literal(fn.params[i]) : expr(fn.params[i], 1);
    }
    return out + ")";
  }

  std::string expr(Type t, int depth) {
    if (depth <= 0 || r_.chance(1, 4)) return leaf(t);
    int d = depth - 1;
    auto sub = [&](Type u) { return expr(u, d); };
    if (!fns_.empty() && r_.chance(1, 12)) {
      std::vector<const Fn*> fitting;
      for (const auto& f : fns_) {
        if (f.result == t) fitting.push_back(&f);
      }
      if (!fitting.empty()) return call(*r_.pick(fitting), false);
    }
    switch (t) {
      case Type::Int: {
        static const std::vector<std::string> divisors = {"1", "2", "3", "4", "8", "(-3)", "7"};
        switch (r_.below(9)) {
          case 0: return "(" + sub(Type::Int) + " + " + sub(Type::Int) + ")";
          case 1: return "(" + sub(Type::Int) + " - " + sub(Type::Int) + ")";
          case 2: return "(" + leaf(Type::Int) + " * " + literal(Type::Int) + ")";
          case 3: return "(" + sub(Type::Int) + " / " + r_.pick(divisors) + ")";
          case 4: return "(" + sub(Type::Int) + " % " + r_.pick(divisors) + ")";
          case 5: return (r_.chance(1, 2) ? "-" : "~") + leaf(Type::Int);
          case 6: return "Str.length(" + sub(Type::Str) + ")";
          case 7: return std::string(r_.chance(1, 2) ? "Math.max(" : "Math.min(") + sub(Type::Int) + ", " +
                         sub(Type::Int) + ")";
          default: return std::string(r_.chance(1, 2) ? "Math.abs(" : "Math.floor(") + sub(Type::Int) + ")";
        }
      }
      case Type::Float: {
        static const std::vector<std::string> ops = {" + ", " - ", " * ", " / ", " % "};
        static const std::vector<std::string> unary = {"Math.abs(", "Math.sqrt(", "Math.floor(", "Math.ceil("};
        static const std::vector<std::string> divisors = {"10.0", "4.0", "0.5", "3.0", "(-2.0)"};
        switch (r_.below(10)) {
          case 0:
          case 1: return "(" + sub(Type::Float) + r_.pick(ops) + sub(Type::Float) + ")";
          case 2: return "(" + sub(Type::Float) + r_.pick(ops) + sub(Type::Int) + ")";
          case 3: return "(" + sub(Type::Float) + (r_.chance(1, 2) ? " + -0.0)" : " + 0.0)");
          case 4: return "(" + sub(Type::Float) + (r_.chance(1, 2) ? " * 1.0)" : " * 2.0)");
          case 5: return "(" + sub(Type::Float) + " / " + r_.pick(divisors) + ")";
          case 6: return r_.pick(unary) + sub(Type::Float) + ")";
          case 7: return "Math.pow(" + sub(Type::Float) + ", " + sub(Type::Float) + ")";
          case 8: return std::string(r_.chance(1, 2) ? "Math.max(" : "Math.min(") + sub(Type::Float) + ", " +
                         sub(Type::Float) + ")";
          default: return (r_.chance(1, 2) ? "-" : "+") + leaf(Type::Float);
        }
      }
      case Type::Bool: {
        static const std::vector<std::string> cmp = {" < ", " <= ", " > ", " >= ", " == ", " != "};
        switch (r_.below(8)) {
          case 0: return "(" + sub(Type::Float) + r_.pick(cmp) + sub(Type::Float) + ")";
          case 1: return "(" + sub(Type::Int) + r_.pick(cmp) + sub(Type::Int) + ")";
          case 2: {
            std::string v = var_of(r_.chance(1, 2) ? Type::Float : Type::Int);
            if (v.empty()) return leaf(Type::Bool);
            return "(" + v + r_.pick(cmp) + v + ")";
          }
          case 3: return "(" + sub(Type::Bool) + " && " + sub(Type::Bool) + ")";
          case 4: return "(" + sub(Type::Bool) + " || " + sub(Type::Bool) + ")";
          case 5: return (r_.chance(1, 2) ? "!" : "!!") + leaf(Type::Bool);
          case 6: return "(" + sub(Type::Str) + (r_.chance(1, 2) ? " == " : " < ") + sub(Type::Str) + ")";
          default: return leaf(Type::Bool);
        }
      }
      case Type::Str: {
        switch (r_.below(5)) {
          case 0: return "(" + sub(Type::Str) + " + " + sub(Type::Str) + ")";
          case 1: return "(" + sub(Type::Str) + " + " + sub(r_.chance(1, 2) ? Type::Int : Type::Float) + ")";
          case 2: return "Str.concat(" + sub(Type::Str) + ", " + sub(Type::Str) + ")";
          case 3: return "Str.substring(" + sub(Type::Str) + ", " + sub(Type::Int) + ")";
          default: return leaf(Type::Str);
        }
      }
    }
    return leaf(t);
  }

  Rng& r_;
  RandomProgramOptions opt_;
  std::vector<Fn> fns_;
  std::vector<Var>* scope_ = nullptr;
  Type result_ = Type::Int;
  int counter_ = 0;
  int loops_ = 0;
};

}  // namespace detail

/// Source text of a random, well-typed program: a few functions followed by
/// top-level calls with literal arguments.
inline std::string random_source(Rng& rng, const RandomProgramOptions& options = {}) {
  return detail::ProgramWriter(rng, options).program();
}

inline AstNode random_program(Rng& rng, const RandomProgramOptions& options = {}) {
  return parse(random_source(rng, options));
}

}  // namespace dirloc::lang
