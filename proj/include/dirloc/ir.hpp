#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dirloc/ast.hpp"
#include "dirloc/errors.hpp"
#include "dirloc/trace.hpp"
#include "dirloc/value.hpp"

namespace dirloc::jit {

/// Expression graph node. `site` identifies the node for type feedback; nodes
/// the optimizer synthesizes inherit the site of the node they replace, or
/// carry -1 when they are constants.
struct Expr {
  Op op = Op::Const;
  Value constant;
  std::string name;
  Builtin builtin = Builtin::Max;
  std::vector<Expr> args;
  int site = -1;

  static Expr make_const(Value v, int site = -1) {
    Expr e;
    e.op = Op::Const;
    e.constant = std::move(v);
    e.site = site;
    return e;
  }

  static Expr make(Op op, std::vector<Expr> args, int site) {
    Expr e;
    e.op = op;
    e.args = std::move(args);
    e.site = site;
    return e;
  }
};

struct Stmt {
  enum class Kind { Let, Assign, If, While, Return, Eval };
  Kind kind = Kind::Eval;
  std::string name;
  Expr expr;
  std::vector<Stmt> body;
  std::vector<Stmt> orelse;
};

struct FunctionIR {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;
  std::set<std::string> locals;
};

struct Module {
  std::vector<FunctionIR> functions;
  std::vector<Stmt> main;
  int sites = 0;

  const FunctionIR* find(std::string_view name) const {
    for (const auto& f : functions) {
      if (f.name == name) return &f;
    }
    return nullptr;
  }
};

inline bool is_arith(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Mod;
}
inline bool is_equality(Op op) { return op == Op::Eq || op == Op::Ne; }
inline bool is_relational(Op op) {
  return op == Op::Lt || op == Op::Le || op == Op::Gt || op == Op::Ge;
}
inline bool is_compare(Op op) { return is_equality(op) || is_relational(op); }
inline bool is_logical(Op op) { return op == Op::And || op == Op::Or; }
inline bool is_unary(Op op) {
  return op == Op::Neg || op == Op::Plus || op == Op::BitNot || op == Op::Not;
}

inline Op binary_op(std::string_view s) {
  if (s == "+") return Op::Add;
  if (s == "-") return Op::Sub;
  if (s == "*") return Op::Mul;
  if (s == "/") return Op::Div;
  if (s == "%") return Op::Mod;
  if (s == "==") return Op::Eq;
  if (s == "!=") return Op::Ne;
  if (s == "<") return Op::Lt;
  if (s == "<=") return Op::Le;
  if (s == ">") return Op::Gt;
  if (s == ">=") return Op::Ge;
  if (s == "&&") return Op::And;
  if (s == "||") return Op::Or;
  throw PreconditionError("unknown binary operator '" + std::string(s) + "'");
}

inline Op unary_op(std::string_view s) {
  if (s == "+") return Op::Plus;
  if (s == "-") return Op::Neg;
  if (s == "~") return Op::BitNot;
  if (s == "!") return Op::Not;
  throw PreconditionError("unknown unary operator '" + std::string(s) + "'");
}

inline Builtin builtin_of(std::string_view s) {
  if (s == "Math.max") return Builtin::Max;
  if (s == "Math.min") return Builtin::Min;
  if (s == "Math.abs") return Builtin::Abs;
  if (s == "Math.sqrt") return Builtin::Sqrt;
  if (s == "Math.pow") return Builtin::Pow;
  if (s == "Math.floor") return Builtin::Floor;
  if (s == "Math.ceil") return Builtin::Ceil;
  if (s == "Str.concat") return Builtin::Concat;
  if (s == "Str.substring") return Builtin::Substring;
  if (s == "Str.length") return Builtin::Length;
  throw PreconditionError("unknown builtin '" + std::string(s) + "'");
}

namespace detail {

class Lowering {
 public:
  explicit Lowering(CoverageTrace* trace) : trace_(trace) {}

  Module run(const lang::AstNode& root) {
    Module m;
    std::vector<const lang::AstNode*> top;
    if (root.kind == lang::NodeKind::Block) {
      for (const auto& s : root.children) top.push_back(&s);
    } else {
      top.push_back(&root);
    }
    for (const auto* s : top) {
      if (s->kind == lang::NodeKind::Function) {
        FunctionIR f = function(*s);
        bool replaced = false;
        for (auto& existing : m.functions) {
          if (existing.name == f.name) {
            existing = f;
            replaced = true;
          }
        }
        if (!replaced) m.functions.push_back(std::move(f));
      } else {
        statement(*s, m.main);
      }
    }
    m.sites = next_site_;
    return m;
  }

 private:
  void note(std::string_view entity) {
    if (trace_) trace_->record(entity);
  }

  FunctionIR function(const lang::AstNode& fn) {
    note("build_function");
    FunctionIR f;
    f.name = fn.text();
    for (std::size_t i = 0; i + 1 < fn.children.size(); ++i) {
      f.params.push_back(fn.children[i].text());
      f.locals.insert(fn.children[i].text());
    }
    statement(fn.children.back(), f.body);
    collect_lets(f.body, f.locals);
    return f;
  }

  static void collect_lets(const std::vector<Stmt>& body, std::set<std::string>& out) {
    for (const auto& s : body) {
      if (s.kind == Stmt::Kind::Let) out.insert(s.name);
      collect_lets(s.body, out);
      collect_lets(s.orelse, out);
    }
  }

  void statement(const lang::AstNode& n, std::vector<Stmt>& out) {
    using lang::NodeKind;
    switch (n.kind) {
      case NodeKind::Block:
        for (const auto& c : n.children) statement(c, out);
        return;
      case NodeKind::Let:
      case NodeKind::Assign: {
        note("build_store");
        Stmt s;
        s.kind = n.kind == NodeKind::Let ? Stmt::Kind::Let : Stmt::Kind::Assign;
        s.name = n.text();
        s.expr = expr(n.children[0]);
        out.push_back(std::move(s));
        return;
      }
      case NodeKind::If: {
        note("build_control");
        Stmt s;
        s.kind = Stmt::Kind::If;
        s.expr = expr(n.children[0]);
        statement(n.children[1], s.body);
        if (n.children.size() == 3) statement(n.children[2], s.orelse);
        out.push_back(std::move(s));
        return;
      }
      case NodeKind::While: {
        note("build_control");
        Stmt s;
        s.kind = Stmt::Kind::While;
        s.expr = expr(n.children[0]);
        statement(n.children[1], s.body);
        out.push_back(std::move(s));
        return;
      }
      case NodeKind::Return: {
        Stmt s;
        s.kind = Stmt::Kind::Return;
        s.expr = expr(n.children[0]);
        out.push_back(std::move(s));
        return;
      }
      case NodeKind::ExprStmt: {
        Stmt s;
        s.kind = Stmt::Kind::Eval;
        s.expr = expr(n.children[0]);
        out.push_back(std::move(s));
        return;
      }
      default:
        throw PreconditionError("unexpected node in statement position");
    }
  }

  Expr expr(const lang::AstNode& n) {
    using lang::NodeKind;
    Expr e;
    e.site = next_site_++;
    switch (n.kind) {
      case NodeKind::NumberLit:
        if (const auto* i = std::get_if<std::int64_t>(&n.value)) {
          e.constant = *i;
        } else {
          e.constant = std::get<double>(n.value);
        }
        return e;
      case NodeKind::StringLit:
        e.constant = n.text();
        return e;
      case NodeKind::BoolLit:
        e.constant = std::get<bool>(n.value);
        return e;
      case NodeKind::Identifier:
        e.op = Op::Var;
        e.name = n.text();
        return e;
      case NodeKind::BinaryOp:
        e.op = binary_op(n.text());
        if (is_arith(e.op)) note("build_arith");
        if (is_compare(e.op)) note("build_compare");
        if (is_logical(e.op)) note("build_logical");
        e.args.push_back(expr(n.children[0]));
        e.args.push_back(expr(n.children[1]));
        return e;
      case NodeKind::UnaryOp:
        note("build_unary");
        e.op = unary_op(n.text());
        e.args.push_back(expr(n.children[0]));
        return e;
      case NodeKind::Call: {
        note("build_call");
        const auto& callee = n.children[0];
        if (callee.kind == NodeKind::BuiltinRef) {
          e.op = Op::Builtin;
          e.builtin = builtin_of(callee.text());
        } else {
          e.op = Op::Call;
          e.name = callee.text();
        }
        for (std::size_t i = 1; i < n.children.size(); ++i) e.args.push_back(expr(n.children[i]));
        return e;
      }
      default:
        throw PreconditionError("unexpected node in expression position");
    }
  }

  CoverageTrace* trace_;
  int next_site_ = 0;
};

}  // namespace detail

/// Lowers a parsed program to the expression graph both execution modes run.
/// Graph-building functions are recorded into `trace` when one is given.
inline Module lower(const lang::AstNode& root, CoverageTrace* trace = nullptr) {
  return detail::Lowering(trace).run(root);
}

}  // namespace dirloc::jit
