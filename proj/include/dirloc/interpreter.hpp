#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirloc/ir.hpp"
#include "dirloc/value.hpp"

namespace dirloc::jit {

/// Union of the runtime values seen at one graph node.
struct TypeInfo {
  enum : std::uint8_t { kUndefined = 1, kInt = 2, kFloat = 4, kString = 8, kBool = 16 };
  static constexpr std::uint8_t kNumber = kInt | kFloat;

  std::uint8_t kinds = 0;
  bool minus_zero = false;
  bool plus_zero = false;
  bool nan = false;
  bool negative = false;

  static TypeInfo of(const Value& v) {
    TypeInfo t;
    t.add(v);
    return t;
  }

  void add(const Value& v) {
    switch (v.index()) {
      case 0: kinds |= kUndefined; break;
      case 1:
        kinds |= kInt;
        if (std::get<std::int64_t>(v) < 0) negative = true;
        break;
      case 2: {
        kinds |= kFloat;
        double d = std::get<double>(v);
        if (std::isnan(d)) nan = true;
        if (d == 0.0) (std::signbit(d) ? minus_zero : plus_zero) = true;
        if (d < 0) negative = true;
        break;
      }
      case 3: kinds |= kString; break;
      default: kinds |= kBool; break;
    }
  }

  void join(const TypeInfo& o) {
    kinds |= o.kinds;
    minus_zero |= o.minus_zero;
    plus_zero |= o.plus_zero;
    nan |= o.nan;
    negative |= o.negative;
  }

  bool seen() const { return kinds != 0; }
  /// Non-empty and drawn only from `mask`.
  bool only(std::uint8_t mask) const { return kinds != 0 && (kinds & ~mask) == 0; }
};

using Profile = std::vector<TypeInfo>;

/// What a run exposes to the outside: the values of top-level expression
/// statements, in order, and how the run ended.
struct Observable {
  std::vector<Value> values;
  std::optional<ErrorKind> error;
  std::string error_message;

  bool ok() const { return !error; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["values"] = nlohmann::ordered_json::array();
    for (const auto& v : values) j["values"].push_back(repr(v));
    if (error) {
      j["termination"] = "error";
      j["error"] = std::string(to_string(*error));
      j["message"] = error_message;
    } else {
      j["termination"] = "normal";
    }
    return j;
  }
};

/// Bit-exact behavioral equality; error messages are not compared.
inline bool same_behavior(const Observable& a, const Observable& b) {
  if (a.error != b.error || a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (!identical(a.values[i], b.values[i])) return false;
  }
  return true;
}

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000;
inline constexpr int kMaxCallDepth = 100;

namespace detail {

class Machine {
 public:
  Machine(const Module& m, std::uint64_t budget, Profile* profile)
      : module_(m), budget_(budget), profile_(profile) {
    if (profile_) profile_->assign(static_cast<std::size_t>(m.sites), TypeInfo{});
  }

  Observable run() {
    Observable obs;
    try {
      for (const auto& s : module_.main) {
        if (s.kind == Stmt::Kind::Eval) {
          tick();
          obs.values.push_back(eval(s.expr));
        } else {
          exec(s);
        }
      }
    } catch (const RuntimeError& e) {
      obs.error = e.kind();
      obs.error_message = e.message();
    }
    return obs;
  }

 private:
  enum class Flow { Next, Return };

  struct Frame {
    const FunctionIR* fn;
    std::map<std::string, Value> vars;
  };

  void tick() {
    if (++steps_ > budget_) throw RuntimeError(ErrorKind::StepLimit, "step budget exhausted");
  }

  bool is_local(const std::string& name) const {
    return !frames_.empty() && frames_.back().fn->locals.count(name) != 0;
  }

  Value* slot(const std::string& name) {
    auto& vars = is_local(name) ? frames_.back().vars : globals_;
    auto it = vars.find(name);
    return it == vars.end() ? nullptr : &it->second;
  }

  void define(const std::string& name, Value v) {
    (frames_.empty() ? globals_ : frames_.back().vars)[name] = std::move(v);
  }

  Flow exec_list(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      if (exec(s) == Flow::Return) return Flow::Return;
    }
    return Flow::Next;
  }

  Flow exec(const Stmt& s) {
    tick();
    switch (s.kind) {
      case Stmt::Kind::Let:
        define(s.name, eval(s.expr));
        return Flow::Next;
      case Stmt::Kind::Assign: {
        Value v = eval(s.expr);
        Value* target = slot(s.name);
        if (!target) throw RuntimeError(ErrorKind::ReferenceError, s.name + " is not defined");
        *target = std::move(v);
        return Flow::Next;
      }
      case Stmt::Kind::If:
        return exec_list(ops::truth(eval(s.expr)) ? s.body : s.orelse);
      case Stmt::Kind::While:
        while (ops::truth(eval(s.expr))) {
          if (exec_list(s.body) == Flow::Return) return Flow::Return;
          tick();
        }
        return Flow::Next;
      case Stmt::Kind::Return:
        returned_ = eval(s.expr);
        return Flow::Return;
      case Stmt::Kind::Eval:
        eval(s.expr);
        return Flow::Next;
    }
    return Flow::Next;
  }

  Value call(const Expr& e) {
    const FunctionIR* fn = module_.find(e.name);
    if (!fn) throw RuntimeError(ErrorKind::ReferenceError, e.name + " is not a function");
    if (fn->params.size() != e.args.size()) {
      throw RuntimeError(ErrorKind::ArityError, e.name + " expects " +
                                                    std::to_string(fn->params.size()) +
                                                    " argument(s)");
    }
    Frame frame{fn, {}};
    for (std::size_t i = 0; i < e.args.size(); ++i) frame.vars[fn->params[i]] = eval(e.args[i]);
    if (static_cast<int>(frames_.size()) >= kMaxCallDepth) {
      throw RuntimeError(ErrorKind::StackOverflow, "call depth exceeded");
    }
    frames_.push_back(std::move(frame));
    returned_ = Undefined{};
    exec_list(fn->body);
    frames_.pop_back();
    Value out = std::move(returned_);
    returned_ = Undefined{};
    return out;
  }

  Value eval(const Expr& e) {
    tick();
    Value v = eval_node(e);
    if (profile_ && e.site >= 0) (*profile_)[static_cast<std::size_t>(e.site)].add(v);
    return v;
  }

  Value eval_node(const Expr& e) {
    switch (e.op) {
      case Op::Const:
        return e.constant;
      case Op::Var: {
        Value* v = slot(e.name);
        if (!v) throw RuntimeError(ErrorKind::ReferenceError, e.name + " is not defined");
        return *v;
      }
      case Op::And:
      case Op::Or: {
        bool left = ops::truth(eval(e.args[0]));
        if (e.op == Op::And && !left) return false;
        if (e.op == Op::Or && left) return true;
        return ops::truth(eval(e.args[1]));
      }
      case Op::Neg:
      case Op::Plus:
      case Op::BitNot:
      case Op::Not:
        return ops::unary(e.op, eval(e.args[0]));
      case Op::Call:
        return call(e);
      case Op::Builtin: {
        std::vector<Value> args;
        args.reserve(e.args.size());
        for (const auto& a : e.args) args.push_back(eval(a));
        return ops::builtin(e.builtin, args);
      }
      default: {
        Value a = eval(e.args[0]);
        Value b = eval(e.args[1]);
        return ops::binary(e.op, a, b);
      }
    }
  }

  const Module& module_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  Profile* profile_;
  std::map<std::string, Value> globals_;
  std::vector<Frame> frames_;
  Value returned_;
};

}  // namespace detail

/// Evaluates a module. When `profile` is given, it is resized to the module's
/// site count and filled with the values observed at every node.
inline Observable execute(const Module& m, std::uint64_t budget = kDefaultStepBudget,
                          Profile* profile = nullptr) {
  return detail::Machine(m, budget, profile).run();
}

}  // namespace dirloc::jit
