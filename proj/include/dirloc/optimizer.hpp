#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dirloc/interpreter.hpp"
#include "dirloc/ir.hpp"
#include "dirloc/trace.hpp"
#include "dirloc/value.hpp"

namespace dirloc::jit {

/// Ids of the injectable bugs. Each one lives in exactly one optimizer function.
namespace bug_ids {
inline constexpr std::string_view kNegZeroFold = "negzero-fold";
inline constexpr std::string_view kNanCompareFold = "nan-compare-fold";
inline constexpr std::string_view kFloatStrengthReduction = "float-strength-reduction";
inline constexpr std::string_view kMinMaxSpecialize = "minmax-specialize";
inline constexpr std::string_view kModuloSignFold = "modulo-sign-fold";
}  // namespace bug_ids

namespace detail {

inline bool is_const(const Expr& e) { return e.op == Op::Const; }

inline bool const_is(const Expr& e, const Value& v) {
  return is_const(e) && identical(e.constant, v);
}

/// c == ±2^k with 1/c exactly representable as a normal double.
inline bool is_power_of_two(double c) {
  if (!std::isfinite(c) || c == 0.0) return false;
  int exp = 0;
  double mant = std::frexp(std::fabs(c), &exp);
  if (mant != 0.5) return false;
  double inv = 1.0 / c;
  return std::isfinite(inv) && std::fabs(inv) >= 2.2250738585072014e-308;
}

inline std::optional<std::int64_t> int_power_of_two(const Expr& e) {
  if (!is_const(e) || !is_int(e.constant)) return std::nullopt;
  auto m = std::get<std::int64_t>(e.constant);
  if (m < 2 || (m & (m - 1)) != 0) return std::nullopt;
  return m;
}

inline Op mirrored(Op op) {
  switch (op) {
    case Op::Lt: return Op::Gt;
    case Op::Le: return Op::Ge;
    case Op::Gt: return Op::Lt;
    case Op::Ge: return Op::Le;
    default: return op;
  }
}

/// Entity that re-types `parent` when one of its operands changed.
inline std::optional<std::string_view> retype_entity(const Expr& parent) {
  switch (parent.op) {
    case Op::Add: return "retype_add";
    case Op::Sub: return "retype_sub";
    case Op::Mul: return "retype_mul";
    case Op::Div: return "retype_div";
    case Op::Mod:
    case Op::BitAnd: return "retype_mod";
    case Op::Eq: return "retype_eq";
    case Op::Ne: return "retype_ne";
    case Op::Lt: return "retype_lt";
    case Op::Le: return "retype_le";
    case Op::Gt: return "retype_gt";
    case Op::Ge: return "retype_ge";
    case Op::And: return "retype_and";
    case Op::Or: return "retype_or";
    case Op::Neg: return "retype_neg";
    case Op::Plus: return "retype_plus";
    case Op::BitNot: return "retype_bitnot";
    case Op::Not: return "retype_not";
    case Op::NaiveMax: return "retype_max";
    case Op::NaiveMin: return "retype_min";
    case Op::Call: return "retype_call";
    case Op::Builtin:
      switch (parent.builtin) {
        case Builtin::Max: return "retype_max";
        case Builtin::Min: return "retype_min";
        case Builtin::Abs: return "retype_abs";
        case Builtin::Sqrt: return "retype_sqrt";
        case Builtin::Pow: return "retype_pow";
        case Builtin::Floor: return "retype_floor";
        case Builtin::Ceil: return "retype_ceil";
        case Builtin::Concat: return "retype_concat";
        case Builtin::Substring: return "retype_substring";
        case Builtin::Length: return "retype_length";
      }
      return std::nullopt;
    default: return std::nullopt;
  }
}

class Optimizer {
 public:
  Optimizer(Module& m, const Profile& profile, std::string_view active_bug, CoverageTrace& trace)
      : module_(m), profile_(profile), bug_(active_bug), trace_(trace) {}

  void run(bool profile_complete) {
    profile_complete_ = profile_complete;
    record_type_feedback();
    for (int iteration = 0; iteration < kMaxIterations; ++iteration) {
      changed_ = false;
      global_consts_ = constant_lets(module_.main, nullptr);
      for (auto& f : module_.functions) {
        local_consts_ = constant_lets(f.body, &f);
        current_ = &f;
        optimize_block(f.body);
      }
      current_ = nullptr;
      local_consts_.clear();
      optimize_block(module_.main);
      if (!changed_) break;
    }
  }

 private:
  static constexpr int kMaxIterations = 3;
  static constexpr int kMaxRewritesPerNode = 8;

  bool bug(std::string_view id) const { return bug_ == id; }
  void note(std::string_view entity) { trace_.record(entity); }

  TypeInfo type(const Expr& e) const {
    if (is_const(e)) return TypeInfo::of(e.constant);
    if (e.site >= 0 && static_cast<std::size_t>(e.site) < profile_.size()) {
      return profile_[static_cast<std::size_t>(e.site)];
    }
    return {};
  }

  void record_type_feedback() {
    bool any = false, minus_zero = false, nan = false;
    for (const auto& t : profile_) {
      any |= t.seen();
      minus_zero |= t.minus_zero;
      nan |= t.nan;
    }
    if (any) note("type_feedback");
    if (minus_zero) note("type_minus_zero");
    if (nan) note("type_nan");
  }

  // ---- constant lets -------------------------------------------------------

  static void count_defs(const std::vector<Stmt>& body, std::map<std::string, int>& defs,
                         std::map<std::string, const Stmt*>& last, const FunctionIR* fn,
                         bool globals_only) {
    for (const auto& s : body) {
      if (s.kind == Stmt::Kind::Let || s.kind == Stmt::Kind::Assign) {
        bool local = fn && fn->locals.count(s.name);
        if (!globals_only || !local) {
          ++defs[s.name];
          last[s.name] = &s;
        }
      }
      count_defs(s.body, defs, last, fn, globals_only);
      count_defs(s.orelse, defs, last, fn, globals_only);
    }
  }

  /// Variables with exactly one definition, a `let` of a constant. For a
  /// function scope only its locals qualify, and parameters never do.
  std::map<std::string, Value> constant_lets(const std::vector<Stmt>& body,
                                             const FunctionIR* fn) const {
    std::map<std::string, int> defs;
    std::map<std::string, const Stmt*> last;
    if (fn) {
      count_defs(body, defs, last, fn, false);
      for (const auto& p : fn->params) defs[p] += 2;
    } else {
      count_defs(body, defs, last, nullptr, false);
      for (const auto& f : module_.functions) count_defs(f.body, defs, last, &f, true);
    }
    std::map<std::string, Value> out;
    for (const auto& [name, n] : defs) {
      const Stmt* s = last[name];
      if (n == 1 && s && s->kind == Stmt::Kind::Let && is_const(s->expr)) {
        out.emplace(name, s->expr.constant);
      }
    }
    return out;
  }

  const Value* constant_for(const std::string& name) const {
    const auto& table = (current_ && current_->locals.count(name)) ? local_consts_ : global_consts_;
    auto it = table.find(name);
    return it == table.end() ? nullptr : &it->second;
  }

  // ---- statements ----------------------------------------------------------

  void optimize_block(std::vector<Stmt>& body) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      Stmt& s = body[i];
      switch (s.kind) {
        case Stmt::Kind::Let:
        case Stmt::Kind::Assign:
          if (optimize_expr(s.expr)) retype_uses(s.name);
          break;
        case Stmt::Kind::Return:
        case Stmt::Kind::Eval:
          optimize_expr(s.expr);
          break;
        case Stmt::Kind::If:
          optimize_expr(s.expr);
          optimize_block(s.body);
          optimize_block(s.orelse);
          if (is_const(s.expr) && is_bool(s.expr.constant)) {
            note("fold_branch_constant");
            std::vector<Stmt> taken =
                std::get<bool>(s.expr.constant) ? std::move(s.body) : std::move(s.orelse);
            body.erase(body.begin() + static_cast<std::ptrdiff_t>(i));
            body.insert(body.begin() + static_cast<std::ptrdiff_t>(i),
                        std::make_move_iterator(taken.begin()),
                        std::make_move_iterator(taken.end()));
            changed_ = true;
            --i;
            continue;
          }
          break;
        case Stmt::Kind::While:
          optimize_expr(s.expr);
          optimize_block(s.body);
          if (const_is(s.expr, Value{false})) {
            note("fold_loop_false");
            body.erase(body.begin() + static_cast<std::ptrdiff_t>(i));
            changed_ = true;
            --i;
            continue;
          }
          break;
      }
      if (s.kind == Stmt::Kind::Return && i + 1 < body.size()) {
        note("eliminate_dead_code");
        body.resize(i + 1);
        changed_ = true;
      }
    }
  }

  // After the defining expression of `name` was rewritten, every operator
  // that reads the variable is re-typed.
  void retype_uses(const std::string& name) {
    bool local = current_ && current_->locals.count(name);
    auto scan = [&](const std::vector<Stmt>& body) { scan_uses(body, name); };
    if (local) {
      scan(current_->body);
      return;
    }
    scan(module_.main);
    for (const auto& f : module_.functions) {
      if (!f.locals.count(name)) scan(f.body);
    }
  }

  void scan_uses(const std::vector<Stmt>& body, const std::string& name) {
    for (const auto& s : body) {
      scan_uses(s.expr, name);
      scan_uses(s.body, name);
      scan_uses(s.orelse, name);
    }
  }

  void scan_uses(const Expr& e, const std::string& name) {
    for (const auto& a : e.args) {
      if (a.op == Op::Var && a.name == name) {
        if (auto entity = retype_entity(e)) note(*entity);
      }
      scan_uses(a, name);
    }
  }

  // ---- expressions ---------------------------------------------------------

  /// Optimizes bottom-up; returns true when `e` itself was replaced.
  bool optimize_expr(Expr& e) {
    for (auto& a : e.args) optimize_expr(a);
    bool rewritten = false;
    for (int round = 0; round < kMaxRewritesPerNode; ++round) {
      if (!reduce(e)) break;
      rewritten = true;
      changed_ = true;
    }
    return rewritten;
  }

  void replace(Expr& e, Expr with) { e = std::move(with); }

  Expr take_arg(Expr& e, std::size_t i) { return std::move(e.args[i]); }

  template <class F>
  std::optional<Value> try_eval(F&& f) {
    try {
      return f();
    } catch (const RuntimeError&) {
      return std::nullopt;
    }
  }

  bool reduce(Expr& e) {
    return propagate_constant(e) || fold_constant_unary(e) || fold_constant_binary(e) ||
           fold_logical_constant(e) || fold_not_not(e) || fold_constant_builtin(e) ||
           canonicalize_compare(e) || fold_add_zero(e) || fold_add_negzero(e) ||
           fold_mul_identity(e) || fold_compare_self(e) || fold_relational_self(e) ||
           reduce_mul_to_add(e) || reduce_div_pow2(e) || reduce_div_to_mul(e) ||
           reduce_mod_nonneg(e) || fold_mod_power_of_two(e) || specialize_minmax_fast(e) ||
           specialize_math_minmax(e) || specialize_math_unary(e) || specialize_math_pow(e) ||
           specialize_string_builtin(e);
  }

  bool propagate_constant(Expr& e) {
    if (e.op != Op::Var || !profile_complete_ || !type(e).seen()) return false;
    const Value* v = constant_for(e.name);
    if (!v) return false;
    note("propagate_constant");
    replace(e, Expr::make_const(*v, e.site));
    return true;
  }

  bool fold_constant_unary(Expr& e) {
    if (!is_unary(e.op) || !is_const(e.args[0])) return false;
    note("fold_constant_unary");
    auto v = try_eval([&] { return ops::unary(e.op, e.args[0].constant); });
    if (!v) return false;
    replace(e, Expr::make_const(*v, e.site));
    return true;
  }

  bool fold_constant_binary(Expr& e) {
    if (!(is_arith(e.op) || is_compare(e.op)) || !is_const(e.args[0]) || !is_const(e.args[1])) {
      return false;
    }
    note("fold_constant_binary");
    auto v = try_eval([&] { return ops::binary(e.op, e.args[0].constant, e.args[1].constant); });
    if (!v) return false;
    replace(e, Expr::make_const(*v, e.site));
    return true;
  }

  bool fold_logical_constant(Expr& e) {
    if (!is_logical(e.op)) return false;
    const Expr& l = e.args[0];
    const Expr& r = e.args[1];
    bool is_and = e.op == Op::And;
    if (is_const(l) && is_bool(l.constant)) {
      note("fold_logical_constant");
      bool lv = std::get<bool>(l.constant);
      if (lv != is_and) {
        // false && _ , true || _
        replace(e, Expr::make_const(lv, e.site));
        return true;
      }
      if (!type(r).only(TypeInfo::kBool)) return false;
      replace(e, take_arg(e, 1));
      return true;
    }
    if (is_const(r) && is_bool(r.constant)) {
      note("fold_logical_constant");
      // e && true, e || false
      if (std::get<bool>(r.constant) == is_and && type(l).only(TypeInfo::kBool)) {
        replace(e, take_arg(e, 0));
        return true;
      }
    }
    return false;
  }

  bool fold_not_not(Expr& e) {
    if (e.op != Op::Not || e.args[0].op != Op::Not) return false;
    note("fold_not_not");
    if (!type(e.args[0].args[0]).only(TypeInfo::kBool)) return false;
    Expr inner = std::move(e.args[0].args[0]);
    replace(e, std::move(inner));
    return true;
  }

  bool fold_constant_builtin(Expr& e) {
    if (e.op != Op::Builtin) return false;
    for (const auto& a : e.args) {
      if (!is_const(a)) return false;
    }
    note("fold_constant_builtin");
    std::vector<Value> args;
    for (const auto& a : e.args) args.push_back(a.constant);
    auto v = try_eval([&] { return ops::builtin(e.builtin, args); });
    if (!v) return false;
    replace(e, Expr::make_const(*v, e.site));
    return true;
  }

  bool canonicalize_compare(Expr& e) {
    if (!is_compare(e.op) || !is_const(e.args[0]) || is_const(e.args[1])) return false;
    note("canonicalize_compare");
    e.op = mirrored(e.op);
    std::swap(e.args[0], e.args[1]);
    return true;
  }

  bool fold_add_zero(Expr& e) {
    if (e.op != Op::Add && e.op != Op::Sub) return false;
    const Expr& c = e.args[1];
    bool int_zero = const_is(c, Value{std::int64_t{0}});
    bool float_zero = const_is(c, Value{0.0});
    if (!int_zero && !float_zero) return false;
    note("fold_add_zero");
    TypeInfo t = type(e.args[0]);
    bool ok = int_zero ? t.only(TypeInfo::kInt)
                       : t.only(TypeInfo::kFloat) && (e.op == Op::Sub || !t.minus_zero);
    if (!ok) return false;
    replace(e, take_arg(e, 0));
    return true;
  }

  // x + (-0.0) is x for every float x, including -0.0.
  bool fold_add_negzero(Expr& e) {
    if (e.op != Op::Add || !const_is(e.args[1], Value{-0.0})) return false;
    TypeInfo t = type(e.args[0]);
    if (!t.only(TypeInfo::kFloat) || !t.minus_zero) return false;
    note("fold_add_negzero");
    if (bug(bug_ids::kNegZeroFold)) {
      e.args[1] = Expr::make_const(0.0);
      return true;
    }
    replace(e, take_arg(e, 0));
    return true;
  }

  bool fold_mul_identity(Expr& e) {
    if (e.op != Op::Mul && e.op != Op::Div) return false;
    const Expr& c = e.args[1];
    bool int_one = const_is(c, Value{std::int64_t{1}});
    bool float_one = const_is(c, Value{1.0});
    if (!int_one && !float_one) return false;
    note("fold_mul_identity");
    if (!type(e.args[0]).only(int_one ? TypeInfo::kInt : TypeInfo::kFloat)) return false;
    replace(e, take_arg(e, 0));
    return true;
  }

  static bool same_var(const Expr& e) {
    return e.args.size() == 2 && e.args[0].op == Op::Var && e.args[1].op == Op::Var &&
           e.args[0].name == e.args[1].name;
  }

  TypeInfo operand_type(const Expr& e) const {
    TypeInfo t = type(e.args[0]);
    t.join(type(e.args[1]));
    return t;
  }

  // v == v cannot be folded while v may hold NaN.
  bool fold_compare_self(Expr& e) {
    if (!is_equality(e.op) || !same_var(e)) return false;
    TypeInfo t = operand_type(e);
    if (!t.only(TypeInfo::kNumber) || !t.nan) return false;
    note("fold_compare_self");
    if (bug(bug_ids::kNanCompareFold)) {
      replace(e, Expr::make_const(e.op == Op::Eq, e.site));
      return true;
    }
    return false;
  }

  bool fold_relational_self(Expr& e) {
    if (!is_relational(e.op) || !same_var(e)) return false;
    TypeInfo t = operand_type(e);
    if (!t.only(TypeInfo::kNumber | TypeInfo::kString) || t.nan) return false;
    note("fold_relational_self");
    replace(e, Expr::make_const(e.op == Op::Le || e.op == Op::Ge, e.site));
    return true;
  }

  bool reduce_mul_to_add(Expr& e) {
    if (e.op != Op::Mul) return false;
    bool int_two = const_is(e.args[1], Value{std::int64_t{2}});
    bool float_two = const_is(e.args[1], Value{2.0});
    if (!int_two && !float_two) return false;
    note("reduce_mul_to_add");
    if (e.args[0].op != Op::Var || !type(e.args[0]).only(int_two ? TypeInfo::kInt : TypeInfo::kFloat)) {
      return false;
    }
    Expr x = take_arg(e, 0);
    Expr y = x;
    replace(e, Expr::make(Op::Add, {std::move(x), std::move(y)}, e.site));
    return true;
  }

  bool float_divisor(const Expr& e) const {
    return e.op == Op::Div && is_const(e.args[1]) && is_float(e.args[1].constant) &&
           type(e.args[0]).only(TypeInfo::kNumber);
  }

  bool reduce_div_pow2(Expr& e) {
    if (!float_divisor(e)) return false;
    double c = std::get<double>(e.args[1].constant);
    if (!is_power_of_two(c)) return false;
    note("reduce_div_pow2");
    e.op = Op::Mul;
    e.args[1] = Expr::make_const(1.0 / c);
    return true;
  }

  // Only a power-of-two divisor has a reciprocal that makes x * (1/c) exact.
  bool reduce_div_to_mul(Expr& e) {
    if (!float_divisor(e)) return false;
    double c = std::get<double>(e.args[1].constant);
    if (!std::isfinite(c) || c == 0.0 || is_power_of_two(c)) return false;
    note("reduce_div_to_mul");
    if (bug(bug_ids::kFloatStrengthReduction)) {
      // The faulty version keeps the reciprocal in single precision.
      e.op = Op::Mul;
      e.args[1] = Expr::make_const(static_cast<double>(static_cast<float>(1.0 / c)));
      return true;
    }
    return false;
  }

  bool reduce_mod_nonneg(Expr& e) {
    if (e.op != Op::Mod) return false;
    auto m = int_power_of_two(e.args[1]);
    TypeInfo t = type(e.args[0]);
    if (!m || !t.only(TypeInfo::kInt) || t.negative) return false;
    note("reduce_mod_nonneg");
    e.op = Op::BitAnd;
    e.args[1] = Expr::make_const(*m - 1);
    return true;
  }

  // The mask trick is only valid for non-negative dividends.
  bool fold_mod_power_of_two(Expr& e) {
    if (e.op != Op::Mod) return false;
    auto m = int_power_of_two(e.args[1]);
    TypeInfo t = type(e.args[0]);
    if (!m || !t.only(TypeInfo::kInt) || !t.negative) return false;
    note("fold_mod_power_of_two");
    if (bug(bug_ids::kModuloSignFold)) {
      e.op = Op::BitAnd;
      e.args[1] = Expr::make_const(*m - 1);
      return true;
    }
    return false;
  }

  bool is_minmax(const Expr& e) const {
    return e.op == Op::Builtin && (e.builtin == Builtin::Max || e.builtin == Builtin::Min);
  }

  // A compare-and-select gets the sign of zero wrong exactly when the first
  // operand may be the zero the builtin prefers and the second the other one.
  bool zero_hazard(const Expr& e) const {
    TypeInfo a = type(e.args[0]);
    TypeInfo b = type(e.args[1]);
    return e.builtin == Builtin::Max ? (a.plus_zero && b.minus_zero)
                                     : (a.minus_zero && b.plus_zero);
  }

  bool both_float_no_nan(const Expr& e) const {
    TypeInfo a = type(e.args[0]);
    TypeInfo b = type(e.args[1]);
    return a.only(TypeInfo::kFloat) && b.only(TypeInfo::kFloat) && !a.nan && !b.nan;
  }

  void to_select(Expr& e) {
    e.op = e.builtin == Builtin::Max ? Op::NaiveMax : Op::NaiveMin;
  }

  bool specialize_minmax_fast(Expr& e) {
    if (!is_minmax(e)) return false;
    bool ints = type(e.args[0]).only(TypeInfo::kInt) && type(e.args[1]).only(TypeInfo::kInt);
    if (!ints && !(both_float_no_nan(e) && !zero_hazard(e))) return false;
    note("specialize_minmax_fast");
    to_select(e);
    return true;
  }

  bool specialize_math_minmax(Expr& e) {
    if (!is_minmax(e) || !both_float_no_nan(e) || !zero_hazard(e)) return false;
    note("specialize_math_minmax");
    if (bug(bug_ids::kMinMaxSpecialize)) {
      to_select(e);
      return true;
    }
    return false;
  }

  bool specialize_math_unary(Expr& e) {
    if (e.op != Op::Builtin) return false;
    if (e.builtin != Builtin::Floor && e.builtin != Builtin::Ceil && e.builtin != Builtin::Abs) {
      return false;
    }
    TypeInfo t = type(e.args[0]);
    bool identity = false;
    if (e.builtin == Builtin::Abs) {
      identity = (t.only(TypeInfo::kInt) || (t.only(TypeInfo::kFloat) && !t.minus_zero)) &&
                 !t.negative;
    } else {
      identity = t.only(TypeInfo::kInt);
    }
    if (!identity) return false;
    note("specialize_math_unary");
    replace(e, take_arg(e, 0));
    return true;
  }

  bool specialize_math_pow(Expr& e) {
    if (e.op != Op::Builtin || e.builtin != Builtin::Pow) return false;
    if (!const_is(e.args[1], Value{1.0}) || !type(e.args[0]).only(TypeInfo::kFloat)) return false;
    note("specialize_math_pow");
    replace(e, take_arg(e, 0));
    return true;
  }

  bool specialize_string_builtin(Expr& e) {
    if (e.op != Op::Builtin) return false;
    if (e.builtin == Builtin::Concat && type(e.args[0]).only(TypeInfo::kString) &&
        type(e.args[1]).only(TypeInfo::kString)) {
      note("specialize_string_builtin");
      e.op = Op::Add;
      return true;
    }
    if (e.builtin == Builtin::Substring && const_is(e.args[1], Value{std::int64_t{0}}) &&
        type(e.args[0]).only(TypeInfo::kString)) {
      note("specialize_string_builtin");
      replace(e, take_arg(e, 0));
      return true;
    }
    return false;
  }

  Module& module_;
  const Profile& profile_;
  std::string bug_;
  CoverageTrace& trace_;
  bool profile_complete_ = false;
  bool changed_ = false;
  const FunctionIR* current_ = nullptr;
  std::map<std::string, Value> global_consts_;
  std::map<std::string, Value> local_consts_;
};

}  // namespace detail

/// Rewrites `m` in place using the type feedback in `profile`. `active_bug`
/// names the injected fault, or is empty for the correct optimizer.
inline void optimize(Module& m, const Profile& profile, std::string_view active_bug,
                     CoverageTrace& trace, bool profile_complete) {
  detail::Optimizer(m, profile, active_bug, trace).run(profile_complete);
}

}  // namespace dirloc::jit
