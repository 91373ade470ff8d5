#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dirloc::jit {

struct Undefined {
  friend bool operator==(Undefined, Undefined) { return true; }
};

/// Runtime value. Integers and floats are separate types: arithmetic on two
/// integers stays integral and traps on overflow, anything involving a float
/// is IEEE double arithmetic.
using Value = std::variant<Undefined, std::int64_t, double, std::string, bool>;

enum class ErrorKind {
  TypeError,
  ReferenceError,
  DivisionByZero,
  IntegerOverflow,
  ArityError,
  StackOverflow,
  StepLimit,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::ReferenceError: return "ReferenceError";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::IntegerOverflow: return "IntegerOverflow";
    case ErrorKind::ArityError: return "ArityError";
    case ErrorKind::StackOverflow: return "StackOverflow";
    case ErrorKind::StepLimit: return "StepLimit";
  }
  return "?";
}

/// An error raised by the program under evaluation, as opposed to a misuse of
/// the library. It ends the run and becomes part of the observable behavior.
class RuntimeError {
 public:
  RuntimeError(ErrorKind kind, std::string message) : kind_(kind), message_(std::move(message)) {}
  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] inline void type_error(const std::string& what) {
  throw RuntimeError(ErrorKind::TypeError, what);
}

enum class Op : std::uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Neg,
  Plus,
  BitNot,
  Not,
  Call,
  Builtin,
  NaiveMax,
  NaiveMin,
  BitAnd,
};

enum class Builtin : std::uint8_t { Max, Min, Abs, Sqrt, Pow, Floor, Ceil, Concat, Substring, Length };

inline bool is_int(const Value& v) { return std::holds_alternative<std::int64_t>(v); }
inline bool is_float(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_number(const Value& v) { return is_int(v) || is_float(v); }
inline bool is_string(const Value& v) { return std::holds_alternative<std::string>(v); }
inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }

inline double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

inline std::string_view type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "undefined";
    case 1: return "int";
    case 2: return "float";
    case 3: return "string";
    default: return "bool";
  }
}

/// Strict equality used for observables: same type, bit-identical floats, and
/// every NaN equal to every other NaN.
inline bool identical(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* da = std::get_if<double>(&a)) {
    double db = std::get<double>(b);
    if (std::isnan(*da) || std::isnan(db)) return std::isnan(*da) && std::isnan(db);
    return std::bit_cast<std::uint64_t>(*da) == std::bit_cast<std::uint64_t>(db);
  }
  return a == b;
}

inline std::string format_double(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d < 0 ? "-Infinity" : "Infinity";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, end);
}

/// The string a value turns into under `+` with a string operand.
inline std::string to_display(const Value& v) {
  switch (v.index()) {
    case 0: return "undefined";
    case 1: return std::to_string(std::get<std::int64_t>(v));
    case 2: {
      double d = std::get<double>(v);
      if (d == 0.0) return "0";
      if (std::isfinite(d) && d == std::trunc(d) && std::fabs(d) < 1e21) {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed);
        return std::string(buf, end);
      }
      return format_double(d);
    }
    case 3: return std::get<std::string>(v);
    default: return std::get<bool>(v) ? "true" : "false";
  }
}

/// Unambiguous rendering that keeps the type and the sign of zero.
inline std::string repr(const Value& v) {
  switch (v.index()) {
    case 0: return "undefined";
    case 1: return "int:" + std::to_string(std::get<std::int64_t>(v));
    case 2: return "float:" + format_double(std::get<double>(v));
    case 3: {
      std::string out = "string:\"";
      for (char c : std::get<std::string>(v)) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
    default: return std::string("bool:") + (std::get<bool>(v) ? "true" : "false");
  }
}

namespace ops {

inline std::int32_t to_int32(std::int64_t v) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v)));
}

inline std::int32_t to_int32(double d) {
  if (!std::isfinite(d)) return 0;
  double m = std::fmod(std::trunc(d), 4294967296.0);
  if (m < 0) m += 4294967296.0;
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(m));
}

[[noreturn]] inline void overflow() {
  throw RuntimeError(ErrorKind::IntegerOverflow, "integer overflow");
}

inline Value int_arith(Op op, std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  switch (op) {
    case Op::Add:
      if (__builtin_add_overflow(a, b, &r)) overflow();
      return r;
    case Op::Sub:
      if (__builtin_sub_overflow(a, b, &r)) overflow();
      return r;
    case Op::Mul:
      if (__builtin_mul_overflow(a, b, &r)) overflow();
      return r;
    case Op::Div:
      if (b == 0) throw RuntimeError(ErrorKind::DivisionByZero, "integer division by zero");
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow();
      return a / b;
    case Op::Mod:
      if (b == 0) throw RuntimeError(ErrorKind::DivisionByZero, "integer modulo by zero");
      if (b == -1) return std::int64_t{0};
      return a % b;
    default:
      break;
  }
  type_error("not an arithmetic operator");
}

inline Value float_arith(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Mod: return std::fmod(a, b);
    default: break;
  }
  type_error("not an arithmetic operator");
}

inline bool equal_values(const Value& a, const Value& b) {
  if (is_number(a) && is_number(b)) {
    if (is_int(a) && is_int(b)) return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
    return as_double(a) == as_double(b);
  }
  if (a.index() != b.index()) return false;
  return a == b;
}

inline Value relational(Op op, const Value& a, const Value& b) {
  int order = 0;
  if (is_number(a) && is_number(b)) {
    if (is_int(a) && is_int(b)) {
      auto x = std::get<std::int64_t>(a);
      auto y = std::get<std::int64_t>(b);
      order = x < y ? -1 : (x > y ? 1 : 0);
    } else {
      double x = as_double(a);
      double y = as_double(b);
      if (std::isnan(x) || std::isnan(y)) return false;
      order = x < y ? -1 : (x > y ? 1 : 0);
    }
  } else if (is_string(a) && is_string(b)) {
    int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    order = c < 0 ? -1 : (c > 0 ? 1 : 0);
  } else {
    type_error(std::string("cannot order ") + std::string(type_name(a)) + " and " +
               std::string(type_name(b)));
  }
  switch (op) {
    case Op::Lt: return order < 0;
    case Op::Le: return order <= 0;
    case Op::Gt: return order > 0;
    default: return order >= 0;
  }
}

/// Strict boolean operand check shared by `&&`, `||`, `!` and conditions.
inline bool truth(const Value& v) {
  if (!is_bool(v)) type_error(std::string("expected bool, got ") + std::string(type_name(v)));
  return std::get<bool>(v);
}

/// Every binary operator except the short-circuit ones.
inline Value binary(Op op, const Value& a, const Value& b) {
  switch (op) {
    case Op::Add:
      if (is_string(a) || is_string(b)) return to_display(a) + to_display(b);
      [[fallthrough]];
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Mod:
      if (!is_number(a) || !is_number(b)) {
        type_error(std::string("arithmetic on ") + std::string(type_name(a)) + " and " +
                   std::string(type_name(b)));
      }
      if (is_int(a) && is_int(b)) {
        return int_arith(op, std::get<std::int64_t>(a), std::get<std::int64_t>(b));
      }
      return float_arith(op, as_double(a), as_double(b));
    case Op::Eq: return equal_values(a, b);
    case Op::Ne: return !equal_values(a, b);
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
      return relational(op, a, b);
    case Op::And: return truth(a) && truth(b);
    case Op::Or: return truth(a) || truth(b);
    case Op::NaiveMax: return std::get<bool>(relational(Op::Gt, a, b)) ? a : b;
    case Op::NaiveMin: return std::get<bool>(relational(Op::Lt, a, b)) ? a : b;
    case Op::BitAnd:
      if (!is_int(a) || !is_int(b)) type_error("bitwise and needs integers");
      return std::get<std::int64_t>(a) & std::get<std::int64_t>(b);
    default:
      break;
  }
  type_error("not a binary operator");
}

inline Value unary(Op op, const Value& v) {
  switch (op) {
    case Op::Plus:
      if (!is_number(v)) type_error("unary + on " + std::string(type_name(v)));
      return v;
    case Op::Neg:
      if (const auto* i = std::get_if<std::int64_t>(&v)) {
        if (*i == std::numeric_limits<std::int64_t>::min()) overflow();
        return -*i;
      }
      if (const auto* d = std::get_if<double>(&v)) return -*d;
      type_error("unary - on " + std::string(type_name(v)));
    case Op::BitNot:
      if (const auto* i = std::get_if<std::int64_t>(&v)) return std::int64_t{~to_int32(*i)};
      if (const auto* d = std::get_if<double>(&v)) return std::int64_t{~to_int32(*d)};
      type_error("unary ~ on " + std::string(type_name(v)));
    case Op::Not:
      return !truth(v);
    default:
      break;
  }
  type_error("not a unary operator");
}

inline Value minmax(bool is_max, const Value& a, const Value& b) {
  if (!is_number(a) || !is_number(b)) type_error("Math.max/min need numbers");
  if (is_int(a) && is_int(b)) {
    auto x = std::get<std::int64_t>(a);
    auto y = std::get<std::int64_t>(b);
    return is_max ? std::max(x, y) : std::min(x, y);
  }
  double x = as_double(a);
  double y = as_double(b);
  if (std::isnan(x) || std::isnan(y)) return std::numeric_limits<double>::quiet_NaN();
  if (x == y && x == 0.0) {
    // Signed zeros: max prefers +0, min prefers -0.
    bool neg = is_max ? (std::signbit(x) && std::signbit(y)) : (std::signbit(x) || std::signbit(y));
    return neg ? -0.0 : 0.0;
  }
  if (is_max) return x > y ? x : y;
  return x < y ? x : y;
}

inline Value builtin(Builtin b, const std::vector<Value>& args) {
  auto arg = [&](std::size_t i) -> const Value& { return args.at(i); };
  switch (b) {
    case Builtin::Max: return minmax(true, arg(0), arg(1));
    case Builtin::Min: return minmax(false, arg(0), arg(1));
    case Builtin::Abs:
      if (const auto* i = std::get_if<std::int64_t>(&arg(0))) {
        if (*i == std::numeric_limits<std::int64_t>::min()) overflow();
        return *i < 0 ? -*i : *i;
      }
      if (const auto* d = std::get_if<double>(&arg(0))) return std::fabs(*d);
      type_error("Math.abs needs a number");
    case Builtin::Sqrt:
      if (!is_number(arg(0))) type_error("Math.sqrt needs a number");
      return std::sqrt(as_double(arg(0)));
    case Builtin::Pow:
      if (!is_number(arg(0)) || !is_number(arg(1))) type_error("Math.pow needs numbers");
      return std::pow(as_double(arg(0)), as_double(arg(1)));
    case Builtin::Floor:
    case Builtin::Ceil:
      if (is_int(arg(0))) return arg(0);
      if (const auto* d = std::get_if<double>(&arg(0))) {
        return b == Builtin::Floor ? std::floor(*d) : std::ceil(*d);
      }
      type_error("Math.floor/ceil need a number");
    case Builtin::Concat:
      if (!is_string(arg(0)) || !is_string(arg(1))) type_error("Str.concat needs strings");
      return std::get<std::string>(arg(0)) + std::get<std::string>(arg(1));
    case Builtin::Substring: {
      if (!is_string(arg(0)) || !is_int(arg(1))) type_error("Str.substring needs (string, int)");
      const auto& s = std::get<std::string>(arg(0));
      auto i = std::get<std::int64_t>(arg(1));
      auto n = static_cast<std::int64_t>(s.size());
      i = std::clamp<std::int64_t>(i, 0, n);
      return s.substr(static_cast<std::size_t>(i));
    }
    case Builtin::Length:
      if (!is_string(arg(0))) type_error("Str.length needs a string");
      return static_cast<std::int64_t>(std::get<std::string>(arg(0)).size());
  }
  type_error("unknown builtin");
}

}  // namespace ops

}  // namespace dirloc::jit
