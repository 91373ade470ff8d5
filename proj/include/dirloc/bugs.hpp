#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dirloc/errors.hpp"
#include "dirloc/optimizer.hpp"

namespace dirloc::jit {

/// An injectable optimizer fault together with a program that exposes it.
struct Bug {
  std::string id;
  std::string ground_truth;  // optimizer function holding the fault
  std::string seed;          // mini-language source
  std::string summary;
};

inline const std::vector<Bug>& bug_registry() {
  static const std::vector<Bug> bugs = {
      {std::string(bug_ids::kNegZeroFold), "fold_add_negzero",
       R"(function f(x) {
  let y = x + -0.0;
  let a = y * 3.0;
  let b = Math.max(y, 0.5);
  let c = a < b;
  return y;
}
f((-0.0));
)",
       "x + -0.0 is rewritten to x + 0.0, turning a -0.0 result into 0.0"},
      {std::string(bug_ids::kNanCompareFold), "fold_compare_self",
       R"(function g(x, mode) {
  let n = Math.sqrt(x - 50.0) * 2.5;
  let same = false;
  if (mode == 1.0) {
    same = n == n;
  }
  let big = n > 1.5;
  let pick = same == big;
  let both = same && n < 3.0;
  return same;
}
g(1.0, 1.0);
)",
       "v == v is folded to true although v may be NaN"},
      {std::string(bug_ids::kFloatStrengthReduction), "reduce_div_to_mul",
       R"(function h(x, mode) {
  let q = 0.5;
  if (mode == 0.25) {
    q = (x + 4.1) / 10.0;
  }
  let r = q * 2.0;
  let s = Math.abs(q);
  return q;
}
h(3, 0.25);
)",
       "x / c is rewritten to x * (1 / c) for a divisor that is not a power of two"},
      {std::string(bug_ids::kMinMaxSpecialize), "specialize_math_minmax",
       R"(function m(a, b) {
  let hi = Math.max(a, b);
  let t = hi * 2.0;
  let u = hi - 1.0;
  return hi;
}
m(0.0, (-0.0));
)",
       "Math.max and Math.min become a compare-and-select that ignores the sign of zero"},
      {std::string(bug_ids::kModuloSignFold), "fold_mod_power_of_two",
       R"(function r(n, mode) {
  let p = 1;
  if (mode == 3.0) {
    p = (n - 3) % 8;
  }
  let e = p == 1;
  let c = p * 7;
  return p;
}
r((-2), 3.0);
)",
       "n % 2^k is rewritten to a bit mask even when n may be negative"},
  };
  return bugs;
}

inline const Bug& find_bug(std::string_view id) {
  for (const auto& b : bug_registry()) {
    if (b.id == id) return b;
  }
  throw UnknownBug(std::string(id));
}

/// Empty means "no bug"; anything else must be a registered id.
inline void require_known_bug(std::string_view id) {
  if (!id.empty()) find_bug(id);
}

}  // namespace dirloc::jit
