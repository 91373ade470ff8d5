#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dirloc::jit {

/// Every optimizer function the fixture can record, in pipeline order.
inline const std::vector<std::string>& all_entities() {
  static const std::vector<std::string> names = {
      // graph building
      "build_arith", "build_compare", "build_logical", "build_unary", "build_call",
      "build_control", "build_function", "build_store",
      // type feedback
      "type_feedback", "type_minus_zero", "type_nan",
      // constant folding
      "propagate_constant", "fold_constant_binary", "fold_constant_unary",
      "fold_constant_builtin", "fold_logical_constant", "fold_not_not",
      // algebraic simplification
      "fold_add_zero", "fold_add_negzero", "fold_mul_identity", "fold_compare_self",
      "fold_relational_self", "canonicalize_compare",
      // strength reduction
      "reduce_mul_to_add", "reduce_div_pow2", "reduce_div_to_mul", "reduce_mod_nonneg",
      "fold_mod_power_of_two",
      // builtin specialization
      "specialize_minmax_fast", "specialize_math_minmax", "specialize_math_unary",
      "specialize_math_pow", "specialize_string_builtin",
      // control flow
      "fold_branch_constant", "fold_loop_false", "eliminate_dead_code",
      // re-typing of the uses of a variable whose definition was rewritten
      "retype_add", "retype_sub", "retype_mul", "retype_div", "retype_mod", "retype_eq",
      "retype_ne", "retype_lt", "retype_le", "retype_gt", "retype_ge", "retype_and",
      "retype_or", "retype_neg", "retype_plus", "retype_bitnot", "retype_not", "retype_max",
      "retype_min", "retype_abs", "retype_sqrt", "retype_pow", "retype_floor", "retype_ceil",
      "retype_concat", "retype_substring", "retype_length", "retype_call",
  };
  return names;
}

/// Optimizer functions entered during one optimized run, with hit counts.
struct CoverageTrace {
  std::map<std::string, int> counts;

  void record(std::string_view entity) { ++counts[std::string(entity)]; }

  bool covers(const std::string& entity) const { return counts.count(entity) != 0; }

  std::set<std::string> entities() const {
    std::set<std::string> out;
    for (const auto& [name, n] : counts) out.insert(name);
    return out;
  }

  bool empty() const { return counts.empty(); }

  friend bool operator==(const CoverageTrace&, const CoverageTrace&) = default;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["entities"] = nlohmann::ordered_json::array();
    for (const auto& [name, n] : counts) j["entities"].push_back(name);
    j["counts"] = nlohmann::ordered_json::object();
    for (const auto& [name, n] : counts) j["counts"][name] = n;
    return j;
  }
};

}  // namespace dirloc::jit
