#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dirloc/ast.hpp"
#include "dirloc/errors.hpp"
#include "dirloc/rng.hpp"

namespace dirloc::mutation {

using lang::AstNode;
using lang::NodeKind;
using lang::Payload;

/// Interchangeable payloads for one syntactic slot.
struct RuleGroup {
  std::string name;
  NodeKind kind;
  std::vector<Payload> members;
};

namespace detail {

inline std::vector<Payload> strings(std::initializer_list<const char*> items) {
  std::vector<Payload> out;
  for (const char* s : items) out.emplace_back(std::string(s));
  return out;
}

inline bool contains(const std::vector<Payload>& pool, const Payload& p) {
  for (const auto& m : pool) {
    if (lang::same_payload(m, p)) return true;
  }
  return false;
}

}  // namespace detail

/// The full replacement table. Groups never mix arities or result categories.
class RuleSet {
 public:
  explicit RuleSet(std::vector<RuleGroup> groups) : groups_(std::move(groups)) {}

  static RuleSet standard_table() {
    using detail::strings;
    std::vector<RuleGroup> g;
    g.push_back({"arith-binary", NodeKind::BinaryOp, strings({"+", "-", "*", "/", "%"})});
    g.push_back({"compare-binary", NodeKind::BinaryOp, strings({"==", "!=", "<", "<=", ">", ">="})});
    g.push_back({"logical-binary", NodeKind::BinaryOp, strings({"&&", "||"})});
    g.push_back({"numeric-unary", NodeKind::UnaryOp, strings({"+", "-", "~"})});
    g.push_back({"logical-unary", NodeKind::UnaryOp, strings({"!"})});
    g.push_back({"math-builtin-1arg", NodeKind::BuiltinRef,
                 strings({"Math.abs", "Math.sqrt", "Math.floor", "Math.ceil"})});
    g.push_back({"math-builtin-2arg", NodeKind::BuiltinRef,
                 strings({"Math.max", "Math.min", "Math.pow"})});
    g.push_back({"string-builtin-2arg", NodeKind::BuiltinRef,
                 strings({"Str.concat", "Str.substring"})});
    g.push_back({"string-builtin-1arg", NodeKind::BuiltinRef, strings({"Str.length"})});
    g.push_back({"int-value", NodeKind::NumberLit,
                 {std::int64_t{0}, std::int64_t{1}, std::int64_t{-1}, std::int64_t{2},
                  std::int64_t{7}, std::int64_t{255}, std::int64_t{2147483647},
                  std::int64_t{-2147483648LL}}});
    g.push_back({"float-value", NodeKind::NumberLit,
                 {0.0, -0.0, 0.5, 1.0, -1.0, 1.5, 2.0, -2.5, 3.0, 10.0, 0.3, 1e10, 0.25, -7.0, 100.0,
                  1e-300}});
    g.push_back({"string-value", NodeKind::StringLit, strings({"", "a", "ab", "hello", "0"})});
    g.push_back({"bool-value", NodeKind::BoolLit, {true, false}});
    return RuleSet(std::move(g));
  }

  static const RuleSet& standard() {
    static const RuleSet table = standard_table();
    return table;
  }

  const std::vector<RuleGroup>& groups() const { return groups_; }

  const RuleGroup& group(std::string_view name) const {
    for (const auto& g : groups_) {
      if (g.name == name) return g;
    }
    throw PreconditionError("unknown rule group '" + std::string(name) + "'");
  }

  /// Copy with one value pool replaced; operator groups cannot be overridden.
  RuleSet with_pool(std::string_view name, std::vector<Payload> members) const {
    RuleSet copy = *this;
    for (auto& g : copy.groups_) {
      if (g.name != name) continue;
      if (!is_value_group(g)) throw PreconditionError("'" + g.name + "' is not a value group");
      for (const auto& m : members) {
        if (!payload_fits(g, m)) throw PreconditionError("pool member has the wrong type for " + g.name);
      }
      g.members = std::move(members);
      return copy;
    }
    throw PreconditionError("unknown rule group '" + std::string(name) + "'");
  }

  static bool is_value_group(const RuleGroup& g) {
    return g.kind == NodeKind::NumberLit || g.kind == NodeKind::StringLit ||
           g.kind == NodeKind::BoolLit;
  }

  /// Group whose rules apply to `node`, or nullptr for immutable node kinds.
  const RuleGroup* group_for(const AstNode& node) const {
    for (const auto& g : groups_) {
      if (g.kind != node.kind) continue;
      if (is_value_group(g)) {
        if (payload_fits(g, node.value)) return &g;
      } else if (detail::contains(g.members, node.value)) {
        return &g;
      }
    }
    return nullptr;
  }

  /// Members of the node's group other than its current payload.
  std::vector<Payload> replacements(const AstNode& node) const {
    std::vector<Payload> out;
    const RuleGroup* g = group_for(node);
    if (!g) return out;
    for (const auto& m : g->members) {
      if (!lang::same_payload(m, node.value)) out.push_back(m);
    }
    return out;
  }

  nlohmann::ordered_json to_json() const {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& g : groups_) {
      nlohmann::ordered_json j;
      j["name"] = g.name;
      j["kind"] = std::string(lang::to_string(g.kind));
      auto members = nlohmann::ordered_json::array();
      for (const auto& m : g.members) members.push_back(lang::payload_to_json(m));
      j["members"] = std::move(members);
      arr.push_back(std::move(j));
    }
    return arr;
  }

 private:
  static bool payload_fits(const RuleGroup& g, const Payload& p) {
    if (g.name == "int-value") return std::holds_alternative<std::int64_t>(p);
    if (g.name == "float-value") return std::holds_alternative<double>(p);
    if (g.kind == NodeKind::StringLit) return std::holds_alternative<std::string>(p);
    if (g.kind == NodeKind::BoolLit) return std::holds_alternative<bool>(p);
    return false;
  }

  std::vector<RuleGroup> groups_;
};

/// Replacement pool of a value group.
inline const std::vector<Payload>& value_pool(std::string_view group,
                                              const RuleSet& rules = RuleSet::standard()) {
  const RuleGroup& g = rules.group(group);
  if (!RuleSet::is_value_group(g)) throw PreconditionError("'" + g.name + "' is not a value group");
  return g.members;
}

inline bool mutable_node(const AstNode& node, const RuleSet& rules = RuleSet::standard()) {
  return !rules.replacements(node).empty();
}

/// Ids of every mutable node, in pre-order.
inline std::vector<int> mutable_ids(const AstNode& tree, const RuleSet& rules = RuleSet::standard()) {
  std::vector<int> ids;
  lang::walk(tree, [&](const AstNode& n) {
    if (mutable_node(n, rules)) ids.push_back(n.id);
  });
  return ids;
}

/// Replaces the payload of node `i` in place with a different member of its
/// group. Returns false when the node is immutable.
inline bool mutate_in_place(AstNode& tree, int i, Rng& rng,
                            const RuleSet& rules = RuleSet::standard()) {
  int n = lang::size(tree);
  if (i < 1 || i > n) throw IndexOutOfRange(i, n);
  AstNode* node = lang::find_node(tree, i);
  auto options = rules.replacements(*node);
  if (options.empty()) return false;
  node->value = options[rng.below(options.size())];
  return true;
}

inline AstNode mutate(const AstNode& tree, int i, Rng& rng,
                      const RuleSet& rules = RuleSet::standard()) {
  AstNode copy = tree;
  mutate_in_place(copy, i, rng, rules);
  return copy;
}

/// The stream used for mutating node `i` on a given attempt.
inline Rng node_stream(RngSeed seed, int i, std::uint64_t attempt) {
  return Rng(derive_seed(seed, {static_cast<std::uint64_t>(i), attempt}));
}

inline AstNode mutate(const AstNode& tree, int i, RngSeed seed, std::uint64_t attempt,
                      const RuleSet& rules = RuleSet::standard()) {
  Rng rng = node_stream(seed, i, attempt);
  return mutate(tree, i, rng, rules);
}

}  // namespace dirloc::mutation
