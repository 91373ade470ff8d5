#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dirloc::lang {

enum class NodeKind {
  Block,
  Function,
  Param,
  Let,
  Assign,
  If,
  While,
  Return,
  ExprStmt,
  BinaryOp,
  UnaryOp,
  Call,
  BuiltinRef,
  Identifier,
  NumberLit,
  StringLit,
  BoolLit,
};

inline std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Block: return "Block";
    case NodeKind::Function: return "Function";
    case NodeKind::Param: return "Param";
    case NodeKind::Let: return "Let";
    case NodeKind::Assign: return "Assign";
    case NodeKind::If: return "If";
    case NodeKind::While: return "While";
    case NodeKind::Return: return "Return";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::BinaryOp: return "BinaryOp";
    case NodeKind::UnaryOp: return "UnaryOp";
    case NodeKind::Call: return "Call";
    case NodeKind::BuiltinRef: return "BuiltinRef";
    case NodeKind::Identifier: return "Identifier";
    case NodeKind::NumberLit: return "NumberLit";
    case NodeKind::StringLit: return "StringLit";
    case NodeKind::BoolLit: return "BoolLit";
  }
  return "?";
}

/// Literal, operator, builtin or name carried by a node.
///
/// NumberLit holds `std::int64_t` for integer literals and `double` for float
/// literals, so the two stay distinguishable after mutation.  Operators,
/// builtin names, identifiers and string literals are all `std::string`; the
/// node kind tells them apart.
using Payload = std::variant<std::monostate, std::string, std::int64_t, double, bool>;

/// Bitwise payload equality: `-0.0` and `0.0` are different payloads.
inline bool same_payload(const Payload& a, const Payload& b) {
  if (a.index() != b.index()) return false;
  if (const auto* da = std::get_if<double>(&a)) {
    return std::bit_cast<std::uint64_t>(*da) ==
           std::bit_cast<std::uint64_t>(std::get<double>(b));
  }
  return a == b;
}

struct AstNode {
  int id = 0;
  NodeKind kind = NodeKind::Block;
  Payload value;
  std::vector<AstNode> children;

  AstNode() = default;
  AstNode(NodeKind k, Payload v = {}, std::vector<AstNode> c = {})
      : kind(k), value(std::move(v)), children(std::move(c)) {}

  const std::string& text() const { return std::get<std::string>(value); }
};

/// Structural equality including ids.
inline bool operator==(const AstNode& a, const AstNode& b) {
  if (a.id != b.id || a.kind != b.kind || !same_payload(a.value, b.value) ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!(a.children[i] == b.children[i])) return false;
  }
  return true;
}

inline int size(const AstNode& node) {
  int n = 1;
  for (const auto& c : node.children) n += size(c);
  return n;
}

namespace detail {
inline int renumber_from(AstNode& node, int next) {
  node.id = next++;
  for (auto& c : node.children) next = renumber_from(c, next);
  return next;
}
}  // namespace detail

/// Assigns 1-based pre-order ids in place.
inline void renumber_in_place(AstNode& root) { detail::renumber_from(root, 1); }

inline AstNode renumber(AstNode root) {
  renumber_in_place(root);
  return root;
}

/// Pre-order visit; the callback receives each node once.
inline void walk(const AstNode& node, const std::function<void(const AstNode&)>& fn) {
  fn(node);
  for (const auto& c : node.children) walk(c, fn);
}

inline void walk_mut(AstNode& node, const std::function<void(AstNode&)>& fn) {
  fn(node);
  for (auto& c : node.children) walk_mut(c, fn);
}

/// Returns the node with the given pre-order id, or nullptr.
inline const AstNode* find_node(const AstNode& root, int id) {
  if (root.id == id) return &root;
  for (const auto& c : root.children) {
    if (c.id > id) break;
    if (const auto* hit = find_node(c, id)) return hit;
  }
  return nullptr;
}

inline AstNode* find_node(AstNode& root, int id) {
  return const_cast<AstNode*>(find_node(static_cast<const AstNode&>(root), id));
}

inline nlohmann::ordered_json payload_to_json(const Payload& p) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      p);
}

/// JSON dump with a stable `{id, kind, value, children}` field order.
inline nlohmann::ordered_json to_json(const AstNode& node) {
  nlohmann::ordered_json j;
  j["id"] = node.id;
  j["kind"] = std::string(to_string(node.kind));
  j["value"] = payload_to_json(node.value);
  auto children = nlohmann::ordered_json::array();
  for (const auto& c : node.children) children.push_back(to_json(c));
  j["children"] = std::move(children);
  return j;
}

}  // namespace dirloc::lang
