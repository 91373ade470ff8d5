#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "dirloc/ast.hpp"
#include "dirloc/errors.hpp"

namespace dirloc::align {

using lang::AstNode;

struct NodeLabel {
  lang::NodeKind kind;
  lang::Payload payload;

  friend bool operator==(const NodeLabel& a, const NodeLabel& b) {
    return a.kind == b.kind && lang::same_payload(a.payload, b.payload);
  }
};

struct LabeledNode {
  int id;
  NodeLabel label;
};

/// Pre-order (id, label) sequence of a numbered tree.
inline std::vector<LabeledNode> serialize(const AstNode& tree) {
  std::vector<LabeledNode> out;
  lang::walk(tree, [&](const AstNode& n) { out.push_back({n.id, {n.kind, n.value}}); });
  return out;
}

inline std::vector<NodeLabel> labels(const std::vector<LabeledNode>& seq) {
  std::vector<NodeLabel> out;
  out.reserve(seq.size());
  for (const auto& n : seq) out.push_back(n.label);
  return out;
}

struct AlignmentParams {
  int match_score = 2;
  int mismatch_penalty = -1;
  int gap_penalty = -2;

  void validate() const {
    if (match_score <= mismatch_penalty) {
      throw PreconditionError("match score must exceed mismatch penalty");
    }
    if (gap_penalty >= 0) throw PreconditionError("gap penalty must be negative");
  }
};

/// One alignment column; an empty side is a gap.
struct Column {
  std::optional<std::size_t> a;
  std::optional<std::size_t> b;
};

struct Alignment {
  std::vector<Column> columns;
  int score = 0;
};

/// Needleman-Wunsch global alignment. Traceback prefers the diagonal, then a
/// gap in `b` (up), then a gap in `a` (left), which makes ties deterministic.
template <class T, class Eq = std::equal_to<T>>
Alignment align(const std::vector<T>& a, const std::vector<T>& b,
                const AlignmentParams& p = {}, Eq eq = {}) {
  p.validate();
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<int>> h(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) h[i][0] = h[i - 1][0] + p.gap_penalty;
  for (std::size_t j = 1; j <= m; ++j) h[0][j] = h[0][j - 1] + p.gap_penalty;
  auto sub = [&](std::size_t i, std::size_t j) {
    return eq(a[i - 1], b[j - 1]) ? p.match_score : p.mismatch_penalty;
  };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      h[i][j] = std::max({h[i - 1][j - 1] + sub(i, j), h[i - 1][j] + p.gap_penalty,
                          h[i][j - 1] + p.gap_penalty});
    }
  }

  Alignment out;
  out.score = h[n][m];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && h[i][j] == h[i - 1][j - 1] + sub(i, j)) {
      out.columns.push_back({i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && h[i][j] == h[i - 1][j] + p.gap_penalty) {
      out.columns.push_back({i - 1, std::nullopt});
      --i;
    } else {
      out.columns.push_back({std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(out.columns.begin(), out.columns.end());
  return out;
}

/// Score of an explicit alignment, for checking optimality.
template <class T, class Eq = std::equal_to<T>>
int score_of(const Alignment& al, const std::vector<T>& a, const std::vector<T>& b,
             const AlignmentParams& p = {}, Eq eq = {}) {
  int s = 0;
  for (const auto& c : al.columns) {
    if (c.a && c.b) {
      s += eq(a[*c.a], b[*c.b]) ? p.match_score : p.mismatch_penalty;
    } else {
      s += p.gap_penalty;
    }
  }
  return s;
}

/// Seed ids that sit in a mismatch column or opposite a gap.
inline std::set<int> ast_diff(const AstNode& seed, const AstNode& other,
                              const AlignmentParams& p = {}) {
  auto sa = serialize(seed);
  auto sb = serialize(other);
  Alignment al = align(labels(sa), labels(sb), p);
  std::set<int> ids;
  for (const auto& c : al.columns) {
    if (!c.a) continue;
    if (!c.b || !(sa[*c.a].label == sb[*c.b].label)) ids.insert(sa[*c.a].id);
  }
  return ids;
}

inline std::set<int> ast_diff(const AstNode& seed, const std::vector<AstNode>& others,
                              const AlignmentParams& p = {}) {
  std::set<int> ids;
  for (const auto& o : others) {
    auto d = ast_diff(seed, o, p);
    ids.insert(d.begin(), d.end());
  }
  return ids;
}

/// Ids whose label differs between two trees of the same shape.
inline std::set<int> positional_diff(const AstNode& a, const AstNode& b) {
  auto sa = serialize(a);
  auto sb = serialize(b);
  if (sa.size() != sb.size()) throw PreconditionError("positional diff needs equal-shape trees");
  std::set<int> ids;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (!(sa[i].label == sb[i].label)) ids.insert(sa[i].id);
  }
  return ids;
}

struct Ratio {
  int numerator;
  int denominator;

  double value() const { return static_cast<double>(numerator) / denominator; }
};

/// Jaccard similarity over (id, label) node sets.
inline Ratio jaccard_ratio(const AstNode& t0, const AstNode& ti) {
  std::map<int, NodeLabel> left;
  for (auto& n : serialize(t0)) left.emplace(n.id, std::move(n.label));
  int common = 0;
  int right_count = 0;
  for (const auto& n : serialize(ti)) {
    ++right_count;
    auto it = left.find(n.id);
    if (it != left.end() && it->second == n.label) ++common;
  }
  int uni = static_cast<int>(left.size()) + right_count - common;
  return {common, uni};
}

inline double jaccard(const AstNode& t0, const AstNode& ti) { return jaccard_ratio(t0, ti).value(); }

}  // namespace dirloc::align
