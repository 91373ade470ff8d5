#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dirloc/alignment.hpp"
#include "dirloc/generator.hpp"
#include "dirloc/parser.hpp"
#include "dirloc/random_program.hpp"
#include "dirloc/rules.hpp"

using namespace dirloc;
using lang::AstNode;

namespace {

// Best score over every alignment, by exhaustive recursion.
int brute_best(const std::string& a, const std::string& b, std::size_t i, std::size_t j,
               const align::AlignmentParams& p) {
  if (i == a.size()) return static_cast<int>(b.size() - j) * p.gap_penalty;
  if (j == b.size()) return static_cast<int>(a.size() - i) * p.gap_penalty;
  int diag = (a[i] == b[j] ? p.match_score : p.mismatch_penalty) + brute_best(a, b, i + 1, j + 1, p);
  int up = p.gap_penalty + brute_best(a, b, i + 1, j, p);
  int left = p.gap_penalty + brute_best(a, b, i, j + 1, p);
  return std::max({diag, up, left});
}

std::vector<std::string> all_words(int max_len) {
  std::vector<std::string> out{""};
  std::vector<std::string> frontier{""};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& w : frontier) {
      for (char c : std::string("abc")) next.push_back(w + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::vector<char> chars(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Align, ScoreIsOptimalOnSmallAlphabet) {
  align::AlignmentParams p;
  Rng rng(17);
  auto words = all_words(6);
  for (int trial = 0; trial < 400; ++trial) {
    const auto& a = rng.pick(words);
    const auto& b = rng.pick(words);
    auto al = align::align(chars(a), chars(b), p);
    EXPECT_EQ(al.score, brute_best(a, b, 0, 0, p)) << a << " / " << b;
    EXPECT_EQ(align::score_of(al, chars(a), chars(b), p), al.score);
  }
}

TEST(Align, ColumnsCoverBothSequencesInOrder) {
  auto al = align::align(chars("abcab"), chars("bca"));
  std::vector<std::size_t> left, right;
  for (const auto& c : al.columns) {
    EXPECT_TRUE(c.a || c.b);
    if (c.a) left.push_back(*c.a);
    if (c.b) right.push_back(*c.b);
  }
  EXPECT_EQ(left, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(right, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Align, RejectsDegenerateParameters) {
  align::AlignmentParams p;
  p.gap_penalty = 0;
  EXPECT_THROW(p.validate(), PreconditionError);
  p = {};
  p.mismatch_penalty = p.match_score;
  EXPECT_THROW(p.validate(), PreconditionError);
}

TEST(Diff, NegatedZeroTargets) {
  AstNode seed = lang::parse("let x = y + -0;");
  std::vector<AstNode> passing = {lang::parse("let x = y + +0;"), lang::parse("let x = y - -0;")};
  EXPECT_EQ(align::ast_diff(seed, passing), (std::set<int>{3, 5}));
  EXPECT_EQ(lang::find_node(seed, 3)->kind, lang::NodeKind::BinaryOp);
  EXPECT_EQ(lang::find_node(seed, 5)->kind, lang::NodeKind::UnaryOp);
}

TEST(Diff, SingleMutantMatchesPositionalDiff) {
  Rng gen(21);
  for (int round = 0; round < 60; ++round) {
    AstNode t = lang::random_program(gen);
    for (int id : mutation::mutable_ids(t)) {
      AstNode m = mutation::mutate(t, id, RngSeed{4}, static_cast<std::uint64_t>(round));
      EXPECT_EQ(align::ast_diff(t, m), (std::set<int>{id}));
      EXPECT_EQ(align::positional_diff(t, m), (std::set<int>{id}));
    }
  }
}

TEST(Diff, IdenticalTreesDiffEmpty) {
  AstNode t = lang::parse("function f(a) { return a * 2; } f(3);");
  EXPECT_TRUE(align::ast_diff(t, t).empty());
}

TEST(Diff, InsertedStatementIsAGap) {
  AstNode seed = lang::parse("let a = 1; let b = 2;");
  AstNode other = lang::parse("let b = 2;");
  auto d = align::ast_diff(seed, other);
  EXPECT_EQ(d, (std::set<int>{2, 3}));
}

TEST(Jaccard, OneChangedNodeInSeven) {
  AstNode seed = lang::parse("let a = 1 + 2;");
  ASSERT_EQ(lang::size(seed), 5);
  AstNode seven = lang::parse("let a = (1 + 2) * 3;");
  ASSERT_EQ(lang::size(seven), 7);
  AstNode changed = lang::parse("let a = (1 + 2) / 3;");
  auto r = align::jaccard_ratio(seven, changed);
  EXPECT_EQ(r.numerator, 6);
  EXPECT_EQ(r.denominator, 8);
}

TEST(Jaccard, SymmetricAndBounded) {
  Rng gen(8);
  for (int round = 0; round < 30; ++round) {
    AstNode a = lang::random_program(gen);
    AstNode b = lang::random_program(gen);
    double ab = align::jaccard(a, b);
    EXPECT_DOUBLE_EQ(ab, align::jaccard(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_DOUBLE_EQ(align::jaccard(a, a), 1.0);
  }
}

TEST(Jaccard, MoreMutationsNeverRaiseSimilarity) {
  Rng gen(12);
  for (int round = 0; round < 30; ++round) {
    AstNode seed = lang::random_program(gen);
    auto ids = mutation::mutable_ids(seed);
    AstNode current = seed;
    double last = 1.0;
    for (int id : ids) {
      mutation::mutate_in_place(current, id, gen);
      double now = align::jaccard(seed, current);
      EXPECT_LE(now, last);
      last = now;
    }
  }
}
