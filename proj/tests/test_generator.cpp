#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "dirloc/bugs.hpp"
#include "dirloc/generator.hpp"
#include "dirloc/oracle.hpp"

using namespace dirloc;
using lang::AstNode;
using oracle::Verdict;

namespace {

gen::PipelineResult pipeline(const std::string& bug, int N, RngSeed rng = 1) {
  gen::GenerationConfig config;
  config.N = N;
  config.rng = rng;
  return gen::run_pipeline(jit::find_bug(bug).seed, bug, config);
}

std::vector<AstNode> programs_of(const std::vector<gen::Scored>& scored) {
  std::vector<AstNode> out;
  for (const auto& s : scored) out.push_back(s.program);
  return out;
}

}  // namespace

TEST(Pipeline, HalfPassingHalfFailing) {
  auto r = pipeline("negzero-fold", 30);
  ASSERT_EQ(r.selection.passing.size(), 15u);
  ASSERT_EQ(r.selection.failing.size(), 15u);
  EXPECT_EQ(r.programs().size(), 31u);
  for (const auto& s : r.selection.passing) {
    EXPECT_EQ(oracle::classify(s.program, "negzero-fold").verdict, Verdict::Pass) << s.source;
  }
  for (const auto& s : r.selection.failing) {
    EXPECT_EQ(oracle::classify(s.program, "negzero-fold").verdict, Verdict::Fail) << s.source;
  }
}

TEST(Pipeline, PassingProgramsChangeOneTarget) {
  auto r = pipeline("nan-compare-fold", 20);
  int s = lang::size(r.seed);
  for (const auto& p : r.selection.passing) {
    auto d = align::positional_diff(r.seed, p.program);
    ASSERT_EQ(d.size(), 1u) << p.source;
    EXPECT_TRUE(r.report.targets.count(*d.begin()));
    // One relabelled node out of s: s-1 shared over s+1 distinct.
    auto ratio = align::jaccard_ratio(r.seed, p.program);
    EXPECT_EQ(ratio.numerator, s - 1);
    EXPECT_EQ(ratio.denominator, s + 1);
  }
}

TEST(Pipeline, FailingProgramsLeaveTargetsAlone) {
  auto r = pipeline("modulo-sign-fold", 20);
  std::set<int> others;
  for (int id : mutation::mutable_ids(r.seed)) {
    if (!r.report.targets.count(id)) others.insert(id);
  }
  for (const auto& f : r.selection.failing) {
    EXPECT_EQ(align::positional_diff(r.seed, f.program), others) << f.source;
  }
}

TEST(Pipeline, SelectionTakesTheExtremes) {
  auto r = pipeline("float-strength-reduction", 20);
  auto seed = r.seed;
  auto selected = [](const std::vector<gen::Scored>& v) {
    std::set<std::string> out;
    for (const auto& s : v) out.insert(s.source);
    return out;
  };
  auto pass_sel = selected(r.selection.passing);
  auto fail_sel = selected(r.selection.failing);
  double worst_pass = 1.0;
  for (const auto& s : r.selection.passing) worst_pass = std::min(worst_pass, s.similarity);
  double worst_fail = 0.0;
  for (const auto& s : r.selection.failing) worst_fail = std::max(worst_fail, s.similarity);
  for (const auto& p : r.report.passing_candidates.programs) {
    if (!pass_sel.count(lang::print(p))) EXPECT_LE(align::jaccard(seed, p), worst_pass);
  }
  for (const auto& p : r.report.failing_candidates.programs) {
    if (!fail_sel.count(lang::print(p))) EXPECT_GE(align::jaccard(seed, p), worst_fail);
  }
}

TEST(Pipeline, Deterministic) {
  auto a = pipeline("minmax-specialize", 10, 5);
  auto b = pipeline("minmax-specialize", 10, 5);
  EXPECT_EQ(a.programs(), b.programs());
  EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
}

TEST(Pipeline, SmallestN) {
  auto r = pipeline("negzero-fold", 2);
  EXPECT_EQ(r.selection.passing.size(), 1u);
  EXPECT_EQ(r.selection.failing.size(), 1u);
}

TEST(Pipeline, RejectsOddOrTinyN) {
  EXPECT_THROW(pipeline("negzero-fold", 3), PreconditionError);
  EXPECT_THROW(pipeline("negzero-fold", 0), PreconditionError);
}

TEST(Pipeline, SeedMustFail) {
  gen::GenerationConfig config;
  EXPECT_THROW(gen::run_pipeline("1;", "negzero-fold", config), PreconditionError);
  EXPECT_THROW(gen::run_pipeline("1;", "nope", config), UnknownBug);
}

TEST(Targets, NegatedZeroExample) {
  AstNode seed = lang::parse("let x = y + -0;");
  std::vector<AstNode> pool = {lang::parse("let x = y + +0;"), lang::parse("let x = y - -0;"),
                               lang::parse("let x = y * -0;")};
  auto classify = [](const AstNode& p) {
    return lang::find_node(p, 3)->text() == "*" ? Verdict::Fail : Verdict::Pass;
  };
  EXPECT_EQ(gen::identify_targets(seed, pool, classify), (gen::TargetSet{3, 5}));
}

TEST(Targets, NoPassingThrows) {
  AstNode seed = lang::parse("let x = 1 + 2;");
  auto fail = [](const AstNode&) { return Verdict::Fail; };
  EXPECT_THROW(gen::identify_targets(seed, {lang::parse("let x = 1 - 2;")}, fail), NoPassingFound);
}

TEST(Targets, UndirectedPoolMutatesOneNodeEach) {
  AstNode seed = lang::parse(jit::find_bug("negzero-fold").seed);
  auto pool = gen::undirected(seed, 3);
  EXPECT_EQ(pool.size(), mutation::mutable_ids(seed).size());
  for (const auto& p : pool) EXPECT_EQ(align::positional_diff(seed, p).size(), 1u);
}

TEST(Candidates, TooFewPassingThrows) {
  AstNode seed = lang::parse("let x = 1 + 2;");
  auto fail = [](const AstNode&) { return Verdict::Fail; };
  EXPECT_THROW(gen::generate_passings(4, seed, {3}, 1, fail, 40, 2), InsufficientCandidates);
  EXPECT_THROW(gen::generate_passings(4, seed, {}, 1, fail, 40, 2), PreconditionError);
  EXPECT_THROW(gen::generate_fails(4, seed, {3}, 1, fail, 0, 2), InsufficientCandidates);
}

TEST(Candidates, TargetsAreVisitedInTurn) {
  AstNode seed = lang::parse("let x = y + -0;");
  auto pass = [](const AstNode&) { return Verdict::Pass; };
  auto c = gen::generate_passings(2, seed, {3, 5}, 1, pass, 10, 2);
  ASSERT_EQ(c.programs.size(), 2u);
  EXPECT_EQ(align::positional_diff(seed, c.programs[0]), (std::set<int>{3}));
  EXPECT_EQ(align::positional_diff(seed, c.programs[1]), (std::set<int>{5}));
}

TEST(Select, RejectsShortPools) {
  AstNode seed = lang::parse("1;");
  EXPECT_THROW(gen::select({}, {seed}, seed, 2), InsufficientCandidates);
  EXPECT_THROW(gen::select({seed}, {seed}, seed, 3), PreconditionError);
}

TEST(Select, TiesAreBrokenByContent) {
  AstNode seed = lang::parse("let a = 1 + 2;");
  std::vector<AstNode> pass = {lang::parse("let a = 1 - 2;"), lang::parse("let a = 1 * 2;"),
                               lang::parse("let a = 1 / 2;")};
  std::vector<AstNode> reversed(pass.rbegin(), pass.rend());
  auto a = gen::select(pass, pass, seed, 4);
  auto b = gen::select(reversed, reversed, seed, 4);
  EXPECT_EQ(programs_of(a.passing), programs_of(b.passing));
  EXPECT_EQ(programs_of(a.failing), programs_of(b.failing));
}
