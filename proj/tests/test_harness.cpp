#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dirloc/bugs.hpp"
#include "dirloc/harness.hpp"

using namespace dirloc;
using harness::ExperimentSettings;
using harness::RunResult;
using harness::Strategy;

namespace {

RunResult run_with(std::optional<int> rank, double eliminated, int m = 10) {
  RunResult r;
  r.rank = rank;
  r.eliminated_proportion = eliminated;
  r.m_passing = m;
  r.n_failing = 4;
  r.seed_entities = 20;
  r.suspicious_count = 3;
  return r;
}

std::string dump(const std::vector<harness::ExperimentResult>& results) {
  std::string out;
  for (const auto& r : results) out += harness::to_json(r).dump() + "\n";
  return out;
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (auto s : harness::kAllStrategies) {
    EXPECT_EQ(harness::parse_strategy(harness::to_string(s)), s);
  }
  EXPECT_THROW(harness::parse_strategy("nope"), PreconditionError);
}

TEST(Run, DirectedCountsAndProportion) {
  ExperimentSettings settings;
  auto r = harness::localize_run(Strategy::Directed, jit::find_bug("negzero-fold"), 1, settings);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_EQ(r.m_passing, 15);
  EXPECT_EQ(r.n_failing, 16);
  ASSERT_TRUE(r.rank.has_value());
  EXPECT_GE(*r.rank, 1);
  EXPECT_EQ(r.eliminated_proportion + static_cast<double>(r.suspicious_count) / r.seed_entities, 1.0);
}

TEST(Run, ProportionIdentityForEveryStrategy) {
  ExperimentSettings settings;
  settings.N = 10;
  for (const auto& bug : jit::bug_registry()) {
    for (auto s : harness::kAllStrategies) {
      auto r = harness::localize_run(s, bug, 2, settings);
      if (r.seed_entities == 0) continue;
      EXPECT_EQ(r.eliminated_proportion + static_cast<double>(r.suspicious_count) / r.seed_entities, 1.0)
          << bug.id << " " << harness::to_string(s);
    }
  }
}

TEST(Programs, BaselineShapes) {
  ExperimentSettings settings;
  settings.N = 10;
  const auto& bug = jit::find_bug("modulo-sign-fold");
  auto random = harness::random_programs(bug, 1, settings);
  EXPECT_LE(random.passing.size() + random.failing.size(), 10u);
  auto single = harness::single_failing_programs(bug, 1, settings);
  EXPECT_TRUE(single.failing.empty());
  EXPECT_LE(single.passing.size(), 10u);
  auto same = harness::same_mutation_programs(bug, 1, settings);
  EXPECT_LE(same.passing.size(), 5u);
  EXPECT_LE(same.failing.size(), 5u);
}

TEST(Summary, MedianOfThreeRuns) {
  auto r = harness::detail::summarize("b", Strategy::Random,
                                      {run_with(3, 0.5), run_with(1, 0.9), run_with(2, 0.7, 12)});
  EXPECT_EQ(r.median_rank, 2);
  EXPECT_DOUBLE_EQ(r.eliminated_proportion, 0.7);
  EXPECT_EQ(r.m_passing, 12);
  EXPECT_TRUE(r.top_n(5));
  EXPECT_FALSE(r.top_n(1));
}

TEST(Summary, UnrankedRuns) {
  auto one = harness::detail::summarize("b", Strategy::Random,
                                        {run_with(std::nullopt, 0.1), run_with(4, 0.2), run_with(6, 0.3)});
  EXPECT_EQ(one.median_rank, 6);
  auto two = harness::detail::summarize(
      "b", Strategy::Random, {run_with(std::nullopt, 0.1), run_with(4, 0.2), run_with(std::nullopt, 0.3)});
  EXPECT_FALSE(two.median_rank.has_value());
  EXPECT_FALSE(two.top_n(20));
  EXPECT_THROW(harness::detail::summarize("b", Strategy::Random, {run_with(1, 0.1)}), PreconditionError);
}

TEST(Report, PercentFormatting) {
  EXPECT_EQ(harness::percent(18, 72), "25");
  EXPECT_EQ(harness::percent(31, 72), "43.1");
  EXPECT_EQ(harness::percent(0, 5), "0");
  EXPECT_EQ(harness::percent(5, 5), "100");
  EXPECT_EQ(harness::percent(1, 3), "33.3");
}

TEST(Report, EmptyCsvIsHeaderOnly) {
  std::string csv = harness::results_csv({});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("bug,strategy,", 0), 0u);
  EXPECT_EQ(harness::sweep_csv({}), "bug,m,n,suspicious_count,seed_entities,normalized\n");
}

TEST(Report, SummaryTableRow) {
  std::vector<harness::ExperimentResult> results;
  for (int i = 0; i < 4; ++i) {
    auto rank = i == 0 ? std::optional<int>(1) : std::optional<int>(30);
    results.push_back(harness::detail::summarize("b" + std::to_string(i), Strategy::Directed,
                                                 {run_with(rank, 0.5), run_with(rank, 0.5), run_with(rank, 0.5)}));
  }
  std::string table = harness::summary_table(results);
  EXPECT_NE(table.find("| directed | 4 | 1 (25%) | 1 (25%) | 1 (25%) | 1 (25%) |"), std::string::npos) << table;
}

TEST(Report, JsonRoundTrip) {
  auto r = harness::detail::summarize("negzero-fold", Strategy::SameMutation,
                                      {run_with(3, 0.25), run_with(std::nullopt, 0.5), run_with(2, 0.75)});
  r.runs[1].error = "no passing program";
  auto back = harness::result_from_json(harness::to_json(r));
  EXPECT_EQ(harness::to_json(back).dump(), harness::to_json(r).dump());
  EXPECT_EQ(back.median_rank, r.median_rank);
  EXPECT_EQ(back.runs[1].error, "no passing program");
}

TEST(Report, EmitWritesThreeFiles) {
  auto dir = std::filesystem::temp_directory_path() / "dirloc_emit_test";
  std::filesystem::remove_all(dir);
  harness::emit_report({}, dir);
  for (const char* name : {"results.csv", "results.json", "summary.md"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  std::ifstream f(dir / "results.json");
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), "[]\n");
  std::filesystem::remove_all(dir);
}

TEST(Sweep, NonIncreasingInBothDirections) {
  ExperimentSettings settings;
  for (const auto& bug : jit::bug_registry()) {
    auto cells = harness::sweep_counts(bug, {0, 5, 10}, 8, 1, settings);
    ASSERT_EQ(cells.size(), 24u);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].n > 1) EXPECT_LE(cells[i].suspicious_count, cells[i - 1].suspicious_count) << bug.id;
      if (i >= 8) EXPECT_LE(cells[i].suspicious_count, cells[i - 8].suspicious_count) << bug.id;
    }
  }
  EXPECT_THROW(harness::sweep_counts(jit::bug_registry()[0], {}, 3, 1, settings), PreconditionError);
}

TEST(Compare, JobCountDoesNotChangeResults) {
  ExperimentSettings settings;
  settings.N = 10;
  std::vector<jit::Bug> bugs = {jit::find_bug("nan-compare-fold"), jit::find_bug("minmax-specialize")};
  std::vector<Strategy> strategies = {Strategy::Directed, Strategy::Random};
  auto serial = harness::compare_strategies(bugs, strategies, {1, 2, 3}, settings);
  settings.jobs = 3;
  auto parallel = harness::compare_strategies(bugs, strategies, {1, 2, 3}, settings);
  ASSERT_EQ(serial.size(), 4u);
  EXPECT_EQ(dump(serial), dump(parallel));
  EXPECT_EQ(serial[0].bug, "nan-compare-fold");
  EXPECT_EQ(serial[1].strategy, Strategy::Random);
}
