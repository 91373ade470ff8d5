#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dirloc/alignment.hpp"
#include "dirloc/ast.hpp"
#include "dirloc/errors.hpp"
#include "dirloc/oracle.hpp"
#include "dirloc/parser.hpp"
#include "dirloc/printer.hpp"
#include "dirloc/rng.hpp"
#include "dirloc/rules.hpp"

namespace dirloc::gen {

using lang::AstNode;
using oracle::Verdict;

/// Maps a candidate program to its oracle verdict.
using Classifier = std::function<Verdict(const AstNode&)>;

using TargetSet = std::set<int>;

inline Classifier oracle_classifier(std::string bug, std::uint64_t budget = jit::kDefaultStepBudget) {
  jit::require_known_bug(bug);
  return [bug = std::move(bug), budget](const AstNode& p) {
    return oracle::classify(p, bug, budget).verdict;
  };
}

struct GenerationConfig {
  int N = 30;
  RngSeed rng = 1;
  int max_attempts = 0;  // 0 means 20 * N
  std::uint64_t budget = jit::kDefaultStepBudget;
  align::AlignmentParams alignment;
  mutation::RuleSet rules = mutation::RuleSet::standard();

  int attempts() const { return max_attempts > 0 ? max_attempts : 20 * N; }

  void validate() const {
    if (N < 2 || N % 2 != 0) {
      throw PreconditionError("N must be even and at least 2, got " + std::to_string(N));
    }
    if (max_attempts < 0) throw PreconditionError("max_attempts must be positive");
    alignment.validate();
  }
};

// Independent random streams for the pipeline stages.
namespace stream {
inline constexpr std::uint64_t kUndirected = 0x756e64;
inline constexpr std::uint64_t kPassing = 0x706173;
inline constexpr std::uint64_t kFailing = 0x666169;
}  // namespace stream

/// One mutant per node: node i of a fresh copy is mutated for every i.
/// Copies equal to the seed (immutable nodes) and duplicates are dropped.
inline std::vector<AstNode> undirected(const AstNode& seed, RngSeed rng,
                                       const mutation::RuleSet& rules = mutation::RuleSet::standard()) {
  std::vector<AstNode> out;
  std::unordered_set<std::string> seen;
  RngSeed base = derive_seed(rng, {stream::kUndirected});
  int n = lang::size(seed);
  for (int i = 1; i <= n; ++i) {
    AstNode copy = mutation::mutate(seed, i, base, 0, rules);
    if (copy == seed) continue;
    if (seen.insert(lang::print(copy)).second) out.push_back(std::move(copy));
  }
  return out;
}

/// Union of the seed positions at which passing mutants differ from the seed.
inline TargetSet identify_targets(const AstNode& seed, const std::vector<AstNode>& pool,
                                  const Classifier& classify,
                                  const align::AlignmentParams& params = {}) {
  std::vector<AstNode> passing;
  for (const auto& p : pool) {
    if (classify(p) == Verdict::Pass) passing.push_back(p);
  }
  if (passing.empty()) throw NoPassingFound();
  return align::ast_diff(seed, passing, params);
}

struct Candidates {
  std::vector<AstNode> programs;
  int attempts = 0;
  int rejected = 0;  // oracle disagreed with the intended verdict
  int duplicates = 0;
};

namespace detail {

inline void require_count(const Candidates& c, std::size_t minimum, const std::string& what) {
  if (c.programs.size() < minimum) throw InsufficientCandidates(what, c.programs.size(), minimum);
}

}  // namespace detail

/// Copies of the seed with exactly one target node mutated, cycling through
/// the targets. Only oracle-confirmed passing programs are kept. Stops after
/// `wanted` programs or `max_attempts` attempts; fewer than `minimum` throws.
inline Candidates generate_passings(std::size_t wanted, const AstNode& seed, const TargetSet& targets,
                                    RngSeed rng, const Classifier& classify, int max_attempts,
                                    std::size_t minimum,
                                    const mutation::RuleSet& rules = mutation::RuleSet::standard()) {
  if (targets.empty()) throw PreconditionError("target set is empty");
  std::vector<int> order(targets.begin(), targets.end());
  RngSeed base = derive_seed(rng, {stream::kPassing});
  Candidates out;
  std::unordered_set<std::string> seen;
  std::size_t next_target = 0;
  while (out.programs.size() < wanted && out.attempts < max_attempts) {
    int target = order[next_target];
    next_target = (next_target + 1) % order.size();
    AstNode copy = mutation::mutate(seed, target, base, static_cast<std::uint64_t>(out.attempts), rules);
    ++out.attempts;
    if (copy == seed || !seen.insert(lang::print(copy)).second) {
      ++out.duplicates;
      continue;
    }
    if (classify(copy) != Verdict::Pass) {
      ++out.rejected;
      continue;
    }
    out.programs.push_back(std::move(copy));
  }
  detail::require_count(out, minimum, "passing");
  return out;
}

/// Copies of the seed in which every mutable node outside the targets is
/// mutated, with fresh replacement draws per attempt. Only oracle-confirmed
/// failing programs are kept.
inline Candidates generate_fails(std::size_t wanted, const AstNode& seed, const TargetSet& targets,
                                 RngSeed rng, const Classifier& classify, int max_attempts,
                                 std::size_t minimum,
                                 const mutation::RuleSet& rules = mutation::RuleSet::standard()) {
  std::vector<int> others;
  for (int id : mutation::mutable_ids(seed, rules)) {
    if (!targets.count(id)) others.push_back(id);
  }
  RngSeed base = derive_seed(rng, {stream::kFailing});
  Candidates out;
  std::unordered_set<std::string> seen;
  while (out.programs.size() < wanted && out.attempts < max_attempts) {
    AstNode copy = seed;
    for (int id : others) {
      Rng r = mutation::node_stream(base, id, static_cast<std::uint64_t>(out.attempts));
      mutation::mutate_in_place(copy, id, r, rules);
    }
    ++out.attempts;
    if (!seen.insert(lang::print(copy)).second) {
      ++out.duplicates;
      continue;
    }
    if (classify(copy) != Verdict::Fail) {
      ++out.rejected;
      continue;
    }
    out.programs.push_back(std::move(copy));
  }
  detail::require_count(out, minimum, "failing");
  return out;
}

struct Scored {
  AstNode program;
  std::string source;
  double similarity = 0.0;
};

struct Selection {
  std::vector<Scored> passing;
  std::vector<Scored> failing;
};

namespace detail {

inline std::vector<Scored> score(const std::vector<AstNode>& programs, const AstNode& seed) {
  std::vector<Scored> out;
  out.reserve(programs.size());
  for (const auto& p : programs) out.push_back({p, lang::print(p), align::jaccard(seed, p)});
  return out;
}

// Ties fall back to the hash of the printed source, then the source itself.
inline bool tie_order(const Scored& a, const Scored& b) {
  auto ha = fnv1a(a.source);
  auto hb = fnv1a(b.source);
  if (ha != hb) return ha < hb;
  return a.source < b.source;
}

}  // namespace detail

/// Most similar passing and least similar failing programs, N/2 of each.
inline Selection select(const std::vector<AstNode>& passings, const std::vector<AstNode>& fails,
                        const AstNode& seed, int N) {
  if (N < 2 || N % 2 != 0) throw PreconditionError("N must be even and at least 2");
  auto half = static_cast<std::size_t>(N / 2);
  if (passings.size() < half) throw InsufficientCandidates("passing", passings.size(), half);
  if (fails.size() < half) throw InsufficientCandidates("failing", fails.size(), half);
  Selection out;
  out.passing = detail::score(passings, seed);
  out.failing = detail::score(fails, seed);
  std::sort(out.passing.begin(), out.passing.end(), [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return detail::tie_order(a, b);
  });
  std::sort(out.failing.begin(), out.failing.end(), [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity < b.similarity;
    return detail::tie_order(a, b);
  });
  out.passing.resize(half);
  out.failing.resize(half);
  return out;
}

struct PipelineReport {
  int seed_size = 0;
  std::size_t undirected_pool = 0;
  std::size_t undirected_passing = 0;
  std::size_t undirected_failing = 0;
  std::size_t undirected_invalid = 0;
  TargetSet targets;
  Candidates passing_candidates;
  Candidates failing_candidates;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["seed_size"] = seed_size;
    j["undirected"] = {{"pool", undirected_pool},
                       {"pass", undirected_passing},
                       {"fail", undirected_failing},
                       {"invalid", undirected_invalid}};
    j["targets"] = targets;
    auto pool = [](const Candidates& c) {
      return nlohmann::ordered_json{{"candidates", c.programs.size()},
                                    {"attempts", c.attempts},
                                    {"rejected", c.rejected},
                                    {"duplicates", c.duplicates}};
    };
    j["passing_pool"] = pool(passing_candidates);
    j["failing_pool"] = pool(failing_candidates);
    return j;
  }
};

struct PipelineResult {
  AstNode seed;
  std::string seed_source;
  Selection selection;
  PipelineReport report;

  /// Seed first, then the selected passing and failing programs.
  std::vector<std::string> programs() const {
    std::vector<std::string> out{seed_source};
    for (const auto& s : selection.passing) out.push_back(s.source);
    for (const auto& s : selection.failing) out.push_back(s.source);
    return out;
  }
};

/// Target identification with the verdict counts of the undirected pool.
inline TargetSet targets_for(const AstNode& seed, RngSeed rng, const Classifier& classify,
                             PipelineReport* report = nullptr,
                             const mutation::RuleSet& rules = mutation::RuleSet::standard(),
                             const align::AlignmentParams& params = {}) {
  auto pool = undirected(seed, rng, rules);
  std::vector<AstNode> passing;
  std::size_t failing = 0, invalid = 0;
  for (const auto& p : pool) {
    switch (classify(p)) {
      case Verdict::Pass: passing.push_back(p); break;
      case Verdict::Fail: ++failing; break;
      case Verdict::Invalid: ++invalid; break;
    }
  }
  if (report) {
    report->undirected_pool = pool.size();
    report->undirected_passing = passing.size();
    report->undirected_failing = failing;
    report->undirected_invalid = invalid;
  }
  if (passing.empty()) throw NoPassingFound();
  return align::ast_diff(seed, passing, params);
}

/// End-to-end generation. Each directed stage asks for N candidates so that
/// selection has room to choose, and needs at least N/2 to succeed.
inline PipelineResult run_pipeline(std::string_view seed_source, std::string_view bug,
                                   const GenerationConfig& config) {
  config.validate();
  jit::require_known_bug(bug);
  PipelineResult out;
  out.seed = lang::parse(seed_source);
  out.seed_source = lang::print(out.seed);
  auto classify = oracle_classifier(std::string(bug), config.budget);
  if (classify(out.seed) != Verdict::Fail) {
    throw PreconditionError("seed program does not fail under bug '" + std::string(bug) + "'");
  }
  out.report.seed_size = lang::size(out.seed);
  out.report.targets =
      targets_for(out.seed, config.rng, classify, &out.report, config.rules, config.alignment);
  auto wanted = static_cast<std::size_t>(config.N);
  auto half = wanted / 2;
  out.report.passing_candidates = generate_passings(wanted, out.seed, out.report.targets, config.rng,
                                                    classify, config.attempts(), half, config.rules);
  out.report.failing_candidates = generate_fails(wanted, out.seed, out.report.targets, config.rng,
                                                 classify, config.attempts(), half, config.rules);
  out.selection = select(out.report.passing_candidates.programs,
                         out.report.failing_candidates.programs, out.seed, config.N);
  return out;
}

}  // namespace dirloc::gen
