#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dirloc/bugs.hpp"
#include "dirloc/errors.hpp"
#include "dirloc/generator.hpp"
#include "dirloc/localizer.hpp"
#include "dirloc/oracle.hpp"
#include "dirloc/printer.hpp"
#include "dirloc/rules.hpp"

namespace dirloc::harness {

using lang::AstNode;

enum class Strategy { Directed, Random, SingleFailing, SameMutation };

inline constexpr std::array<Strategy, 4> kAllStrategies = {
    Strategy::Directed, Strategy::Random, Strategy::SingleFailing, Strategy::SameMutation};

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Directed: return "directed";
    case Strategy::Random: return "random";
    case Strategy::SingleFailing: return "single-failing";
    case Strategy::SameMutation: return "same-mutation";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  for (auto s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw PreconditionError("unknown strategy '" + std::string(name) + "'");
}

/// Generated programs for one localization run; the seed is kept apart.
struct ProgramSet {
  std::vector<AstNode> passing;
  std::vector<AstNode> failing;
};

struct ExperimentSettings {
  int N = 30;
  std::uint64_t budget = jit::kDefaultStepBudget;
  int jobs = 1;
  align::AlignmentParams alignment;
  mutation::RuleSet rules = mutation::RuleSet::standard();
};

namespace detail {

// Distinct programs other than the seed, bucketed by verdict until each
// bucket holds `want_*` programs or the attempts run out.
template <class MakeCandidate>
ProgramSet collect(const AstNode& seed, const gen::Classifier& classify, std::size_t want_pass,
                   std::size_t want_fail, int max_attempts, MakeCandidate&& make) {
  ProgramSet out;
  std::unordered_set<std::string> seen{lang::print(seed)};
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (out.passing.size() >= want_pass && out.failing.size() >= want_fail) break;
    AstNode p = make(static_cast<std::uint64_t>(attempt));
    if (!seen.insert(lang::print(p)).second) continue;
    auto v = classify(p);
    if (v == oracle::Verdict::Pass && out.passing.size() < want_pass) out.passing.push_back(std::move(p));
    if (v == oracle::Verdict::Fail && out.failing.size() < want_fail) out.failing.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Full generation pipeline: N/2 similar passing and N/2 dissimilar failing programs.
inline ProgramSet directed_programs(const jit::Bug& bug, RngSeed rng, const ExperimentSettings& settings) {
  gen::GenerationConfig config;
  config.N = settings.N;
  config.rng = rng;
  config.budget = settings.budget;
  config.alignment = settings.alignment;
  config.rules = settings.rules;
  auto result = gen::run_pipeline(bug.seed, bug.id, config);
  ProgramSet out;
  for (auto& s : result.selection.passing) out.passing.push_back(std::move(s.program));
  for (auto& s : result.selection.failing) out.failing.push_back(std::move(s.program));
  return out;
}

/// N programs, each with k ~ U{1..5} uniformly chosen nodes mutated by a
/// uniformly chosen rule, split by verdict.
inline ProgramSet random_programs(const jit::Bug& bug, RngSeed rng, const ExperimentSettings& settings) {
  AstNode seed = lang::parse(bug.seed);
  auto classify = gen::oracle_classifier(bug.id, settings.budget);
  const int N = settings.N;
  int n = lang::size(seed);
  RngSeed base = derive_seed(rng, {0x72616e});
  ProgramSet out;
  std::unordered_set<std::string> seen{lang::print(seed)};
  int valid = 0;
  for (int attempt = 0; attempt < 20 * N && valid < N; ++attempt) {
    Rng r(derive_seed(base, {static_cast<std::uint64_t>(attempt)}));
    AstNode p = seed;
    int k = r.between(1, 5);
    for (int j = 0; j < k; ++j) mutation::mutate_in_place(p, r.between(1, n), r, settings.rules);
    if (!seen.insert(lang::print(p)).second) continue;
    auto v = classify(p);
    if (v == oracle::Verdict::Invalid) continue;
    ++valid;
    (v == oracle::Verdict::Pass ? out.passing : out.failing).push_back(std::move(p));
  }
  return out;
}

/// The seed is the only failing input; N passing programs come from mutating
/// literal values while the structure stays fixed.
inline ProgramSet single_failing_programs(const jit::Bug& bug, RngSeed rng,
                                          const ExperimentSettings& settings) {
  AstNode seed = lang::parse(bug.seed);
  auto classify = gen::oracle_classifier(bug.id, settings.budget);
  const int N = settings.N;
  std::vector<int> values;
  for (int id : mutation::mutable_ids(seed, settings.rules)) {
    auto kind = lang::find_node(seed, id)->kind;
    if (kind == lang::NodeKind::NumberLit || kind == lang::NodeKind::StringLit ||
        kind == lang::NodeKind::BoolLit) {
      values.push_back(id);
    }
  }
  if (values.empty()) return {};
  RngSeed base = derive_seed(rng, {0x76616c});
  return detail::collect(seed, classify, static_cast<std::size_t>(N), 0, 20 * N,
                         [&](std::uint64_t attempt) {
                           Rng r(derive_seed(base, {attempt}));
                           AstNode p = seed;
                           int k = r.between(1, static_cast<int>(std::min<std::size_t>(values.size(), 5)));
                           for (int j = 0; j < k; ++j) {
                             mutation::mutate_in_place(p, r.pick(values), r, settings.rules);
                           }
                           return p;
                         });
}

/// Both pools come from single mutations of target nodes.
inline ProgramSet same_mutation_programs(const jit::Bug& bug, RngSeed rng,
                                         const ExperimentSettings& settings) {
  AstNode seed = lang::parse(bug.seed);
  auto classify = gen::oracle_classifier(bug.id, settings.budget);
  auto targets = gen::targets_for(seed, rng, classify, nullptr, settings.rules, settings.alignment);
  std::vector<int> order(targets.begin(), targets.end());
  RngSeed base = derive_seed(rng, {0x73616d});
  auto half = static_cast<std::size_t>(settings.N / 2);
  return detail::collect(seed, classify, half, half, 20 * settings.N, [&](std::uint64_t attempt) {
    int target = order[attempt % order.size()];
    return mutation::mutate(seed, target, base, attempt, settings.rules);
  });
}

inline ProgramSet programs_for(Strategy s, const jit::Bug& bug, RngSeed rng,
                               const ExperimentSettings& settings) {
  switch (s) {
    case Strategy::Directed: return directed_programs(bug, rng, settings);
    case Strategy::Random: return random_programs(bug, rng, settings);
    case Strategy::SingleFailing: return single_failing_programs(bug, rng, settings);
    case Strategy::SameMutation: return same_mutation_programs(bug, rng, settings);
  }
  return {};
}

inline loc::EntitySet coverage(const AstNode& program, std::string_view bug, std::uint64_t budget) {
  return oracle::classify(program, bug, budget).trace.entities();
}

/// Spectrum with the seed as the first failing program.
inline loc::SpectrumMatrix spectrum(const jit::Bug& bug, const ProgramSet& programs,
                                    std::uint64_t budget) {
  loc::SpectrumMatrix m;
  m.failing.push_back(coverage(lang::parse(bug.seed), bug.id, budget));
  for (const auto& p : programs.failing) m.failing.push_back(coverage(p, bug.id, budget));
  for (const auto& p : programs.passing) m.passing.push_back(coverage(p, bug.id, budget));
  return m;
}

/// One localization run of one strategy on one bug.
struct RunResult {
  RngSeed rng = 0;
  int m_passing = 0;
  int n_failing = 0;  // including the seed
  int seed_entities = 0;
  int suspicious_count = 0;
  double eliminated_proportion = 0.0;
  std::optional<int> rank;  // absent when the run failed or the ground truth is uncovered
  std::string error;
};

inline RunResult localize_run(Strategy s, const jit::Bug& bug, RngSeed rng,
                              const ExperimentSettings& settings) {
  RunResult out;
  out.rng = rng;
  try {
    ProgramSet programs = programs_for(s, bug, rng, settings);
    auto m = spectrum(bug, programs, settings.budget);
    out.m_passing = static_cast<int>(m.passing.size());
    out.n_failing = static_cast<int>(m.failing.size());
    out.seed_entities = static_cast<int>(m.failing.front().size());
    auto report = loc::rank(m, bug.ground_truth);
    out.suspicious_count = static_cast<int>(report.suspicious.size());
    out.eliminated_proportion =
        static_cast<double>(out.seed_entities - out.suspicious_count) / out.seed_entities;
    out.rank = report.ground_truth_rank;
    if (!out.rank) out.error = GroundTruthNotCovered(bug.ground_truth).what();
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

/// Summary of the three runs of one strategy on one bug.
struct ExperimentResult {
  std::string bug;
  Strategy strategy = Strategy::Directed;
  std::vector<RunResult> runs;
  std::optional<int> median_rank;  // absent when fewer than two runs ranked the ground truth
  double eliminated_proportion = 0.0;  // median over runs
  int m_passing = 0;                   // from the median run
  int n_failing = 0;
  int suspicious_count = 0;

  bool top_n(int n) const { return median_rank && *median_rank <= n; }
};

namespace detail {

inline constexpr int kUnranked = 1 << 30;

inline ExperimentResult summarize(std::string bug, Strategy s, std::vector<RunResult> runs) {
  ExperimentResult out;
  out.bug = std::move(bug);
  out.strategy = s;
  out.runs = std::move(runs);
  if (out.runs.size() != 3) throw PreconditionError("a summary needs exactly three runs");
  std::array<int, 3> ranks{};
  for (std::size_t i = 0; i < 3; ++i) ranks[i] = out.runs[i].rank.value_or(kUnranked);
  int med = loc::median_rank(ranks);
  if (med != kUnranked) out.median_rank = med;
  // The run whose eliminated proportion is the median supplies the counts.
  std::array<std::size_t, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return out.runs[a].eliminated_proportion < out.runs[b].eliminated_proportion;
  });
  const RunResult& mid = out.runs[idx[1]];
  out.eliminated_proportion = mid.eliminated_proportion;
  out.m_passing = mid.m_passing;
  out.n_failing = mid.n_failing;
  out.suspicious_count = mid.suspicious_count;
  return out;
}

// Runs job(i) for i in [0, count) on up to `jobs` threads. Results are
// written by index, so the order never depends on scheduling.
template <class Job>
void parallel_for(std::size_t count, int jobs, Job&& job) {
  std::size_t workers = std::max(1, jobs);
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Every strategy on every bug, three runs each, one per rng seed.
inline std::vector<ExperimentResult> compare_strategies(const std::vector<jit::Bug>& bugs,
                                                        const std::vector<Strategy>& strategies,
                                                        const std::array<RngSeed, 3>& seeds,
                                                        const ExperimentSettings& settings) {
  std::size_t per_bug = strategies.size() * 3;
  std::vector<RunResult> runs(bugs.size() * per_bug);
  detail::parallel_for(runs.size(), settings.jobs, [&](std::size_t i) {
    const auto& bug = bugs[i / per_bug];
    auto s = strategies[(i % per_bug) / 3];
    runs[i] = localize_run(s, bug, seeds[i % 3], settings);
  });
  std::vector<ExperimentResult> out;
  for (std::size_t b = 0; b < bugs.size(); ++b) {
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      std::size_t first = b * per_bug + s * 3;
      out.push_back(detail::summarize(bugs[b].id, strategies[s],
                                      {runs[first], runs[first + 1], runs[first + 2]}));
    }
  }
  return out;
}

struct SweepCell {
  std::string bug;
  int m = 0;
  int n = 0;  // failing programs including the seed
  int suspicious_count = 0;
  int seed_entities = 0;
  double normalized = 0.0;
};

/// Suspicious-set size for the first m passing and the seed plus the first
/// n-1 failing programs of one pipeline run.
inline std::vector<SweepCell> sweep_counts(const jit::Bug& bug, const std::vector<int>& ms,
                                           int max_n, RngSeed rng, ExperimentSettings settings) {
  if (ms.empty() || max_n < 1) throw PreconditionError("sweep needs at least one m and n >= 1");
  int need = std::max(max_n - 1, *std::max_element(ms.begin(), ms.end()));
  settings.N = 2 * std::max(need, 1);
  ProgramSet programs = directed_programs(bug, rng, settings);
  auto full = spectrum(bug, programs, settings.budget);
  auto seed_entities = static_cast<int>(full.failing.front().size());
  std::vector<SweepCell> out;
  for (int m : ms) {
    for (int n = 1; n <= max_n; ++n) {
      loc::SpectrumMatrix sub;
      sub.passing.assign(full.passing.begin(), full.passing.begin() + m);
      sub.failing.assign(full.failing.begin(), full.failing.begin() + n);
      SweepCell c;
      c.bug = bug.id;
      c.m = m;
      c.n = n;
      c.suspicious_count = static_cast<int>(loc::suspicious_set(sub).size());
      c.seed_entities = seed_entities;
      c.normalized = static_cast<double>(c.suspicious_count) / seed_entities;
      out.push_back(c);
    }
  }
  return out;
}

// ---- reports -----------------------------------------------------------------

/// count/total as a percentage with one decimal, dropping a trailing ".0".
inline std::string percent(int count, int total) {
  if (total <= 0) return "0";
  double tenths = std::round(1000.0 * count / total);
  auto whole = static_cast<long long>(tenths) / 10;
  auto frac = static_cast<long long>(tenths) % 10;
  return frac == 0 ? std::to_string(whole) : std::to_string(whole) + "." + std::to_string(frac);
}

inline std::string format_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline nlohmann::ordered_json to_json(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["bug"] = r.bug;
  j["strategy"] = std::string(to_string(r.strategy));
  j["m_passing"] = r.m_passing;
  j["n_failing"] = r.n_failing;
  j["suspicious_count"] = r.suspicious_count;
  j["eliminated_proportion"] = r.eliminated_proportion;
  nlohmann::ordered_json flags;
  for (int n : loc::kTopN) flags[std::to_string(n)] = r.top_n(n);
  j["top_n_flags"] = flags;
  j["median_rank"] = r.median_rank ? nlohmann::ordered_json(*r.median_rank) : nullptr;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) {
    nlohmann::ordered_json rj;
    rj["rng"] = run.rng;
    rj["m_passing"] = run.m_passing;
    rj["n_failing"] = run.n_failing;
    rj["seed_entities"] = run.seed_entities;
    rj["suspicious_count"] = run.suspicious_count;
    rj["eliminated_proportion"] = run.eliminated_proportion;
    rj["rank"] = run.rank ? nlohmann::ordered_json(*run.rank) : nullptr;
    if (!run.error.empty()) rj["error"] = run.error;
    j["runs"].push_back(std::move(rj));
  }
  return j;
}

inline ExperimentResult result_from_json(const nlohmann::ordered_json& j) {
  ExperimentResult r;
  r.bug = j.at("bug").get<std::string>();
  r.strategy = parse_strategy(j.at("strategy").get<std::string>());
  r.m_passing = j.at("m_passing").get<int>();
  r.n_failing = j.at("n_failing").get<int>();
  r.suspicious_count = j.at("suspicious_count").get<int>();
  r.eliminated_proportion = j.at("eliminated_proportion").get<double>();
  if (!j.at("median_rank").is_null()) r.median_rank = j.at("median_rank").get<int>();
  for (const auto& rj : j.at("runs")) {
    RunResult run;
    run.rng = rj.at("rng").get<RngSeed>();
    run.m_passing = rj.at("m_passing").get<int>();
    run.n_failing = rj.at("n_failing").get<int>();
    run.seed_entities = rj.at("seed_entities").get<int>();
    run.suspicious_count = rj.at("suspicious_count").get<int>();
    run.eliminated_proportion = rj.at("eliminated_proportion").get<double>();
    if (!rj.at("rank").is_null()) run.rank = rj.at("rank").get<int>();
    if (rj.contains("error")) run.error = rj.at("error").get<std::string>();
    r.runs.push_back(std::move(run));
  }
  return r;
}

inline std::string results_csv(const std::vector<ExperimentResult>& results) {
  std::string out =
      "bug,strategy,m_passing,n_failing,suspicious_count,eliminated_proportion,median_rank,"
      "top1,top5,top10,top20\n";
  for (const auto& r : results) {
    out += r.bug + "," + std::string(to_string(r.strategy)) + "," + std::to_string(r.m_passing) +
           "," + std::to_string(r.n_failing) + "," + std::to_string(r.suspicious_count) + "," +
           format_fraction(r.eliminated_proportion) + "," +
           (r.median_rank ? std::to_string(*r.median_rank) : "") + ",";
    for (std::size_t i = 0; i < loc::kTopN.size(); ++i) {
      out += r.top_n(loc::kTopN[i]) ? "1" : "0";
      out += i + 1 < loc::kTopN.size() ? "," : "\n";
    }
  }
  return out;
}

/// Per-strategy Top-n table: counts of bugs and their share of all bugs.
inline std::string summary_table(const std::vector<ExperimentResult>& results) {
  std::vector<Strategy> order;
  std::map<Strategy, std::vector<const ExperimentResult*>> by;
  for (const auto& r : results) {
    if (!by.count(r.strategy)) order.push_back(r.strategy);
    by[r.strategy].push_back(&r);
  }
  std::string out = "| System | Total bugs | Top-1 | Top-5 | Top-10 | Top-20 |\n";
  out += "|---|---|---|---|---|---|\n";
  for (auto s : order) {
    const auto& rows = by[s];
    int total = static_cast<int>(rows.size());
    out += "| " + std::string(to_string(s)) + " | " + std::to_string(total) + " |";
    for (int n : loc::kTopN) {
      int count = static_cast<int>(
          std::count_if(rows.begin(), rows.end(), [n](const auto* r) { return r->top_n(n); }));
      out += " " + std::to_string(count) + " (" + percent(count, total) + "%) |";
    }
    out += "\n";
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string out = "bug,m,n,suspicious_count,seed_entities,normalized\n";
  for (const auto& c : cells) {
    out += c.bug + "," + std::to_string(c.m) + "," + std::to_string(c.n) + "," +
           std::to_string(c.suspicious_count) + "," + std::to_string(c.seed_entities) + "," +
           format_fraction(c.normalized) + "\n";
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("error while writing " + path.string());
}

/// Writes results.csv, results.json and summary.md into `dir`.
inline void emit_report(const std::vector<ExperimentResult>& results,
                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results) j.push_back(to_json(r));
  write_file(dir / "results.csv", results_csv(results));
  write_file(dir / "results.json", j.dump(2) + "\n");
  write_file(dir / "summary.md", summary_table(results));
}

}  // namespace dirloc::harness
