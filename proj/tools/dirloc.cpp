// Command-line front end for generation, localization and experiments.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dirloc/alignment.hpp"
#include "dirloc/bugs.hpp"
#include "dirloc/engine.hpp"
#include "dirloc/generator.hpp"
#include "dirloc/harness.hpp"
#include "dirloc/localizer.hpp"
#include "dirloc/oracle.hpp"
#include "dirloc/parser.hpp"
#include "dirloc/printer.hpp"
#include "dirloc/rules.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dirloc;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

// Bad flags or config values; reported like a CLI11 parse error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Settings shared by the subcommands. Flags win over the config file, which
// wins over the defaults below.
struct Config {
  int N = 30;
  RngSeed rng = 1;
  std::string bug;
  std::uint64_t budget = jit::kDefaultStepBudget;
  std::optional<fs::path> output;  // subcommands pick their own default
  int jobs = 1;
  align::AlignmentParams alignment;
  mutation::RuleSet rules = mutation::RuleSet::standard();

  void validate() const {
    if (N < 2 || N % 2 != 0) throw UsageError("N must be even and at least 2, got " + std::to_string(N));
    if (budget == 0) throw UsageError("budget must be positive");
    if (jobs < 1) throw UsageError("jobs must be at least 1");
    try {
      alignment.validate();
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
    if (!bug.empty()) {
      try {
        jit::require_known_bug(bug);
      } catch (const UnknownBug& e) {
        throw UsageError(e.what());
      }
    }
  }
};

std::vector<lang::Payload> pool_from_json(const std::string& group, const json& values) {
  if (!values.is_array()) throw UsageError("pool '" + group + "' must be an array");
  std::vector<lang::Payload> out;
  for (const auto& v : values) {
    if (group == "float-value" && v.is_number()) {
      out.emplace_back(v.get<double>());
    } else if (v.is_number_integer()) {
      out.emplace_back(v.get<std::int64_t>());
    } else if (v.is_number()) {
      out.emplace_back(v.get<double>());
    } else if (v.is_string()) {
      out.emplace_back(v.get<std::string>());
    } else if (v.is_boolean()) {
      out.emplace_back(v.get<bool>());
    } else {
      throw UsageError("unsupported value in pool '" + group + "'");
    }
  }
  return out;
}

void apply_config_file(Config& c, const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path.string() + " must hold a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "N") {
        c.N = value.get<int>();
      } else if (key == "rng_seed") {
        c.rng = value.get<RngSeed>();
      } else if (key == "bug") {
        c.bug = value.get<std::string>();
      } else if (key == "budget") {
        c.budget = value.get<std::uint64_t>();
      } else if (key == "output") {
        c.output = value.get<std::string>();
      } else if (key == "jobs") {
        c.jobs = value.get<int>();
      } else if (key == "alignment") {
        c.alignment.match_score = value.value("match_score", c.alignment.match_score);
        c.alignment.mismatch_penalty = value.value("mismatch_penalty", c.alignment.mismatch_penalty);
        c.alignment.gap_penalty = value.value("gap_penalty", c.alignment.gap_penalty);
      } else if (key == "pools") {
        for (const auto& [group, values] : value.items()) {
          c.rules = c.rules.with_pool(group, pool_from_json(group, values));
        }
      } else {
        throw UsageError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
}

// Options that several subcommands accept; values are only applied when the
// flag was given, so the config file can fill the rest.
struct SharedFlags {
  int N = 0;
  RngSeed rng = 0;
  std::string bug;
  std::uint64_t budget = 0;
  std::string output;
  int jobs = 0;

  // One entry per subcommand that declares the flag.
  std::vector<CLI::Option*> n_opt, rng_opt, bug_opt, budget_opt, output_opt, jobs_opt;

  static bool given(const std::vector<CLI::Option*>& opts) {
    return std::any_of(opts.begin(), opts.end(), [](const CLI::Option* o) { return o->count() > 0; });
  }

  void apply(Config& c) const {
    if (given(n_opt)) c.N = N;
    if (given(rng_opt)) c.rng = rng;
    if (given(bug_opt)) c.bug = bug;
    if (given(budget_opt)) c.budget = budget;
    if (given(output_opt)) c.output = output;
    if (given(jobs_opt)) c.jobs = jobs;
  }
};

void add_bug(CLI::App* cmd, SharedFlags& f) {
  f.bug_opt.push_back(cmd->add_option("--bug", f.bug, "Bug id from the registry (see `bugs`)"));
}
void add_budget(CLI::App* cmd, SharedFlags& f) {
  f.budget_opt.push_back(cmd->add_option("--budget", f.budget, "Interpreter step budget per run"));
}
void add_n(CLI::App* cmd, SharedFlags& f) {
  f.n_opt.push_back(cmd->add_option("-N", f.N, "Number of programs to generate (even)"));
}
void add_rng(CLI::App* cmd, SharedFlags& f) {
  f.rng_opt.push_back(cmd->add_option("--rng", f.rng, "Random seed"));
}
void add_output(CLI::App* cmd, SharedFlags& f) {
  f.output_opt.push_back(cmd->add_option("-o,--output", f.output, "Output directory"));
}

const jit::Bug& need_bug(const Config& c) {
  if (c.bug.empty()) throw UsageError("--bug is required");
  return jit::find_bug(c.bug);
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

void create_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu.mjs-mini", prefix, i);
  return buf;
}

// ---- subcommands ------------------------------------------------------------

int cmd_bugs(bool as_json) {
  if (as_json) {
    json arr = json::array();
    for (const auto& b : jit::bug_registry()) {
      arr.push_back({{"id", b.id}, {"ground_truth", b.ground_truth}, {"summary", b.summary}});
    }
    print_json(arr);
    return kOk;
  }
  for (const auto& b : jit::bug_registry()) {
    std::cout << b.id << "\t" << b.ground_truth << "\t" << b.summary << "\n";
  }
  return kOk;
}

int cmd_run(const std::string& file, const std::string& mode, const Config& c) {
  auto program = lang::parse(read_file(file));
  json j;
  if (mode == "reference") {
    j["mode"] = "reference";
    j["observable"] = jit::run_reference(program, c.budget).to_json();
  } else {
    jit::require_known_bug(c.bug);
    auto r = jit::run_optimized(program, c.bug, c.budget);
    j["mode"] = "optimized";
    j["bug"] = c.bug.empty() ? json(nullptr) : json(c.bug);
    j["observable"] = r.observable.to_json();
    j["trace"] = r.trace.to_json();
  }
  print_json(j);
  return kOk;
}

int cmd_diff(const std::string& seed_file, const std::vector<std::string>& others, const Config& c) {
  auto seed = lang::parse(read_file(seed_file));
  std::vector<lang::AstNode> mutants;
  for (const auto& f : others) mutants.push_back(lang::parse(read_file(f)));
  auto ids = align::ast_diff(seed, mutants, c.alignment);
  print_json({{"targets", ids}});
  return kOk;
}

int cmd_generate(const std::string& seed_file, const Config& c) {
  const auto& bug = need_bug(c);
  gen::GenerationConfig g;
  g.N = c.N;
  g.rng = c.rng;
  g.budget = c.budget;
  g.alignment = c.alignment;
  g.rules = c.rules;
  auto result = gen::run_pipeline(read_file(seed_file), bug.id, g);

  fs::path dir = c.output.value_or("out");
  create_dir(dir);
  json files = {{"passing", json::array()}, {"failing", json::array()}};
  for (std::size_t i = 0; i < result.selection.passing.size(); ++i) {
    auto name = numbered("pass", i);
    harness::write_file(dir / name, result.selection.passing[i].source);
    files["passing"].push_back(name);
  }
  for (std::size_t i = 0; i < result.selection.failing.size(); ++i) {
    auto name = numbered("fail", i);
    harness::write_file(dir / name, result.selection.failing[i].source);
    files["failing"].push_back(name);
  }
  json report;
  report["bug"] = bug.id;
  report["N"] = c.N;
  report["rng"] = c.rng;
  report["seed_source"] = result.seed_source;
  report["pipeline"] = result.report.to_json();
  report["files"] = files;
  auto sims = [](const std::vector<gen::Scored>& xs) {
    json a = json::array();
    for (const auto& s : xs) a.push_back(s.similarity);
    return a;
  };
  report["similarity"] = {{"passing", sims(result.selection.passing)},
                          {"failing", sims(result.selection.failing)}};
  harness::write_file(dir / "report.json", report.dump(2) + "\n");
  std::cout << "wrote " << result.selection.passing.size() << " passing and "
            << result.selection.failing.size() << " failing programs to " << dir.string() << "\n";
  return kOk;
}

int cmd_localize(const fs::path& dir, const std::string& seed_file, const Config& c) {
  const auto& bug = need_bug(c);
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  // The seed comes from --seed, else from a generate report, else the registry.
  std::string seed = bug.seed;
  if (!seed_file.empty()) {
    seed = read_file(seed_file);
  } else if (fs::exists(dir / "report.json")) {
    auto r = json::parse(read_file(dir / "report.json"));
    if (r.contains("seed_source")) seed = r.at("seed_source").get<std::string>();
  }
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".mjs-mini") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<std::string> sources;
  for (const auto& p : paths) sources.push_back(read_file(p));

  auto seed_verdict = oracle::classify(seed, bug.id, c.budget);
  if (seed_verdict.verdict != oracle::Verdict::Fail) {
    throw PreconditionError("seed program does not fail under bug '" + bug.id + "'");
  }
  auto part = oracle::partition(sources, bug.id, c.budget);
  loc::SpectrumMatrix m;
  m.failing.push_back(seed_verdict.trace.entities());
  for (const auto& s : part.failing) m.failing.push_back(oracle::classify(s, bug.id, c.budget).trace.entities());
  for (const auto& s : part.passing) m.passing.push_back(oracle::classify(s, bug.id, c.budget).trace.entities());
  auto report = loc::rank(m, bug.ground_truth);

  fs::path out = c.output.value_or(dir);
  create_dir(out);
  json j = report.to_json();
  j["bug"] = bug.id;
  j["programs"] = {{"passing", part.passing.size()},
                   {"failing", part.failing.size() + 1},
                   {"invalid", part.invalid.size()}};
  harness::write_file(out / "ranking.json", j.dump(2) + "\n");
  harness::write_file(out / "ranking.csv", report.to_csv());
  std::cout << "ground truth " << bug.ground_truth << " ranked "
            << (report.ground_truth_rank ? std::to_string(*report.ground_truth_rank) : "nowhere") << " of "
            << report.ranked.size() << "; wrote " << (out / "ranking.json").string() << "\n";
  return kOk;
}

std::vector<RngSeed> parse_seeds(const std::string& text) {
  std::vector<RngSeed> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad seed '" + item + "' in --seeds");
    }
  }
  return out;
}

int cmd_experiment(const std::string& suite, const std::string& strategies, const std::string& seeds,
                   const std::string& only_bugs, bool sweep, const Config& c) {
  if (suite != "fixture") throw UsageError("unknown suite '" + suite + "'");
  auto rngs = parse_seeds(seeds);
  if (rngs.size() != 3) throw UsageError("--seeds needs exactly three values");
  std::vector<harness::Strategy> chosen;
  if (strategies == "all") {
    chosen.assign(harness::kAllStrategies.begin(), harness::kAllStrategies.end());
  } else {
    std::stringstream s(strategies);
    std::string item;
    while (std::getline(s, item, ',')) {
      try {
        chosen.push_back(harness::parse_strategy(item));
      } catch (const PreconditionError& e) {
        throw UsageError(e.what());
      }
    }
  }
  std::vector<jit::Bug> bugs;
  if (only_bugs.empty()) {
    bugs = jit::bug_registry();
  } else {
    std::stringstream s(only_bugs);
    std::string item;
    while (std::getline(s, item, ',')) bugs.push_back(jit::find_bug(item));
  }

  harness::ExperimentSettings settings;
  settings.N = c.N;
  settings.budget = c.budget;
  settings.jobs = c.jobs;
  settings.alignment = c.alignment;
  settings.rules = c.rules;
  auto results = harness::compare_strategies(bugs, chosen, {rngs[0], rngs[1], rngs[2]}, settings);
  fs::path dir = c.output.value_or("out");
  harness::emit_report(results, dir);
  if (sweep) {
    std::vector<harness::SweepCell> cells;
    for (const auto& b : bugs) {
      try {
        auto part = harness::sweep_counts(b, {5, 10, 15}, 15, rngs[0], settings);
        cells.insert(cells.end(), part.begin(), part.end());
      } catch (const Error& e) {
        std::cerr << "sweep skipped for " << b.id << ": " << e.what() << "\n";
      }
    }
    harness::write_file(dir / "sweep.csv", harness::sweep_csv(cells));
  }
  std::cout << harness::summary_table(results);
  return kOk;
}

void print_domain_error(const std::string& kind, const std::string& message) {
  json j = {{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
  if (dynamic_cast<const NoPassingFound*>(&e)) return "NoPassingFound";
  if (dynamic_cast<const InsufficientCandidates*>(&e)) return "InsufficientCandidates";
  if (dynamic_cast<const GroundTruthNotCovered*>(&e)) return "GroundTruthNotCovered";
  if (dynamic_cast<const UnknownBug*>(&e)) return "UnknownBug";
  if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
  if (dynamic_cast<const IndexOutOfRange*>(&e)) return "IndexOutOfRange";
  return "Error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed test program generation and bug localization for a mini JIT"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_file;
  app.add_option("--config", config_file, "JSON config file (flags override it)")->check(CLI::ExistingFile);

  SharedFlags f;
  std::string file, mode = "optimized", seed_file, programs_dir;
  std::vector<std::string> mutants;
  bool as_json = false;

  auto* ast = app.add_subcommand("ast", "Print the numbered syntax tree of a program as JSON");
  ast->add_option("file", file, "Program file")->required();

  auto* rules = app.add_subcommand("rules", "Print the mutation rule table as JSON");

  auto* run = app.add_subcommand("run", "Execute a program and print its observable behavior");
  run->add_option("file", file, "Program file")->required();
  run->add_option("--mode", mode, "reference or optimized")->check(CLI::IsMember({"reference", "optimized"}));
  add_bug(run, f);
  add_budget(run, f);

  auto* classify = app.add_subcommand("classify", "Differential verdict of one program");
  classify->add_option("file", file, "Program file")->required();
  add_bug(classify, f);
  add_budget(classify, f);

  auto* diff = app.add_subcommand("diff", "Seed node ids that differ from the given mutants");
  diff->add_option("seed", file, "Seed program")->required();
  diff->add_option("mutants", mutants, "Mutant programs")->required();

  auto* generate = app.add_subcommand("generate", "Generate directed passing and failing programs");
  generate->add_option("--seed", seed_file, "Seed program that triggers the bug")->required();
  add_bug(generate, f);
  add_n(generate, f);
  add_rng(generate, f);
  add_output(generate, f);
  add_budget(generate, f);

  auto* localize = app.add_subcommand("localize", "Rank optimizer functions from a program directory");
  localize->add_option("--programs", programs_dir, "Directory with .mjs-mini programs")->required();
  localize->add_option("--seed", seed_file, "Seed program (default: report.json, then the registry)");
  add_bug(localize, f);
  add_output(localize, f);
  add_budget(localize, f);

  std::string suite = "fixture", strategies = "all", seeds = "1,2,3", only_bugs;
  bool sweep = false;
  auto* experiment = app.add_subcommand("experiment", "Compare generation strategies on the bug suite");
  experiment->add_option("--suite", suite, "Bug suite (only `fixture`)");
  experiment->add_option("--strategies", strategies,
                         "`all` or a comma list of directed, random, single-failing, same-mutation");
  experiment->add_option("--seeds", seeds, "Three comma-separated random seeds");
  experiment->add_option("--bugs", only_bugs, "Comma list of bug ids (default: all)");
  experiment->add_flag("--sweep", sweep, "Also write sweep.csv with suspicious counts per (m, n)");
  add_n(experiment, f);
  add_output(experiment, f);
  add_budget(experiment, f);
  f.jobs_opt.push_back(experiment->add_option("--jobs", f.jobs, "Worker threads"));

  auto* bugs = app.add_subcommand("bugs", "List the injectable bugs");
  bugs->add_flag("--json", as_json, "Print JSON instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  Config c;
  try {
    if (!config_file.empty()) apply_config_file(c, config_file);
    f.apply(c);
    c.validate();

    if (ast->parsed()) {
      print_json(lang::to_json(lang::parse(read_file(file))));
      return kOk;
    }
    if (rules->parsed()) {
      print_json(c.rules.to_json());
      return kOk;
    }
    if (run->parsed()) return cmd_run(file, mode, c);
    if (classify->parsed()) {
      print_json(oracle::classify(read_file(file), c.bug.empty() ? "" : need_bug(c).id, c.budget).to_json());
      return kOk;
    }
    if (diff->parsed()) return cmd_diff(file, mutants, c);
    if (generate->parsed()) return cmd_generate(seed_file, c);
    if (localize->parsed()) return cmd_localize(programs_dir, seed_file, c);
    if (experiment->parsed()) return cmd_experiment(suite, strategies, seeds, only_bugs, sweep, c);
    if (bugs->parsed()) return cmd_bugs(as_json);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kUsageError;
  } catch (const Error& e) {
    print_domain_error(error_kind(e), e.what());
    return kDomainError;
  }
  return kUsageError;
}
