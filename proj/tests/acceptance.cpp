// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any of them fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dirloc/alignment.hpp"
#include "dirloc/bugs.hpp"
#include "dirloc/engine.hpp"
#include "dirloc/generator.hpp"
#include "dirloc/harness.hpp"
#include "dirloc/localizer.hpp"
#include "dirloc/oracle.hpp"
#include "dirloc/random_program.hpp"

using namespace dirloc;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    if (ok) detail = what;
    ok = false;
  }
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Check()>& body, double limit_s) {
  auto start = std::chrono::steady_clock::now();
  Check c;
  try {
    c = body();
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > limit_s) c.require(false, "took " + std::to_string(secs) + " s, limit " + std::to_string(limit_s));
  if (!c.ok) ++failures;
  std::printf("%s %s  %s (%.3f s)%s%s\n", id, c.ok ? "PASS" : "FAIL", title, secs,
              c.detail.empty() ? "" : "  -- ", c.detail.c_str());
  std::fflush(stdout);
}

std::string join(const std::set<int>& ids) {
  std::string out = "{";
  for (int i : ids) out += (out.size() > 1 ? "," : "") + std::to_string(i);
  return out + "}";
}

// ---- AC4 helpers -------------------------------------------------------------

using Mask = unsigned;

// Entity sets for every mask over entities "e0".."e5".
const std::vector<loc::EntitySet>& entity_sets() {
  static const std::vector<loc::EntitySet> sets = [] {
    std::vector<loc::EntitySet> out(64);
    for (Mask m = 0; m < 64; ++m) {
      for (int b = 0; b < 6; ++b) {
        if (m & (1u << b)) out[m].insert("e" + std::to_string(b));
      }
    }
    return out;
  }();
  return sets;
}

loc::SpectrumMatrix matrix(const std::vector<Mask>& failing, const std::vector<Mask>& passing) {
  loc::SpectrumMatrix out;
  for (Mask m : failing) out.failing.push_back(entity_sets()[m]);
  for (Mask m : passing) out.passing.push_back(entity_sets()[m]);
  return out;
}

Mask to_mask(const loc::EntitySet& s) {
  Mask m = 0;
  for (const auto& e : s) m |= 1u << std::stoi(e.substr(1));
  return m;
}

// Direct evaluation of the definition on bitmasks.
Mask model(const std::vector<Mask>& failing, const std::vector<Mask>& passing) {
  Mask in = ~0u;
  for (Mask f : failing) in &= f;
  Mask out = 0;
  for (Mask p : passing) out |= p;
  return in & ~out;
}

// Visits every multiset of `count` masks below `limit` in non-decreasing order.
void multisets(int count, Mask limit, const std::function<void(const std::vector<Mask>&)>& fn) {
  std::vector<Mask> cur;
  std::function<void(Mask)> rec = [&](Mask from) {
    if (static_cast<int>(cur.size()) == count) {
      fn(cur);
      return;
    }
    for (Mask m = from; m < limit; ++m) {
      cur.push_back(m);
      rec(m);
      cur.pop_back();
    }
  };
  rec(0);
}

// Every system of up to `max_programs - 1` programs over `entities` entities,
// extended by each possible failing and passing program. `evaluate` returns
// the suspicious set of a spectrum as a mask.
template <class Evaluate>
void monotonicity(int entities, int max_programs, Check& c, long& systems, Evaluate&& evaluate) {
  Mask limit = 1u << entities;
  const auto& sets = entity_sets();
  for (int total = 1; total < max_programs; ++total) {
    for (int f = 1; f <= total; ++f) {
      multisets(f, limit, [&](const std::vector<Mask>& failing) {
        multisets(total - f, limit, [&](const std::vector<Mask>& passing) {
          loc::SpectrumMatrix m = matrix(failing, passing);
          Mask base = evaluate(m);
          ++systems;
          for (Mask x = 0; x < limit; ++x) {
            m.failing.push_back(sets[x]);
            Mask a = evaluate(m);
            m.failing.pop_back();
            m.passing.push_back(sets[x]);
            Mask b = evaluate(m);
            m.passing.pop_back();
            c.require((a & ~base) == 0 && (b & ~base) == 0,
                      "set grew after adding a program over " + std::to_string(entities) + " entities");
          }
        });
      });
    }
  }
}

// Same enumeration on the bitmask model alone.
void model_monotonicity(int entities, int max_programs, Check& c, long& systems) {
  Mask limit = 1u << entities;
  for (int total = 1; total < max_programs; ++total) {
    for (int f = 1; f <= total; ++f) {
      multisets(f, limit, [&](const std::vector<Mask>& failing) {
        multisets(total - f, limit, [&](const std::vector<Mask>& passing) {
          Mask base = model(failing, passing);
          ++systems;
          Mask in = ~0u;
          for (Mask m : failing) in &= m;
          Mask out = 0;
          for (Mask m : passing) out |= m;
          for (Mask x = 0; x < limit; ++x) {
            Mask a = in & x & ~out;
            Mask b = in & ~(out | x);
            c.require((a & ~base) == 0 && (b & ~base) == 0,
                      "set grew after adding a program over " + std::to_string(entities) + " entities");
          }
        });
      });
    }
  }
}

// ---- CLI helpers -------------------------------------------------------------

int run(const std::string& args) {
  std::string cmd = std::string(DIRLOC_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

int main() {
  const auto& bugs = jit::bug_registry();
  const std::array<RngSeed, 3> seeds = {1, 2, 3};
  harness::ExperimentSettings settings;  // N = 30

  report("AC1", "suspicious set of the three-program example", [] {
    Check c;
    loc::SpectrumMatrix m;
    m.failing = {{"A", "C", "E", "G", "H"}, {"D", "E", "G", "J", "K"}};
    m.passing = {{"B", "C", "F", "H", "I"}};
    auto s = loc::suspicious_set(m);
    c.require(s == loc::EntitySet{"E", "G"}, "got a different set");
    return c;
  }, 0.001);

  report("AC2", "target ids for the negated-zero example", [] {
    Check c;
    auto seed = lang::parse("let x = y + -0;");
    std::vector<lang::AstNode> mutants = {lang::parse("let x = y + +0;"), lang::parse("let x = y - -0;")};
    auto pass = [](const lang::AstNode&) { return oracle::Verdict::Pass; };
    auto targets = gen::identify_targets(seed, mutants, pass);
    std::set<int> positional;
    for (const auto& m : mutants) {
      auto d = align::positional_diff(seed, m);
      positional.insert(d.begin(), d.end());
    }
    std::set<int> structural;
    lang::walk(seed, [&](const lang::AstNode& n) {
      if (n.kind == lang::NodeKind::BinaryOp || n.kind == lang::NodeKind::UnaryOp) structural.insert(n.id);
    });
    c.require(targets == positional, "alignment " + join(targets) + " vs positional " + join(positional));
    c.require(targets == structural, "targets " + join(targets) + " are not the operator nodes");
    c.detail = c.ok ? "targets " + join(targets) : c.detail;
    return c;
  }, 1.0);

  report("AC3", "Ochiai formula", [] {
    Check c;
    c.require(loc::ochiai(0, 3, 4) == 0.0, "ef = 0 is not 0");
    c.require(loc::ochiai(7, 0, 0) == 1.0, "nf = ep = 0 is not 1");
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
      int ef = rng.between(0, 100), nf = rng.between(0, 100), ep = rng.between(0, 100);
      double expected = ef == 0 ? 0.0 : ef / std::sqrt(double(ef + nf) * double(ef + ep));
      c.require(std::fabs(loc::ochiai(ef, nf, ep) - expected) <= 1e-12, "mismatch on a random triple");
    }
    return c;
  }, 1.0);

  report("AC4", "suspicious set never grows when a program is added", [] {
    Check c;
    long systems = 0;
    // The library itself over five entities; smaller universes are the
    // systems whose masks leave the high bits clear.
    monotonicity(5, 4, c, systems, [](const loc::SpectrumMatrix& m) { return to_mask(loc::suspicious_set(m)); });
    // Six entities: exhaustive on the bitmask model, which the library must
    // agree with on every system of up to four programs built from a
    // random sample.
    model_monotonicity(6, 4, c, systems);
    Rng rng(6);
    for (int i = 0; i < 200000; ++i) {
      std::vector<Mask> f(1 + rng.below(3)), p(rng.below(5 - f.size()));
      for (auto& m : f) m = static_cast<Mask>(rng.below(64));
      for (auto& m : p) m = static_cast<Mask>(rng.below(64));
      c.require(to_mask(loc::suspicious_set(matrix(f, p))) == model(f, p), "library disagrees with model");
    }
    c.detail = c.ok ? std::to_string(systems) + " base systems" : c.detail;
    return c;
  }, 10.0);

  report("AC5", "bug-free optimizer agrees with the interpreter on random programs", [] {
    Check c;
    Rng rng(5);
    int valid = 0, attempts = 0;
    while (valid < 500 && attempts < 5000) {
      ++attempts;
      auto program = lang::random_program(rng);
      auto ref = jit::run_reference(program);
      if (!ref.ok()) continue;
      ++valid;
      auto opt = jit::run_optimized(program, "");
      c.require(jit::same_behavior(ref, opt.observable), "mismatch on:\n" + lang::print(program));
    }
    c.require(valid == 500, "only " + std::to_string(valid) + " valid programs");
    return c;
  }, 60.0);

  report("AC6", "generate and experiment are byte-for-byte reproducible", [] {
    Check c;
    auto root = fs::temp_directory_path() / "dirloc_acceptance";
    fs::remove_all(root);
    std::string seed = std::string(DIRLOC_SAMPLES) + "/negzero-fold.mjs-mini";
    for (const char* run_name : {"a", "b"}) {
      auto dir = root / run_name;
      int g = run("generate --seed " + seed + " --bug negzero-fold -N 30 --rng 1 -o " + (dir / "gen").string());
      int e = run("experiment --suite fixture --strategies all -N 30 --seeds 1,2,3 --sweep -o " +
                  (dir / "exp").string());
      c.require(g == 0 && e == 0, "CLI exited with " + std::to_string(g) + "/" + std::to_string(e));
    }
    if (c.ok) {
      auto a = snapshot(root / "a");
      auto b = snapshot(root / "b");
      c.require(!a.empty() && a == b, "outputs differ");
      c.detail = std::to_string(a.size()) + " files identical";
    }
    fs::remove_all(root);
    return c;
  }, 300.0);

  report("AC7", "suspicious count falls with more failing programs", [&] {
    Check c;
    int sharp = 0;
    std::string trend;
    for (const auto& bug : bugs) {
      auto cells = harness::sweep_counts(bug, {5, 10, 15}, 15, seeds[0], settings);
      std::map<int, std::map<int, double>> by_m;
      for (const auto& cell : cells) by_m[cell.m][cell.n] = cell.normalized;
      for (const auto& [m, row] : by_m) {
        for (int n = 2; n <= 15; ++n) {
          c.require(row.at(n) <= row.at(n - 1), bug.id + " not monotone at m=" + std::to_string(m));
        }
      }
      const auto& row = by_m.at(15);
      if (row.at(5) <= 0.5 * row.at(1)) ++sharp;
      char buf[96];
      std::snprintf(buf, sizeof buf, " %s %.3f->%.3f", bug.id.c_str(), row.at(1), row.at(5));
      trend += buf;
    }
    c.require(sharp >= 4, "n=5 at most half of n=1 on only " + std::to_string(sharp) + " bugs");
    if (c.ok) c.detail = std::to_string(sharp) + "/" + std::to_string(bugs.size()) + " sharp;" + trend;
    return c;
  }, 300.0);

  std::vector<harness::ExperimentResult> results;
  auto comparison = [&]() -> const std::vector<harness::ExperimentResult>& {
    if (results.empty()) {
      std::vector<harness::Strategy> all(harness::kAllStrategies.begin(), harness::kAllStrategies.end());
      results = harness::compare_strategies(bugs, all, seeds, settings);
    }
    return results;
  };

  report("AC8", "directed generation eliminates the most entities", [&] {
    Check c;
    std::map<harness::Strategy, std::vector<double>> props;
    for (const auto& r : comparison()) props[r.strategy].push_back(r.eliminated_proportion);
    double directed = median(props[harness::Strategy::Directed]);
    std::string line;
    for (auto s : harness::kAllStrategies) {
      double m = median(props[s]);
      char buf[64];
      std::snprintf(buf, sizeof buf, " %s=%.3f", std::string(harness::to_string(s)).c_str(), m);
      line += buf;
      c.require(directed >= m, std::string(harness::to_string(s)) + " beats Directed");
    }
    if (c.ok) c.detail = "median" + line;
    return c;
  }, 600.0);

  report("AC9", "directed generation ranks the ground truth highest", [&] {
    Check c;
    std::map<harness::Strategy, std::array<int, 2>> counts;
    for (const auto& r : comparison()) {
      counts[r.strategy][0] += r.top_n(1) ? 1 : 0;
      counts[r.strategy][1] += r.top_n(5) ? 1 : 0;
    }
    auto directed = counts[harness::Strategy::Directed];
    c.require(directed[1] >= 4, "Directed Top-5 on " + std::to_string(directed[1]) + " bugs");
    std::string line;
    for (auto s : harness::kAllStrategies) {
      line += " " + std::string(harness::to_string(s)) + "=" + std::to_string(counts[s][0]) + "/" +
              std::to_string(counts[s][1]);
      c.require(directed[0] >= counts[s][0] && directed[1] >= counts[s][1],
                std::string(harness::to_string(s)) + " has more Top-1 or Top-5 hits");
    }
    if (c.ok) c.detail = "top1/top5" + line;
    return c;
  }, 600.0);

  report("AC10", "pipeline yields N/2 passing and N/2 failing programs", [&] {
    Check c;
    for (const auto& bug : bugs) {
      gen::GenerationConfig config;
      config.N = 30;
      auto r = gen::run_pipeline(bug.seed, bug.id, config);
      c.require(r.selection.passing.size() == 15 && r.selection.failing.size() == 15, bug.id + " counts");
      c.require(r.programs().size() == 31 && r.programs().front() == r.seed_source, bug.id + " seed missing");
      c.require(oracle::classify(r.seed, bug.id).verdict == oracle::Verdict::Fail, bug.id + " seed passes");
      std::set<std::string> distinct;
      for (const auto& s : r.selection.passing) {
        c.require(oracle::classify(s.program, bug.id).verdict == oracle::Verdict::Pass, bug.id + " passing");
        auto d = align::positional_diff(r.seed, s.program);
        c.require(d.size() == 1 && r.report.targets.count(*d.begin()),
                  bug.id + " passing program not a single target change");
        distinct.insert(s.source);
      }
      for (const auto& s : r.selection.failing) {
        c.require(oracle::classify(s.program, bug.id).verdict == oracle::Verdict::Fail, bug.id + " failing");
        distinct.insert(s.source);
      }
      c.require(distinct.size() == 30, bug.id + " has duplicate programs");
    }
    return c;
  }, 300.0);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
