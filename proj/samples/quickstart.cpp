// Generates programs for one bug and prints the head of the ranking.
//
//   quickstart [bug-id] [N]

#include <cstdlib>
#include <iostream>
#include <string>

#include "dirloc/bugs.hpp"
#include "dirloc/generator.hpp"
#include "dirloc/harness.hpp"
#include "dirloc/localizer.hpp"

int main(int argc, char** argv) {
  using namespace dirloc;
  std::string id = argc > 1 ? argv[1] : "negzero-fold";
  try {
    const auto& bug = jit::find_bug(id);
    gen::GenerationConfig config;
    config.N = argc > 2 ? std::atoi(argv[2]) : 30;
    auto result = gen::run_pipeline(bug.seed, bug.id, config);

    std::cout << "seed:\n" << result.seed_source << "\ntargets:";
    for (int t : result.report.targets) std::cout << " " << t;
    std::cout << "\n\n";

    harness::ProgramSet programs;
    for (const auto& s : result.selection.passing) programs.passing.push_back(s.program);
    for (const auto& s : result.selection.failing) programs.failing.push_back(s.program);
    auto report = loc::rank(harness::spectrum(bug, programs, config.budget), bug.ground_truth);

    for (std::size_t i = 0; i < report.ranked.size() && i < 5; ++i) {
      const auto& r = report.ranked[i];
      std::cout << r.rank << "\t" << r.score << "\t" << r.entity << "\n";
    }
    std::cout << "\nground truth " << bug.ground_truth << " at rank "
              << report.ground_truth_rank.value_or(-1) << "\n";
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
