#pragma once

#include <cstdint>
#include <string_view>

#include "dirloc/ast.hpp"
#include "dirloc/bugs.hpp"
#include "dirloc/interpreter.hpp"
#include "dirloc/ir.hpp"
#include "dirloc/optimizer.hpp"
#include "dirloc/parser.hpp"
#include "dirloc/trace.hpp"

namespace dirloc::jit {

/// Plain interpretation, no optimizer involved.
inline Observable run_reference(const lang::AstNode& program,
                                std::uint64_t budget = kDefaultStepBudget) {
  return execute(lower(program), budget);
}

inline Observable run_reference(std::string_view source,
                                std::uint64_t budget = kDefaultStepBudget) {
  return run_reference(lang::parse(source), budget);
}

struct OptimizedRun {
  Observable observable;
  CoverageTrace trace;
};

/// Both execution modes of one program. The reference run doubles as the
/// profiling run whose type feedback drives the optimizer.
struct DualRun {
  Observable reference;
  Observable optimized;
  CoverageTrace trace;
};

inline DualRun run_both(const lang::AstNode& program, std::string_view bug,
                        std::uint64_t budget = kDefaultStepBudget) {
  require_known_bug(bug);
  DualRun out;
  Module m = lower(program, &out.trace);
  Profile profile;
  out.reference = execute(m, budget, &profile);
  optimize(m, profile, bug, out.trace, out.reference.ok());
  out.optimized = execute(m, budget);
  return out;
}

/// `bug` is a registered id, or empty for the correct optimizer.
inline OptimizedRun run_optimized(const lang::AstNode& program, std::string_view bug,
                                  std::uint64_t budget = kDefaultStepBudget) {
  DualRun r = run_both(program, bug, budget);
  return {std::move(r.optimized), std::move(r.trace)};
}

inline OptimizedRun run_optimized(std::string_view source, std::string_view bug,
                                  std::uint64_t budget = kDefaultStepBudget) {
  return run_optimized(lang::parse(source), bug, budget);
}

}  // namespace dirloc::jit
