#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dirloc/engine.hpp"
#include "dirloc/errors.hpp"
#include "dirloc/parser.hpp"

namespace dirloc::oracle {

enum class Verdict { Pass, Fail, Invalid };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Invalid: return "invalid";
  }
  return "?";
}

struct OracleVerdict {
  Verdict verdict = Verdict::Invalid;
  std::optional<jit::Observable> reference;  // absent on parse errors
  std::optional<jit::Observable> optimized;  // absent when Invalid
  jit::CoverageTrace trace;                  // optimizer coverage of the optimized run
  std::string reason;                        // why a program is Invalid

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["verdict"] = std::string(to_string(verdict));
    if (reference) j["reference"] = reference->to_json();
    if (optimized) j["optimized"] = optimized->to_json();
    if (!reason.empty()) j["reason"] = reason;
    if (optimized) j["trace"] = trace.to_json();
    return j;
  }
};

/// Differential check of one program. A reference run that ends in an error,
/// including the step limit, makes the program Invalid.
inline OracleVerdict classify(const lang::AstNode& program, std::string_view bug,
                              std::uint64_t budget = jit::kDefaultStepBudget) {
  jit::require_known_bug(bug);
  OracleVerdict out;
  jit::DualRun run = jit::run_both(program, bug, budget);
  out.reference = std::move(run.reference);
  if (!out.reference->ok()) {
    out.reason = "reference run ended with " + std::string(jit::to_string(*out.reference->error));
    return out;
  }
  out.optimized = std::move(run.optimized);
  out.trace = std::move(run.trace);
  out.verdict = jit::same_behavior(*out.reference, *out.optimized) ? Verdict::Pass : Verdict::Fail;
  return out;
}

inline OracleVerdict classify(std::string_view source, std::string_view bug,
                              std::uint64_t budget = jit::kDefaultStepBudget) {
  jit::require_known_bug(bug);
  try {
    return classify(lang::parse(source), bug, budget);
  } catch (const SyntaxError& e) {
    OracleVerdict out;
    out.reason = e.what();
    return out;
  }
}

struct Partition {
  std::vector<std::string> passing;
  std::vector<std::string> failing;
  std::vector<std::string> invalid;
};

inline Partition partition(const std::vector<std::string>& programs, std::string_view bug,
                           std::uint64_t budget = jit::kDefaultStepBudget) {
  Partition out;
  for (const auto& p : programs) {
    switch (classify(p, bug, budget).verdict) {
      case Verdict::Pass: out.passing.push_back(p); break;
      case Verdict::Fail: out.failing.push_back(p); break;
      case Verdict::Invalid: out.invalid.push_back(p); break;
    }
  }
  return out;
}

}  // namespace dirloc::oracle
