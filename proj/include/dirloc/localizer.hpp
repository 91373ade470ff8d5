#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirloc/errors.hpp"

namespace dirloc::loc {

using EntitySet = std::set<std::string>;

/// Coverage of every program used for localization. The seed belongs in
/// `failing` like any other failing program.
struct SpectrumMatrix {
  std::vector<EntitySet> failing;
  std::vector<EntitySet> passing;

  EntitySet universe() const {
    EntitySet all;
    for (const auto& s : failing) all.insert(s.begin(), s.end());
    for (const auto& s : passing) all.insert(s.begin(), s.end());
    return all;
  }
};

/// Entities covered by every failing program and by no passing program.
inline EntitySet suspicious_set(const SpectrumMatrix& m) {
  if (m.failing.empty()) throw PreconditionError("suspicious_set needs at least one failing program");
  EntitySet out = m.failing.front();
  for (std::size_t i = 1; i < m.failing.size(); ++i) {
    EntitySet keep;
    std::set_intersection(out.begin(), out.end(), m.failing[i].begin(), m.failing[i].end(),
                          std::inserter(keep, keep.end()));
    out = std::move(keep);
  }
  for (const auto& p : m.passing) {
    for (const auto& e : p) out.erase(e);
  }
  return out;
}

/// ef / sqrt((ef + nf) * (ef + ep)), zero when ef is zero.
inline double ochiai(int ef, int nf, int ep) {
  if (ef < 0 || nf < 0 || ep < 0) throw PreconditionError("ochiai counts must be non-negative");
  if (ef == 0) return 0.0;
  return ef / std::sqrt(static_cast<double>(ef + nf) * static_cast<double>(ef + ep));
}

struct RankedEntity {
  std::string entity;
  int ef = 0;
  int nf = 0;
  int ep = 0;
  double score = 0.0;
  int rank = 0;
};

struct SuspiciousnessReport {
  std::vector<RankedEntity> ranked;
  EntitySet suspicious;
  std::optional<std::string> ground_truth;
  std::optional<int> ground_truth_rank;

  std::optional<int> rank_of(const std::string& entity) const {
    for (const auto& r : ranked) {
      if (r.entity == entity) return r.rank;
    }
    return std::nullopt;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["ranked"] = nlohmann::ordered_json::array();
    for (const auto& r : ranked) {
      j["ranked"].push_back({{"entity", r.entity}, {"score", r.score}, {"rank", r.rank}});
    }
    j["suspicious_set"] = suspicious;
    j["ground_truth"] = ground_truth ? nlohmann::ordered_json(*ground_truth) : nullptr;
    j["ground_truth_rank"] = ground_truth_rank ? nlohmann::ordered_json(*ground_truth_rank) : nullptr;
    return j;
  }

  std::string to_csv() const {
    std::string out = "entity,ef,nf,ep,score,rank\n";
    for (const auto& r : ranked) {
      char score[32];
      std::snprintf(score, sizeof score, "%.6f", r.score);
      out += r.entity + "," + std::to_string(r.ef) + "," + std::to_string(r.nf) + "," +
             std::to_string(r.ep) + "," + score + "," + std::to_string(r.rank) + "\n";
    }
    return out;
  }
};

/// Ochiai ranking over every entity covered by some program. Equal scores
/// share the worst position of their block; names order entities within it.
inline SuspiciousnessReport rank(const SpectrumMatrix& m,
                                 std::optional<std::string> ground_truth = std::nullopt) {
  SuspiciousnessReport out;
  auto total_failing = static_cast<int>(m.failing.size());
  for (const auto& e : m.universe()) {
    RankedEntity r;
    r.entity = e;
    for (const auto& s : m.failing) r.ef += s.count(e) ? 1 : 0;
    for (const auto& s : m.passing) r.ep += s.count(e) ? 1 : 0;
    r.nf = total_failing - r.ef;
    r.score = ochiai(r.ef, r.nf, r.ep);
    out.ranked.push_back(std::move(r));
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const RankedEntity& a, const RankedEntity& b) { return a.score > b.score; });
  for (std::size_t i = 0; i < out.ranked.size();) {
    std::size_t j = i;
    while (j < out.ranked.size() && out.ranked[j].score == out.ranked[i].score) ++j;
    for (std::size_t k = i; k < j; ++k) out.ranked[k].rank = static_cast<int>(j);
    i = j;
  }
  if (!m.failing.empty()) out.suspicious = suspicious_set(m);
  if (ground_truth) {
    out.ground_truth = ground_truth;
    out.ground_truth_rank = out.rank_of(*ground_truth);
  }
  return out;
}

inline constexpr std::array<int, 4> kTopN = {1, 5, 10, 20};

/// True when the ground truth sits within the first n positions.
inline bool top_n(const SuspiciousnessReport& report, const std::string& ground_truth, int n) {
  auto r = report.rank_of(ground_truth);
  if (!r) throw GroundTruthNotCovered(ground_truth);
  return *r <= n;
}

inline int median_rank(std::array<int, 3> ranks) {
  std::sort(ranks.begin(), ranks.end());
  return ranks[1];
}

}  // namespace dirloc::loc
