#pragma once

#include "slateopt/letor.hpp"
#include "slateopt/metrics.hpp"
#include "slateopt/types.hpp"

namespace slateopt::mmr {

struct MmrConfig {
  double lambda = 0.5;
  int slate_size = 10;
  std::vector<double> grid;  // default 0, 0.05, ..., 1

  static std::vector<double> default_grid();
};

// (s - min) / (max - min); a constant input maps to all zeros.
Vec minmax_normalize(const Vec& scores);

// Greedy selection maximizing lambda*s'[i] + (1-lambda)*mean_j d'_j[cat_j(i)]
// over unselected items, ties broken by larger s'[i] then lower index. After
// each pick the chosen categories' budgets drop by 1/k (and may go negative).
Slate mmr_rerank(const CandidateSet& cands, const CategoricalSchema& schema,
                 const DistributionalCriteria& criteria, double lambda, int k);

struct SweepRow {
  double lambda = 0.0;
  double ndcg = 0.0;
  double gap = 0.0;
  double goodness = 0.0;
  Vec per_variable_gaps;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int best = -1;  // argmax goodness

  const SweepRow& best_row() const { return rows.at(static_cast<std::size_t>(best)); }
};

// Mean test metrics per lambda over every query with >= k real items.
SweepResult lambda_sweep(const Dataset& data, const CategoricalSchema& schema,
                         const MmrConfig& cfg, double alpha);

}  // namespace slateopt::mmr
