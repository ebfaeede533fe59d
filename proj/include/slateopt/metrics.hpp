#pragma once

#include "slateopt/types.hpp"

namespace slateopt {

/// All per-slate quality scalars for one query.
struct SlateScore {
  double ndcg = 0.0;
  double gap = 0.0;
  Vec per_variable_gaps;
  double reward = 0.0;    // alpha * ndcg - (1 - alpha) * gap
  double goodness = 0.0;  // 0.5 * ndcg - 0.5 * gap + 0.5
};

// nDCG over the slate's first k positions with gain = raw label and log2
// discount; the ideal DCG takes the k largest labels of the full candidate
// set. Returns 0 when the ideal DCG is 0.
double ndcg_at_k(const Vec& labels, const Slate& slate, int k);

// L-infinity distance between a realized distribution and its target.
double categorical_gap(const Vec& d, const Vec& r);

// Mean of the per-variable categorical gaps.
double gap(const DistributionalCriteria& criteria, const std::vector<Vec>& r);

double slate_reward(double ndcg, double gap, double alpha);

double slate_goodness(double ndcg, double gap);

SlateScore score_slate(const CandidateSet& cands, const Slate& slate,
                       const CategoricalSchema& schema, double alpha, int k);

}  // namespace slateopt
