#include "slateopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace slateopt {

namespace {

double log2_discount(int rank_1based) {
  return std::log2(static_cast<double>(rank_1based) + 1.0);
}

}  // namespace

double ndcg_at_k(const Vec& labels, const Slate& slate, int k) {
  if (k < 1 || k > slate.size())
    throw ArgumentError("ndcg_at_k: k must be in [1, slate size]");
  for (int i = 0; i < labels.size(); ++i)
    if (labels[i] < 0.0) throw ArgumentError("ndcg_at_k: negative label");

  double dcg = 0.0;
  for (int t = 0; t < k; ++t) {
    int a = slate.indices[t];
    if (a < 0 || a >= labels.size()) throw ArgumentError("ndcg_at_k: slate index out of range");
    dcg += labels[a] / log2_discount(t + 1);
  }

  std::vector<double> sorted(labels.data(), labels.data() + labels.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double idcg = 0.0;
  for (int t = 0; t < k && t < static_cast<int>(sorted.size()); ++t)
    idcg += sorted[t] / log2_discount(t + 1);

  if (idcg == 0.0) return 0.0;
  return dcg / idcg;
}

double categorical_gap(const Vec& d, const Vec& r) {
  if (d.size() != r.size()) throw DimensionError("categorical_gap: length mismatch");
  return (d - r).cwiseAbs().maxCoeff();
}

double gap(const DistributionalCriteria& criteria, const std::vector<Vec>& r) {
  if (criteria.targets.empty()) throw ArgumentError("gap: no criteria variables");
  if (criteria.targets.size() != r.size())
    throw DimensionError("gap: criteria/distribution count mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j)
    acc += categorical_gap(criteria.targets[j], r[j]);
  return acc / static_cast<double>(r.size());
}

double slate_reward(double ndcg, double gap, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("slate_reward: alpha outside [0,1]");
  return alpha * ndcg - (1.0 - alpha) * gap;
}

double slate_goodness(double ndcg, double gap) {
  return 0.5 * ndcg - 0.5 * gap + 0.5;
}

SlateScore score_slate(const CandidateSet& cands, const Slate& slate,
                       const CategoricalSchema& schema, double alpha, int k) {
  validate_slate(slate, cands);
  Vec labels(cands.size());
  for (int i = 0; i < cands.size(); ++i) labels[i] = cands.items[i].label;

  SlateScore s;
  s.ndcg = ndcg_at_k(labels, slate, k);
  auto r = slate_distribution(slate, cands, schema);
  s.per_variable_gaps.resize(schema.var_count());
  for (int j = 0; j < schema.var_count(); ++j)
    s.per_variable_gaps[j] = categorical_gap(cands.criteria.targets.at(j), r[j]);
  s.gap = s.per_variable_gaps.mean();
  s.reward = slate_reward(s.ndcg, s.gap, alpha);
  s.goodness = slate_goodness(s.ndcg, s.gap);
  return s;
}

}  // namespace slateopt
