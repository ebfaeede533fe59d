#include "slateopt/mmr.hpp"

#include <algorithm>
#include <cmath>

namespace slateopt::mmr {

std::vector<double> MmrConfig::default_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(i * 0.05);
  return g;
}

Vec minmax_normalize(const Vec& scores) {
  if (scores.size() < 1) throw ArgumentError("minmax_normalize: empty input");
  double lo = scores.minCoeff();
  double hi = scores.maxCoeff();
  if (hi == lo) return Vec::Zero(scores.size());
  return (scores.array() - lo) / (hi - lo);
}

namespace {

// Hot index of the item's one-hot slice for variable j.
int category_of(const Item& item, int j, const CategoricalSchema& schema) {
  const auto& f = schema.variables[j];
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < f.size(); ++t) {
    double v = item.features[f[t]];
    if (v > best_v) {
      best_v = v;
      best = static_cast<int>(t);
    }
  }
  return best;
}

}  // namespace

Slate mmr_rerank(const CandidateSet& cands, const CategoricalSchema& schema,
                 const DistributionalCriteria& criteria, double lambda, int k) {
  if (lambda < 0.0 || lambda > 1.0) throw ArgumentError("mmr: lambda outside [0,1]");
  if (k < 1) throw ArgumentError("mmr: k must be >= 1");
  if (cands.real_count() < k)
    throw ArgumentError("mmr: query " + cands.query_id + " has fewer than k real items");
  if (static_cast<int>(criteria.targets.size()) != schema.var_count())
    throw DimensionError("mmr: criteria/schema mismatch");

  const int n = cands.size();
  const int c = schema.var_count();
  Vec raw(n);
  for (int i = 0; i < n; ++i) raw[i] = cands.items[i].base_score;
  Vec s = minmax_normalize(raw);

  std::vector<Vec> budget;  // d'_j, allowed to go negative
  budget.reserve(criteria.targets.size());
  for (const auto& d : criteria.targets) budget.push_back(d);

  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  Slate slate;
  for (int step = 0; step < k; ++step) {
    int pick = -1;
    double pick_value = 0.0, pick_score = 0.0;
    for (int i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)] || cands.items[i].is_padding) continue;
      double fill = 0.0;
      for (int j = 0; j < c; ++j)
        fill += budget[static_cast<std::size_t>(j)][category_of(cands.items[i], j, schema)];
      double value = lambda * s[i] + (1.0 - lambda) * fill / c;
      if (pick < 0 || value > pick_value ||
          (value == pick_value && s[i] > pick_score)) {
        pick = i;
        pick_value = value;
        pick_score = s[i];
      }
    }
    taken[static_cast<std::size_t>(pick)] = 1;
    slate.indices.push_back(pick);
    for (int j = 0; j < c; ++j)
      budget[static_cast<std::size_t>(j)][category_of(cands.items[pick], j, schema)] -=
          1.0 / static_cast<double>(k);
  }
  return slate;
}

SweepResult lambda_sweep(const Dataset& data, const CategoricalSchema& schema,
                         const MmrConfig& cfg, double alpha) {
  const auto& grid = cfg.grid;
  if (grid.empty()) throw ArgumentError("lambda_sweep: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > 1.0) throw ArgumentError("lambda_sweep: grid value outside [0,1]");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw ArgumentError("lambda_sweep: grid must be strictly increasing");
  }

  SweepResult result;
  for (double lambda : grid) {
    SweepRow row;
    row.lambda = lambda;
    row.per_variable_gaps = Vec::Zero(schema.var_count());
    int used = 0;
    for (const auto& q : data.queries) {
      if (q.real_count() < cfg.slate_size) continue;
      Slate slate = mmr_rerank(q, schema, q.criteria, lambda, cfg.slate_size);
      SlateScore sc = score_slate(q, slate, schema, alpha, cfg.slate_size);
      row.ndcg += sc.ndcg;
      row.gap += sc.gap;
      row.per_variable_gaps += sc.per_variable_gaps;
      ++used;
    }
    if (used == 0) throw ArgumentError("lambda_sweep: no query has k real items");
    row.ndcg /= used;
    row.gap /= used;
    row.per_variable_gaps /= used;
    row.goodness = slate_goodness(row.ndcg, row.gap);
    result.rows.push_back(std::move(row));
  }
  result.best = 0;
  for (std::size_t i = 1; i < result.rows.size(); ++i)
    if (result.rows[i].goodness > result.rows[static_cast<std::size_t>(result.best)].goodness)
      result.best = static_cast<int>(i);
  return result;
}

}  // namespace slateopt::mmr
