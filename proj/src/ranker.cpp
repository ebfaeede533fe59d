#include "slateopt/ranker.hpp"

#include <Eigen/Dense>

namespace slateopt {

LinearRanker LinearRanker::fit(const Dataset& train, double ridge) {
  int rows = 0;
  for (const auto& q : train.queries) rows += q.real_count();
  if (rows == 0) throw ArgumentError("ranker: no labeled items");
  const int m = train.feature_dim;

  Mat x(rows, m + 1);  // intercept in the last column
  Vec y(rows);
  int r = 0;
  for (const auto& q : train.queries) {
    for (const auto& item : q.items) {
      if (item.is_padding) continue;
      x.row(r).head(m) = item.features.transpose();
      x(r, m) = 1.0;
      y[r] = item.label;
      ++r;
    }
  }

  Mat gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  Vec sol = gram.ldlt().solve(x.transpose() * y);

  LinearRanker out;
  out.weights_ = sol.head(m);
  out.intercept_ = sol[m];
  return out;
}

double LinearRanker::score(const Vec& features) const {
  if (features.size() != weights_.size())
    throw DimensionError("ranker: feature width mismatch");
  return weights_.dot(features) + intercept_;
}

std::vector<std::vector<double>> LinearRanker::score_dataset(const Dataset& data) const {
  std::vector<std::vector<double>> out;
  out.reserve(data.queries.size());
  for (const auto& q : data.queries) {
    std::vector<double> scores;
    scores.reserve(q.items.size());
    for (const auto& item : q.items)
      scores.push_back(item.is_padding ? 0.0 : score(item.features));
    out.push_back(std::move(scores));
  }
  return out;
}

}  // namespace slateopt
