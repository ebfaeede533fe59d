#pragma once

#include "slateopt/letor.hpp"

namespace slateopt {

/// Stand-in base ranker: ridge-regularized least-squares fit of label on
/// features (plus intercept) over the training split. Deterministic; the
/// regularizer keeps singular systems solvable.
class LinearRanker {
 public:
  static LinearRanker fit(const Dataset& train, double ridge = 1e-3);

  double score(const Vec& features) const;
  std::vector<std::vector<double>> score_dataset(const Dataset& data) const;

  const Vec& weights() const { return weights_; }
  double intercept() const { return intercept_; }

 private:
  Vec weights_;
  double intercept_ = 0.0;
};

}  // namespace slateopt
