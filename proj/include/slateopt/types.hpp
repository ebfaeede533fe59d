#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "slateopt/errors.hpp"

namespace slateopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Index sets locating the one-hot categorical variables inside an item
/// feature vector. Indices are 0-based positions into the feature vector.
struct CategoricalSchema {
  std::vector<std::vector<int>> variables;  // each sorted ascending
  int feature_dim = 0;

  int var_count() const { return static_cast<int>(variables.size()); }
  int width(int j) const { return static_cast<int>(variables.at(j).size()); }
  int total_width() const;

  // Enforces: indices in range, pairwise disjoint, each set has >= 2 entries.
  void validate() const;
};

struct Item {
  Vec features;
  double label = 0.0;       // relevance or click value, non-negative
  double base_score = 0.0;  // score from the base ranker
  bool is_padding = false;
};

/// Per-query target distributions d_j, one per schema variable.
struct DistributionalCriteria {
  std::vector<Vec> targets;

  bool empty() const { return targets.empty(); }
};

struct CandidateSet {
  std::string query_id;
  std::vector<Item> items;  // base-ranker order; padding only at the tail
  DistributionalCriteria criteria;

  int size() const { return static_cast<int>(items.size()); }
  int real_count() const;
};

/// Ordered selection of k distinct non-padding positions into a candidate set.
struct Slate {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
};

/// Remaining distribution deficits d_j - r_j^(t) fed to the decoder.
struct ConditionInfo {
  std::vector<Vec> deltas;

  Vec flatten() const;
};

// The restriction of an item's features to variable j, in ascending index
// order. Padding items yield an all-zero slice.
Vec categorical_slice(const Item& item, int var, const CategoricalSchema& schema);

// r_j = (1/k) sum_t slice(a_t, j) over the whole slate.
std::vector<Vec> slate_distribution(const Slate& slate, const CandidateSet& cands,
                                    const CategoricalSchema& schema);

// Same average over the first t selections; t = 0 returns all-zero vectors.
std::vector<Vec> partial_slate_distribution(const std::vector<int>& prefix,
                                            const CandidateSet& cands,
                                            const CategoricalSchema& schema);

ConditionInfo condition_info(const DistributionalCriteria& criteria,
                             const std::vector<int>& prefix,
                             const CandidateSet& cands,
                             const CategoricalSchema& schema);

// d_j = (1/n) sum_i slice(i, j) over non-padding items.
DistributionalCriteria infer_criteria(const CandidateSet& cands,
                                      const CategoricalSchema& schema);

// Checks entry ranges and per-variable sums; renormalizes sums within 1e-6
// of 1, rejects anything further off.
void validate_criteria(DistributionalCriteria& criteria,
                       const CategoricalSchema& schema);

// Distinct, in-range, non-padding indices.
void validate_slate(const Slate& slate, const CandidateSet& cands);

// Every non-padding item's restriction to each F_j must be exactly one-hot.
void validate_one_hot(const CandidateSet& cands, const CategoricalSchema& schema);

}  // namespace slateopt
