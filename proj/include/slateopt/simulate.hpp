#pragma once

#include "slateopt/letor.hpp"
#include "slateopt/rng.hpp"
#include "slateopt/types.hpp"

namespace slateopt::sim {

struct SimConfig {
  double eta = 0.1;          // cascade decay; 0.1 Yahoo-style, 0.3 Web30k-style
  int nu = 25;               // interaction sequences per query
  int max_len = 30;          // truncation length
  double click_threshold = 2.0;  // labels >= this are clickable
  std::uint64_t rng_seed = 0;
};

// Probability that the item at 1-based rank is observed: rank^(-eta).
double observation_prob(int rank, double eta);

// Ranks binary feature columns (0-based) by mean within-query population
// variance, highest first, and returns the top num_cols.
std::vector<int> select_variance_columns(const Dataset& data, int num_cols);

// Median Euclidean distance over all item pairs of one query.
double diverse_threshold(const CandidateSet& cands);

struct Interaction {
  std::vector<int> observed;     // positions into cands, base-ranker order
  std::vector<double> clicks;    // parallel to observed: 1 clicked, 0 skipped
};

// One cascade pass over a candidate set already sorted by base score
// descending. Rank i is observed with probability 1/i^eta; an observed item
// with a clickable label is clicked unless it lies within `threshold`
// (inclusive) of an earlier clicked item in this sequence.
Interaction sample_interactions(const CandidateSet& cands, const SimConfig& cfg,
                                double threshold, Rng& rng);

// First max_len items kept; shorter sets get trailing padding items with
// zero features and label 0.
CandidateSet truncate_pad(const CandidateSet& cands, const SimConfig& cfg);

// Appends each query's base scores as one extra feature column, simulates nu
// interaction sequences per query, and emits one sub-query per sequence.
// All sub-queries of a query share criteria inferred from the original
// (pre-simulation) candidate set. Each query draws its own rng substream
// from (rng_seed, query_id), so any traversal order gives identical output.
Dataset augment_dataset(const Dataset& data,
                        const std::vector<std::vector<double>>& base_scores,
                        const SimConfig& cfg, const CategoricalSchema& schema);

// Replaces each selected binary column with a sorted one-hot pair: the
// original column keeps the "value 1" indicator and a complement column is
// appended. Returns the schema over the widened feature space.
CategoricalSchema expand_binary_columns(Dataset& data, const std::vector<int>& columns);

}  // namespace slateopt::sim
