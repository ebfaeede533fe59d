#include "slateopt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slateopt::sim {

double observation_prob(int rank, double eta) {
  if (rank < 1) throw ArgumentError("observation_prob: rank must be >= 1");
  if (eta < 0) throw ArgumentError("observation_prob: eta must be >= 0");
  return std::pow(static_cast<double>(rank), -eta);
}

std::vector<int> select_variance_columns(const Dataset& data, int num_cols) {
  const int m = data.feature_dim;
  std::vector<bool> binary(m, true);
  for (const auto& q : data.queries) {
    for (const auto& item : q.items) {
      if (item.is_padding) continue;
      for (int c = 0; c < m; ++c) {
        double v = item.features[c];
        if (v != 0.0 && v != 1.0) binary[c] = false;
      }
    }
  }

  std::vector<std::pair<double, int>> ranked;  // (-mean variance, column)
  for (int c = 0; c < m; ++c) {
    if (!binary[c]) continue;
    double acc = 0.0;
    int nq = 0;
    for (const auto& q : data.queries) {
      double sum = 0.0, sum2 = 0.0;
      int n = 0;
      for (const auto& item : q.items) {
        if (item.is_padding) continue;
        sum += item.features[c];
        sum2 += item.features[c] * item.features[c];
        ++n;
      }
      if (n == 0) continue;
      double mean = sum / n;
      acc += sum2 / n - mean * mean;
      ++nq;
    }
    ranked.emplace_back(nq > 0 ? -acc / nq : 0.0, c);
  }
  if (ranked.empty()) throw ArgumentError("select_variance_columns: no binary columns");
  if (num_cols < 1 || num_cols > static_cast<int>(ranked.size()))
    throw ArgumentError("select_variance_columns: num_cols out of range");
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> out;
  out.reserve(num_cols);
  for (int i = 0; i < num_cols; ++i) out.push_back(ranked[i].second);
  return out;
}

double diverse_threshold(const CandidateSet& cands) {
  std::vector<const Item*> real;
  for (const auto& item : cands.items)
    if (!item.is_padding) real.push_back(&item);
  if (real.size() < 2) throw ArgumentError("diverse_threshold: need at least 2 items");
  std::vector<double> dists;
  dists.reserve(real.size() * (real.size() - 1) / 2);
  for (std::size_t i = 0; i < real.size(); ++i)
    for (std::size_t j = i + 1; j < real.size(); ++j)
      dists.push_back((real[i]->features - real[j]->features).norm());
  std::sort(dists.begin(), dists.end());
  std::size_t n = dists.size();
  if (n % 2 == 1) return dists[n / 2];
  return 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

Interaction sample_interactions(const CandidateSet& cands, const SimConfig& cfg,
                                double threshold, Rng& rng) {
  if (cands.items.empty()) throw ArgumentError("sample_interactions: empty candidate set");
  Interaction seq;
  std::vector<const Item*> clicked;
  for (int i = 0; i < cands.size(); ++i) {
    const Item& item = cands.items[i];
    if (item.is_padding) continue;
    if (!rng.bernoulli(observation_prob(i + 1, cfg.eta))) continue;
    seq.observed.push_back(i);
    double click = 0.0;
    if (item.label >= cfg.click_threshold) {
      bool similar = false;
      for (const Item* prev : clicked) {
        if ((item.features - prev->features).norm() <= threshold) {
          similar = true;
          break;
        }
      }
      if (!similar) {
        click = 1.0;
        clicked.push_back(&item);
      }
    }
    seq.clicks.push_back(click);
  }
  return seq;
}

CandidateSet truncate_pad(const CandidateSet& cands, const SimConfig& cfg) {
  if (cfg.max_len < 1) throw ArgumentError("truncate_pad: max_len must be >= 1");
  CandidateSet out;
  out.query_id = cands.query_id;
  out.criteria = cands.criteria;
  int keep = std::min(cands.size(), cfg.max_len);
  out.items.assign(cands.items.begin(), cands.items.begin() + keep);
  long width = cands.items.empty() ? 0 : cands.items.front().features.size();
  for (int i = keep; i < cfg.max_len; ++i) {
    Item pad;
    pad.features = Vec::Zero(width);
    pad.label = 0.0;
    pad.base_score = 0.0;
    pad.is_padding = true;
    out.items.push_back(std::move(pad));
  }
  return out;
}

Dataset augment_dataset(const Dataset& data,
                        const std::vector<std::vector<double>>& base_scores,
                        const SimConfig& cfg, const CategoricalSchema& schema) {
  if (cfg.nu < 1) throw ArgumentError("augment_dataset: nu must be >= 1");
  if (base_scores.size() != data.queries.size())
    throw DimensionError("augment_dataset: base score count != query count");

  Dataset out;
  out.feature_dim = data.feature_dim + 1;  // reserved base-score column

  for (std::size_t qi = 0; qi < data.queries.size(); ++qi) {
    const CandidateSet& original = data.queries[qi];
    const auto& scores = base_scores[qi];
    if (static_cast<int>(scores.size()) != original.size())
      throw DimensionError("augment_dataset: score count mismatch for query " +
                           original.query_id);

    DistributionalCriteria criteria = infer_criteria(original, schema);
    double threshold = original.real_count() >= 2 ? diverse_threshold(original) : 0.0;

    // Base-ranker order; stable so equal scores keep the incoming order.
    std::vector<int> order(original.items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });

    CandidateSet ranked;
    ranked.query_id = original.query_id;
    for (int idx : order) {
      Item item = original.items[idx];
      item.base_score = scores[idx];
      ranked.items.push_back(std::move(item));
    }

    Rng rng = Rng::substream(cfg.rng_seed, original.query_id);
    for (int s = 1; s <= cfg.nu; ++s) {
      Interaction seq = sample_interactions(ranked, cfg, threshold, rng);
      CandidateSet sub;
      sub.query_id = original.query_id + "_" + std::to_string(s);
      sub.criteria = criteria;
      for (std::size_t t = 0; t < seq.observed.size(); ++t) {
        const Item& src = ranked.items[seq.observed[t]];
        Item item;
        item.features = Vec::Zero(data.feature_dim + 1);
        item.features.head(data.feature_dim) = src.features;
        item.features[data.feature_dim] = src.base_score;
        item.base_score = src.base_score;
        item.label = seq.clicks[t];
        sub.items.push_back(std::move(item));
      }
      out.queries.push_back(truncate_pad(sub, cfg));
    }
  }
  return out;
}

CategoricalSchema expand_binary_columns(Dataset& data, const std::vector<int>& columns) {
  const int m = data.feature_dim;
  for (int c : columns)
    if (c < 0 || c >= m) throw ArgumentError("expand_binary_columns: column out of range");

  CategoricalSchema schema;
  schema.feature_dim = m + static_cast<int>(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j)
    schema.variables.push_back({columns[j], m + static_cast<int>(j)});

  for (auto& q : data.queries) {
    for (auto& item : q.items) {
      Vec widened = Vec::Zero(schema.feature_dim);
      widened.head(m) = item.features;
      for (std::size_t j = 0; j < columns.size(); ++j) {
        double v = item.features[columns[j]];
        if (!item.is_padding) {
          if (v != 0.0 && v != 1.0)
            throw ArgumentError("expand_binary_columns: column " +
                                std::to_string(columns[j]) + " is not binary");
          widened[m + static_cast<int>(j)] = 1.0 - v;
        }
      }
      item.features = std::move(widened);
    }
  }
  data.feature_dim = schema.feature_dim;
  schema.validate();
  return schema;
}

}  // namespace slateopt::sim
