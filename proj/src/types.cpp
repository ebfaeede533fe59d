#include "slateopt/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace slateopt {

int CategoricalSchema::total_width() const {
  int w = 0;
  for (const auto& v : variables) w += static_cast<int>(v.size());
  return w;
}

void CategoricalSchema::validate() const {
  std::set<int> seen;
  for (const auto& f : variables) {
    if (f.size() < 2) throw ArgumentError("schema: each variable needs >= 2 categories");
    for (int idx : f) {
      if (idx < 0 || idx >= feature_dim)
        throw DimensionError("schema: index " + std::to_string(idx) +
                             " out of range for feature_dim " + std::to_string(feature_dim));
      if (!seen.insert(idx).second)
        throw ArgumentError("schema: index " + std::to_string(idx) +
                            " appears in more than one variable");
    }
  }
}

int CandidateSet::real_count() const {
  int n = 0;
  for (const auto& it : items)
    if (!it.is_padding) ++n;
  return n;
}

Vec ConditionInfo::flatten() const {
  int total = 0;
  for (const auto& d : deltas) total += static_cast<int>(d.size());
  Vec out(total);
  int at = 0;
  for (const auto& d : deltas) {
    out.segment(at, d.size()) = d;
    at += static_cast<int>(d.size());
  }
  return out;
}

Vec categorical_slice(const Item& item, int var, const CategoricalSchema& schema) {
  if (var < 0 || var >= schema.var_count())
    throw ArgumentError("categorical_slice: variable index out of range");
  if (item.features.size() != schema.feature_dim)
    throw DimensionError("categorical_slice: feature length " +
                         std::to_string(item.features.size()) + " != schema dim " +
                         std::to_string(schema.feature_dim));
  const auto& f = schema.variables[var];
  Vec out(static_cast<int>(f.size()));
  if (item.is_padding) {
    out.setZero();
    return out;
  }
  for (std::size_t i = 0; i < f.size(); ++i) out[static_cast<int>(i)] = item.features[f[i]];
  return out;
}

std::vector<Vec> partial_slate_distribution(const std::vector<int>& prefix,
                                            const CandidateSet& cands,
                                            const CategoricalSchema& schema) {
  std::vector<Vec> r(schema.var_count());
  for (int j = 0; j < schema.var_count(); ++j) r[j] = Vec::Zero(schema.width(j));
  if (prefix.empty()) return r;  // t = 0 convention
  for (int a : prefix) {
    if (a < 0 || a >= cands.size())
      throw ArgumentError("partial_slate_distribution: index out of range");
    for (int j = 0; j < schema.var_count(); ++j)
      r[j] += categorical_slice(cands.items[a], j, schema);
  }
  const double inv = 1.0 / static_cast<double>(prefix.size());
  for (auto& v : r) v *= inv;
  return r;
}

std::vector<Vec> slate_distribution(const Slate& slate, const CandidateSet& cands,
                                    const CategoricalSchema& schema) {
  if (slate.indices.empty()) throw ArgumentError("slate_distribution: empty slate");
  validate_slate(slate, cands);
  return partial_slate_distribution(slate.indices, cands, schema);
}

ConditionInfo condition_info(const DistributionalCriteria& criteria,
                             const std::vector<int>& prefix,
                             const CandidateSet& cands,
                             const CategoricalSchema& schema) {
  if (static_cast<int>(criteria.targets.size()) != schema.var_count())
    throw DimensionError("condition_info: criteria/schema variable count mismatch");
  auto r = partial_slate_distribution(prefix, cands, schema);
  ConditionInfo ci;
  ci.deltas.resize(schema.var_count());
  for (int j = 0; j < schema.var_count(); ++j) {
    if (criteria.targets[j].size() != r[j].size())
      throw DimensionError("condition_info: criteria width mismatch at variable " +
                           std::to_string(j));
    ci.deltas[j] = criteria.targets[j] - r[j];
  }
  return ci;
}

DistributionalCriteria infer_criteria(const CandidateSet& cands,
                                      const CategoricalSchema& schema) {
  int n = cands.real_count();
  if (n == 0) throw ArgumentError("infer_criteria: candidate set has no real items");
  DistributionalCriteria out;
  out.targets.resize(schema.var_count());
  for (int j = 0; j < schema.var_count(); ++j) {
    Vec acc = Vec::Zero(schema.width(j));
    for (const auto& item : cands.items) {
      if (item.is_padding) continue;
      acc += categorical_slice(item, j, schema);
    }
    out.targets[j] = acc / static_cast<double>(n);
  }
  return out;
}

void validate_criteria(DistributionalCriteria& criteria,
                       const CategoricalSchema& schema) {
  if (static_cast<int>(criteria.targets.size()) != schema.var_count())
    throw DimensionError("criteria: expected " + std::to_string(schema.var_count()) +
                         " target vectors, got " + std::to_string(criteria.targets.size()));
  for (int j = 0; j < schema.var_count(); ++j) {
    Vec& d = criteria.targets[j];
    if (d.size() != schema.width(j))
      throw DimensionError("criteria: target width mismatch at variable " +
                           std::to_string(j));
    for (int i = 0; i < d.size(); ++i)
      if (d[i] < -1e-12 || d[i] > 1.0 + 1e-12)
        throw ArgumentError("criteria: entry outside [0,1] at variable " +
                            std::to_string(j));
    double s = d.sum();
    if (std::abs(s - 1.0) > 1e-6)
      throw ArgumentError("criteria: target for variable " + std::to_string(j) +
                          " sums to " + std::to_string(s));
    d /= s;
  }
}

void validate_slate(const Slate& slate, const CandidateSet& cands) {
  std::set<int> seen;
  for (int a : slate.indices) {
    if (a < 0 || a >= cands.size())
      throw ArgumentError("slate: index " + std::to_string(a) + " out of range");
    if (cands.items[a].is_padding)
      throw ArgumentError("slate: index " + std::to_string(a) + " is a padding item");
    if (!seen.insert(a).second)
      throw ArgumentError("slate: duplicate index " + std::to_string(a));
  }
}

void validate_one_hot(const CandidateSet& cands, const CategoricalSchema& schema) {
  for (int i = 0; i < cands.size(); ++i) {
    const Item& item = cands.items[i];
    if (item.is_padding) continue;
    for (int j = 0; j < schema.var_count(); ++j) {
      Vec s = categorical_slice(item, j, schema);
      int ones = 0;
      bool clean = true;
      for (int t = 0; t < s.size(); ++t) {
        if (s[t] == 1.0)
          ++ones;
        else if (s[t] != 0.0)
          clean = false;
      }
      if (!clean || ones != 1)
        throw ArgumentError("query " + cands.query_id + ": item " + std::to_string(i) +
                            " is not one-hot on variable " + std::to_string(j));
    }
  }
}

}  // namespace slateopt
