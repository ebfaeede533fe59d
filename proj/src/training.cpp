#include "slateopt/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace slateopt {

using nn::Tape;
using nn::Var;

std::vector<Vec> masked_step_labels(const CandidateSet& cands, const Slate& slate) {
  Vec y(cands.size());
  for (int i = 0; i < cands.size(); ++i) y[i] = cands.items[i].label;
  std::vector<Vec> out;
  out.reserve(slate.indices.size());
  for (int a : slate.indices) {
    out.push_back(y);
    y[a] = 0.0;  // next step masks everything selected so far
  }
  return out;
}

Var step_rank_loss(Tape& t, Var p_t, const Vec& y_t) {
  double total = y_t.sum();
  if (!(total > 0.0)) throw ArgumentError("step_rank_loss: labels sum to zero");
  for (int i = 0; i < y_t.size(); ++i)
    if (y_t[i] < 0.0) throw ArgumentError("step_rank_loss: negative label");
  return t.weighted_neg_log(p_t, y_t / total);
}

Var slate_rank_loss(Tape& t, const std::vector<Var>& probs,
                    const std::vector<Vec>& labels) {
  if (probs.size() != labels.size())
    throw DimensionError("slate_rank_loss: step count mismatch");
  Var acc = t.scalar(0.0);
  for (std::size_t step = 0; step < probs.size(); ++step) {
    if (!(labels[step].sum() > 0.0)) continue;  // no remaining positives
    double w = 1.0 / std::log2(static_cast<double>(step) + 2.0);
    acc = t.add(acc, t.scale(step_rank_loss(t, probs[step], labels[step]), w));
  }
  return acc;
}

std::vector<Var> soft_slate_distribution(Tape& t, const std::vector<Var>& probs,
                                         const CandidateSet& cands,
                                         const CategoricalSchema& schema) {
  if (probs.empty()) throw ArgumentError("soft_slate_distribution: no steps");
  const int k = static_cast<int>(probs.size());
  std::vector<Var> out;
  out.reserve(schema.variables.size());
  for (int j = 0; j < schema.var_count(); ++j) {
    // Constant slice matrix: width(j) x n, column i = x^(i) restricted to F_j.
    Mat slices(schema.width(j), cands.size());
    for (int i = 0; i < cands.size(); ++i)
      slices.col(i) = categorical_slice(cands.items[i], j, schema);
    Var sm = t.constant(slices);
    Var acc;
    for (int step = 0; step < k; ++step) {
      Var g = t.matmul(sm, probs[static_cast<std::size_t>(step)]);
      acc = step == 0 ? g : t.add(acc, g);
    }
    out.push_back(t.scale(acc, 1.0 / static_cast<double>(k)));
  }
  return out;
}

Var soft_gap(Tape& t, const DistributionalCriteria& criteria,
             const std::vector<Var>& soft_dist) {
  if (criteria.targets.size() != soft_dist.size())
    throw DimensionError("soft_gap: variable count mismatch");
  if (criteria.targets.empty()) throw ArgumentError("soft_gap: no variables");
  Var acc;
  for (std::size_t j = 0; j < soft_dist.size(); ++j) {
    Var d = t.linf_gap(criteria.targets[j], soft_dist[j]);
    acc = j == 0 ? d : t.add(acc, d);
  }
  return t.scale(acc, 1.0 / static_cast<double>(soft_dist.size()));
}

Var supervised_loss(Tape& t, const std::vector<Var>& probs,
                    const std::vector<Vec>& labels, const CandidateSet& cands,
                    const CategoricalSchema& schema, const TrainConfig& cfg) {
  Var rank = slate_rank_loss(t, probs, labels);
  Var gap_term = soft_gap(t, cands.criteria, soft_slate_distribution(t, probs, cands, schema));
  return t.add(t.scale(rank, cfg.alpha * cfg.beta), t.scale(gap_term, 1.0 - cfg.alpha));
}

namespace {

bool trainable_query(const CandidateSet& q, int k) {
  if (q.real_count() < k) return false;
  double best = 0.0;
  for (const auto& item : q.items)
    if (!item.is_padding) best = std::max(best, item.label);
  return best > 0.0;  // zero-IDCG queries carry no ranking signal
}

struct QueryRngs {
  Rng dropout;
  Rng sample;
};

QueryRngs query_rngs(const TrainConfig& cfg, std::uint64_t step_counter, std::size_t i) {
  std::uint64_t key = (step_counter << 20) + i;
  return {Rng::substream(cfg.rng_seed, "dropout", key),
          Rng::substream(cfg.rng_seed, "sample", key)};
}

void accumulate_grads(const Tape& t, std::map<std::string, Mat>& grads) {
  for (const auto& [name, var] : t.bound_params()) {
    const Mat& g = t.grad(var);
    auto it = grads.find(name);
    if (it == grads.end())
      grads.emplace(name, g);
    else
      it->second += g;
  }
}

}  // namespace

UpdateStats reinforce_update(PointerNetwork& model,
                             const std::vector<const CandidateSet*>& batch,
                             const CategoricalSchema& schema, const TrainConfig& cfg,
                             Baseline& baseline, std::uint64_t step_counter) {
  if (batch.empty()) throw ArgumentError("reinforce_update: empty batch");
  const int k = model.config().slate_size;
  const double n = static_cast<double>(batch.size());

  // The batch-mean baseline needs all rewards before any gradient, so that
  // mode replays each rollout from its saved substream on a second pass.
  std::vector<double> rewards(batch.size(), 0.0);
  if (cfg.baseline == BaselineMode::kBatchMean) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      QueryRngs rngs = query_rngs(cfg, step_counter, i);
      Tape t;
      auto roll = model.rollout(t, *batch[i], schema, DecodeMode::kSample, true,
                                &rngs.dropout, &rngs.sample);
      rewards[i] =
          score_slate(*batch[i], roll.slate, schema, cfg.alpha, k).reward;
    }
  }
  double b = cfg.baseline == BaselineMode::kBatchMean
                 ? std::accumulate(rewards.begin(), rewards.end(), 0.0) / n
                 : baseline.value;

  UpdateStats stats;
  std::map<std::string, Mat> grads;
  double reward_sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    QueryRngs rngs = query_rngs(cfg, step_counter, i);
    Tape t;
    auto roll = model.rollout(t, *batch[i], schema, DecodeMode::kSample, true,
                              &rngs.dropout, &rngs.sample);
    SlateScore sc = score_slate(*batch[i], roll.slate, schema, cfg.alpha, k);
    if (!std::isfinite(sc.reward))
      throw NumericError("reinforce_update: non-finite reward on query " +
                         batch[i]->query_id);
    reward_sum += sc.reward;
    stats.ndcg += sc.ndcg;
    stats.gap += sc.gap;

    // Ascent on (R - b) * sum_t ln pi(a_t|s_t), taken as descent on its negation.
    Var loss = t.scale(roll.log_prob_sum, -(sc.reward - b));
    t.backward(loss);
    accumulate_grads(t, grads);
  }

  for (auto& [name, g] : grads) g /= n;
  model.params().adabelief_step(grads, cfg.lr);
  baseline.update(reward_sum / n, cfg.baseline_decay);

  stats.objective = reward_sum / n;
  stats.ndcg /= n;
  stats.gap /= n;
  stats.used = static_cast<int>(batch.size());
  return stats;
}

UpdateStats supervised_update(PointerNetwork& model,
                              const std::vector<const CandidateSet*>& batch,
                              const CategoricalSchema& schema, const TrainConfig& cfg,
                              Baseline& baseline, std::uint64_t step_counter) {
  if (batch.empty()) throw ArgumentError("supervised_update: empty batch");
  const int k = model.config().slate_size;
  const double n = static_cast<double>(batch.size());

  std::vector<double> losses(batch.size(), 0.0);
  if (cfg.baseline == BaselineMode::kBatchMean) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      QueryRngs rngs = query_rngs(cfg, step_counter, i);
      Tape t;
      auto roll = model.rollout(t, *batch[i], schema, DecodeMode::kSample, true,
                                &rngs.dropout, &rngs.sample);
      auto labels = masked_step_labels(*batch[i], roll.slate);
      losses[i] = t.val(supervised_loss(t, roll.probs, labels, *batch[i], schema, cfg))(0, 0);
    }
  }
  double b = cfg.baseline == BaselineMode::kBatchMean
                 ? std::accumulate(losses.begin(), losses.end(), 0.0) / n
                 : baseline.value;

  UpdateStats stats;
  std::map<std::string, Mat> grads;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    QueryRngs rngs = query_rngs(cfg, step_counter, i);
    Tape t;
    auto roll = model.rollout(t, *batch[i], schema, DecodeMode::kSample, true,
                              &rngs.dropout, &rngs.sample);
    auto labels = masked_step_labels(*batch[i], roll.slate);
    Var loss_var = supervised_loss(t, roll.probs, labels, *batch[i], schema, cfg);
    double loss_value = t.val(loss_var)(0, 0);
    if (!std::isfinite(loss_value))
      throw NumericError("supervised_update: non-finite loss on query " +
                         batch[i]->query_id);
    loss_sum += loss_value;
    SlateScore sc = score_slate(*batch[i], roll.slate, schema, cfg.alpha, k);
    stats.ndcg += sc.ndcg;
    stats.gap += sc.gap;

    // (L_i - b) enters as a constant advantage; the pathwise term rides along.
    Var total = t.add(t.scale(roll.log_prob_sum, loss_value - b), loss_var);
    t.backward(total);
    accumulate_grads(t, grads);
  }

  for (auto& [name, g] : grads) g /= n;
  model.params().adabelief_step(grads, cfg.lr);
  baseline.update(loss_sum / n, cfg.baseline_decay);

  stats.objective = loss_sum / n;
  stats.ndcg /= n;
  stats.gap /= n;
  stats.used = static_cast<int>(batch.size());
  return stats;
}

EvalResult evaluate(const PointerNetwork& model, const Dataset& data,
                    const CategoricalSchema& schema, double alpha) {
  EvalResult out;
  const int k = model.config().slate_size;
  for (const auto& q : data.queries) {
    if (q.real_count() < k) {
      ++out.skipped;
      continue;
    }
    auto [slate, probs] = model.generate_slate(q, schema, DecodeMode::kGreedy);
    SlateScore sc = score_slate(q, slate, schema, alpha, k);
    out.ndcg += sc.ndcg;
    out.gap += sc.gap;
    out.reward += sc.reward;
    ++out.used;
  }
  if (out.used == 0) throw ArgumentError("evaluate: no query has k real items");
  out.ndcg /= out.used;
  out.gap /= out.used;
  out.reward /= out.used;
  out.goodness = slate_goodness(out.ndcg, out.gap);
  return out;
}

TrainResult train(PointerNetwork& model, const Dataset& train_split,
                  const Dataset& valid_split, const CategoricalSchema& schema,
                  const TrainConfig& cfg) {
  if (train_split.queries.empty() || valid_split.queries.empty())
    throw ArgumentError("train: empty split");
  if (cfg.slate_size != model.config().slate_size)
    throw ArgumentError("train: config slate size != model slate size");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ArgumentError("train: alpha outside [0,1]");
  if (!(cfg.beta > 0.0)) throw ArgumentError("train: beta must be > 0");
  if (cfg.baseline_decay < 0.0 || cfg.baseline_decay >= 1.0)
    throw ArgumentError("train: baseline_decay outside [0,1)");

  std::vector<const CandidateSet*> eligible;
  for (const auto& q : train_split.queries)
    if (trainable_query(q, cfg.slate_size)) eligible.push_back(&q);
  if (eligible.empty()) throw ArgumentError("train: no trainable queries");

  TrainResult result;
  result.best_goodness = -1.0;
  Baseline baseline;
  std::uint64_t step_counter = 0;
  int since_improvement = 0;
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng = Rng::substream(cfg.rng_seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::vector<const CandidateSet*> order = eligible;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(
                                  shuffle_rng.uniform_int(0, static_cast<int>(i) - 1))]);

    UpdateStats epoch_stats;
    int batches = 0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const CandidateSet*> batch(order.begin() + static_cast<long>(at),
                                             order.begin() + static_cast<long>(end));
      UpdateStats s = cfg.mode == TrainMode::kRl
                          ? reinforce_update(model, batch, schema, cfg, baseline, step_counter)
                          : supervised_update(model, batch, schema, cfg, baseline, step_counter);
      epoch_stats.objective += s.objective;
      epoch_stats.ndcg += s.ndcg;
      epoch_stats.gap += s.gap;
      ++batches;
      ++step_counter;
    }
    epoch_stats.objective /= batches;
    epoch_stats.ndcg /= batches;
    epoch_stats.gap /= batches;
    double train_loss =
        cfg.mode == TrainMode::kRl ? -epoch_stats.objective : epoch_stats.objective;

    result.log.push_back(LogRow{epoch, "train", epoch_stats.ndcg, epoch_stats.gap,
                                slate_goodness(epoch_stats.ndcg, epoch_stats.gap),
                                train_loss, elapsed()});

    EvalResult val = evaluate(model, valid_split, schema, cfg.alpha);
    result.log.push_back(
        LogRow{epoch, "valid", val.ndcg, val.gap, val.goodness, train_loss, elapsed()});

    if (val.goodness > result.best_goodness) {
      result.best_goodness = val.goodness;
      result.best_epoch = epoch;
      result.best_params = model.params();
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (since_improvement >= cfg.patience) break;
  }
  return result;
}

void write_train_log(const std::vector<LogRow>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open training log for writing: " + path);
  out << "epoch,split,ndcg,gap,goodness,loss,seconds\n";
  char buf[256];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.6f,%.6f,%.6f,%.3f\n", row.epoch,
                  row.split.c_str(), row.ndcg, row.gap, row.goodness, row.loss,
                  row.seconds);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace slateopt
