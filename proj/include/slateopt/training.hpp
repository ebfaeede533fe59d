#pragma once

#include <string>
#include <vector>

#include "slateopt/letor.hpp"
#include "slateopt/metrics.hpp"
#include "slateopt/model.hpp"

namespace slateopt {

enum class TrainMode { kRl, kSl };
enum class BaselineMode { kEma, kBatchMean };

struct TrainConfig {
  double alpha = 0.5;          // reward / loss balance
  double beta = 0.1;           // ranking-loss scale in the supervised loss
  double lr = 1e-4;
  int batch_size = 1024;
  double baseline_decay = 0.99;
  TrainMode mode = TrainMode::kRl;
  BaselineMode baseline = BaselineMode::kEma;  // batch-mean variant available
  int slate_size = 10;         // must match the model's
  int patience = 5;
  int max_epochs = 100;
  std::uint64_t rng_seed = 0;
};

/// Return / loss whitening baseline.
struct Baseline {
  double value = 0.0;

  void update(double batch_mean, double decay) {
    value = decay * value + (1.0 - decay) * batch_mean;
  }
};

// Per-step masked label vectors along a trajectory: y_t[a_i] = 0 for i < t.
std::vector<Vec> masked_step_labels(const CandidateSet& cands, const Slate& slate);

// -sum_i (y_i / sum_j y_j) ln p_i. Requires sum y_t > 0.
nn::Var step_rank_loss(nn::Tape& t, nn::Var p_t, const Vec& y_t);

// sum_t w_t * step loss with w_t = 1/log2(t+1); steps whose remaining labels
// are all zero contribute nothing.
nn::Var slate_rank_loss(nn::Tape& t, const std::vector<nn::Var>& probs,
                        const std::vector<Vec>& labels);

// r'_j = (1/k) sum_t gamma_j^(t), gamma_j^(t) = sum_i p_t[i] * x^(i)_{F_j};
// differentiable through the step probabilities.
std::vector<nn::Var> soft_slate_distribution(nn::Tape& t,
                                             const std::vector<nn::Var>& probs,
                                             const CandidateSet& cands,
                                             const CategoricalSchema& schema);

// (1/c) sum_j linf(d_j, r'_j), subgradient at ties routed to the first max.
nn::Var soft_gap(nn::Tape& t, const DistributionalCriteria& criteria,
                 const std::vector<nn::Var>& soft_dist);

// alpha*beta*L_rank + (1-alpha)*soft GAP.
nn::Var supervised_loss(nn::Tape& t, const std::vector<nn::Var>& probs,
                        const std::vector<Vec>& labels, const CandidateSet& cands,
                        const CategoricalSchema& schema, const TrainConfig& cfg);

struct UpdateStats {
  double objective = 0.0;  // mean sampled reward (RL) or mean loss (SL)
  double ndcg = 0.0;
  double gap = 0.0;
  int used = 0;
};

// One batched policy-gradient ascent step on sampled slates, whitened by the
// baseline; the baseline then absorbs the batch mean reward.
UpdateStats reinforce_update(PointerNetwork& model,
                             const std::vector<const CandidateSet*>& batch,
                             const CategoricalSchema& schema, const TrainConfig& cfg,
                             Baseline& baseline, std::uint64_t step_counter);

// One combined descent step: (L_i - b) score-function term plus the pathwise
// gradient of the supervised loss on the same sampled trajectory.
UpdateStats supervised_update(PointerNetwork& model,
                              const std::vector<const CandidateSet*>& batch,
                              const CategoricalSchema& schema, const TrainConfig& cfg,
                              Baseline& baseline, std::uint64_t step_counter);

struct EvalResult {
  double ndcg = 0.0;
  double gap = 0.0;
  double goodness = 0.0;
  double reward = 0.0;
  int used = 0;
  int skipped = 0;  // fewer than k real items
};

// Greedy decode over every evaluable query; zero-IDCG queries score ndcg 0.
EvalResult evaluate(const PointerNetwork& model, const Dataset& data,
                    const CategoricalSchema& schema, double alpha);

struct LogRow {
  int epoch = 0;
  std::string split;
  double ndcg = 0.0;
  double gap = 0.0;
  double goodness = 0.0;
  double loss = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  nn::ParamStore best_params;
  int best_epoch = 0;
  double best_goodness = 0.0;
  std::vector<LogRow> log;
};

// Epoch loop with validation-based early stopping: keeps the parameters with
// the best validation goodness, stops once `patience` epochs pass without
// improvement (patience 0 runs exactly one epoch).
TrainResult train(PointerNetwork& model, const Dataset& train_split,
                  const Dataset& valid_split, const CategoricalSchema& schema,
                  const TrainConfig& cfg);

void write_train_log(const std::vector<LogRow>& log, const std::string& path);

}  // namespace slateopt
