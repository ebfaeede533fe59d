#pragma once

#include <optional>

#include "slateopt/nn/layers.hpp"
#include "slateopt/nn/param_store.hpp"
#include "slateopt/nn/tape.hpp"
#include "slateopt/rng.hpp"
#include "slateopt/types.hpp"

namespace slateopt {

struct ModelConfig {
  int embed_dim = 256;
  int hidden_dim = 256;
  int head_dim = 256;  // width of both head layers
  double dropout_rate = 0.1;
  int slate_size = 10;
  bool use_condition_info = true;  // ablation switch
};

enum class DecodeMode { kGreedy, kSample };

/// Pointer-network re-ranker: per-item embedding, recurrent sequence encoder,
/// and an attention decoder that consumes the per-step condition information
/// and emits one score per candidate, masked so selections never repeat.
class PointerNetwork {
 public:
  // Fresh, seeded initialization.
  PointerNetwork(ModelConfig cfg, int feature_dim, int ci_dim, std::uint64_t seed);
  // Wrap previously trained parameters (shapes must match the config).
  PointerNetwork(ModelConfig cfg, int feature_dim, int ci_dim, nn::ParamStore params);

  struct Encoded {
    std::vector<nn::Var> outputs;  // h_1..h_n
    nn::Var matrix;                // hidden x n
    nn::LstmState final_state;
  };

  struct DecodeState {
    nn::LstmState lstm;
    std::vector<int> prefix;
    std::vector<char> forbidden;  // selected or padding
    ConditionInfo ci;
  };

  struct Rollout {
    Slate slate;
    std::vector<nn::Var> probs;  // masked p_t on the tape
    std::vector<Vec> prob_values;
    std::vector<nn::Var> step_log_probs;  // ln p_t[a_t]
    nn::Var log_prob_sum;
  };

  // dense + ReLU + dropout per item; padding items are embedded too and only
  // masked at selection time.
  std::vector<nn::Var> embed(nn::Tape& t, const CandidateSet& cands, bool train,
                             Rng* dropout_rng) const;

  Encoded encode(nn::Tape& t, const std::vector<nn::Var>& embeds) const;

  // Advances the decoder cell on [prev_embed; CI_t] and returns the raw
  // (pre-mask) attention scores u_t.
  nn::Var decode_step(nn::Tape& t, DecodeState& state, nn::Var prev_embed,
                      nn::Var attn_premix, bool train, Rng* dropout_rng) const;

  // p_t = masked softmax of u_t; greedy takes the argmax (lowest index wins
  // exact ties), sampling draws from p_t.
  std::pair<int, nn::Var> select(nn::Tape& t, nn::Var scores,
                                 const std::vector<char>& forbidden, DecodeMode mode,
                                 Rng* sample_rng) const;

  // Full decode: embed, encode, then k decode/select steps starting from the
  // learned start embedding with CI_0 = criteria. Passing forced_actions
  // replays a recorded trajectory (teacher forcing).
  Rollout rollout(nn::Tape& t, const CandidateSet& cands, const CategoricalSchema& schema,
                  DecodeMode mode, bool train, Rng* dropout_rng, Rng* sample_rng,
                  const std::vector<int>* forced_actions = nullptr) const;

  // Eval-mode convenience on an internal tape.
  std::pair<Slate, std::vector<Vec>> generate_slate(const CandidateSet& cands,
                                                    const CategoricalSchema& schema,
                                                    DecodeMode mode,
                                                    Rng* sample_rng = nullptr) const;

  void save(const std::string& path) const;
  static PointerNetwork load(const std::string& path);

  const ModelConfig& config() const { return cfg_; }
  int feature_dim() const { return feature_dim_; }
  int ci_dim() const { return ci_dim_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

 private:
  void init_params(std::uint64_t seed);
  void check_shapes() const;

  ModelConfig cfg_;
  int feature_dim_ = 0;
  int ci_dim_ = 0;
  nn::ParamStore params_;
};

}  // namespace slateopt
