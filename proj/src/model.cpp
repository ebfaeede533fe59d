#include "slateopt/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace slateopt {

using nn::Tape;
using nn::Var;

namespace {

void fill_uniform(Mat& m, double bound, Rng& rng) {
  for (long c = 0; c < m.cols(); ++c)
    for (long r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
}

}  // namespace

PointerNetwork::PointerNetwork(ModelConfig cfg, int feature_dim, int ci_dim,
                               std::uint64_t seed)
    : cfg_(cfg), feature_dim_(feature_dim), ci_dim_(ci_dim) {
  if (cfg_.slate_size < 1 || cfg_.embed_dim < 1 || cfg_.hidden_dim < 1 || cfg_.head_dim < 1)
    throw ArgumentError("model config: dims and slate size must be >= 1");
  init_params(seed);
}

PointerNetwork::PointerNetwork(ModelConfig cfg, int feature_dim, int ci_dim,
                               nn::ParamStore params)
    : cfg_(cfg), feature_dim_(feature_dim), ci_dim_(ci_dim), params_(std::move(params)) {
  check_shapes();
}

void PointerNetwork::init_params(std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "model-init");
  const int e = cfg_.embed_dim;
  const int h = cfg_.hidden_dim;
  const int p = cfg_.head_dim;
  const int dec_in = e + ci_dim_;

  auto uniform_init = [&](const std::string& name, int rows, int cols, int fan_in) {
    Mat& m = params_.create(name, rows, cols);
    fill_uniform(m, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
  };

  uniform_init("embed.w", e, feature_dim_, feature_dim_);
  params_.create("embed.b", e, 1);
  uniform_init("enc.wx", 4 * h, e, e);
  uniform_init("enc.wh", 4 * h, h, h);
  params_.create("enc.b", 4 * h, 1).block(h, 0, h, 1).setOnes();  // forget gate
  uniform_init("dec.wx", 4 * h, dec_in, dec_in);
  uniform_init("dec.wh", 4 * h, h, h);
  params_.create("dec.b", 4 * h, 1).block(h, 0, h, 1).setOnes();
  uniform_init("head.w1", p, h, h);
  params_.create("head.b1", p, 1);
  uniform_init("head.w2", p, p, p);
  params_.create("head.b2", p, 1);
  params_.create("head.bn.gamma", p, 1).setOnes();
  params_.create("head.bn.beta", p, 1);
  params_.create("head.bn.mean", p, 1, /*trainable=*/false);
  params_.create("head.bn.var", p, 1, /*trainable=*/false).setOnes();
  uniform_init("attn.we", h, h, h);
  uniform_init("attn.wd", h, p, p);
  uniform_init("attn.v", h, 1, h);
  uniform_init("start", e, 1, e);
}

void PointerNetwork::check_shapes() const {
  const int e = cfg_.embed_dim;
  const int h = cfg_.hidden_dim;
  auto expect = [&](const std::string& name, long rows, long cols) {
    const Mat& m = params_.at(name);
    if (m.rows() != rows || m.cols() != cols)
      throw DimensionError("model: parameter " + name + " has unexpected shape");
  };
  expect("embed.w", e, feature_dim_);
  expect("enc.wx", 4 * h, e);
  expect("dec.wx", 4 * h, e + ci_dim_);
  expect("attn.wd", h, cfg_.head_dim);
  expect("start", e, 1);
}

std::vector<Var> PointerNetwork::embed(Tape& t, const CandidateSet& cands, bool train,
                                       Rng* dropout_rng) const {
  Var w = t.param(params_, "embed.w");
  Var b = t.param(params_, "embed.b");
  std::vector<Var> out;
  out.reserve(cands.items.size());
  for (const auto& item : cands.items) {
    if (item.features.size() != feature_dim_)
      throw DimensionError("embed: item width " + std::to_string(item.features.size()) +
                           " != model feature_dim " + std::to_string(feature_dim_));
    Var x = t.relu(nn::dense(t, w, t.constant(item.features), b));
    if (train && cfg_.dropout_rate > 0.0) {
      if (!dropout_rng) throw ArgumentError("embed: train mode needs a dropout rng");
      x = t.dropout(x, cfg_.dropout_rate, *dropout_rng);
    }
    out.push_back(x);
  }
  return out;
}

PointerNetwork::Encoded PointerNetwork::encode(Tape& t,
                                               const std::vector<Var>& embeds) const {
  if (embeds.empty()) throw ArgumentError("encode: empty sequence");
  nn::LstmVars cell{t.param(params_, "enc.wx"), t.param(params_, "enc.wh"),
                    t.param(params_, "enc.b")};
  nn::LstmState state{t.constant(Vec::Zero(cfg_.hidden_dim)),
                      t.constant(Vec::Zero(cfg_.hidden_dim))};
  Encoded enc;
  enc.outputs.reserve(embeds.size());
  for (Var x : embeds) {
    state = nn::lstm_step(t, cell, x, state);
    enc.outputs.push_back(state.h);
  }
  enc.matrix = t.hcat(enc.outputs);
  enc.final_state = state;
  return enc;
}

Var PointerNetwork::decode_step(Tape& t, DecodeState& state, Var prev_embed,
                                Var attn_premix, bool train, Rng* dropout_rng) const {
  Vec ci_vec;
  if (cfg_.use_condition_info) {
    ci_vec = state.ci.flatten();
    if (ci_vec.size() != ci_dim_)
      throw DimensionError("decode_step: condition info width mismatch");
  } else {
    ci_vec = Vec::Zero(ci_dim_);
  }

  Var input = ci_dim_ > 0 ? t.vcat(prev_embed, t.constant(ci_vec)) : prev_embed;
  nn::LstmVars cell{t.param(params_, "dec.wx"), t.param(params_, "dec.wh"),
                    t.param(params_, "dec.b")};
  state.lstm = nn::lstm_step(t, cell, input, state.lstm);

  Var x = t.relu(nn::dense(t, t.param(params_, "head.w1"), state.lstm.h,
                           t.param(params_, "head.b1")));
  if (train && cfg_.dropout_rate > 0.0) {
    if (!dropout_rng) throw ArgumentError("decode_step: train mode needs a dropout rng");
    x = t.dropout(x, cfg_.dropout_rate, *dropout_rng);
  }
  x = t.batchnorm_frozen(x, t.param(params_, "head.bn.gamma"),
                         t.param(params_, "head.bn.beta"), params_.at("head.bn.mean"),
                         params_.at("head.bn.var"));
  Var query = nn::dense(t, t.param(params_, "head.w2"), x, t.param(params_, "head.b2"));

  nn::AttentionVars attn{t.param(params_, "attn.we"), t.param(params_, "attn.wd"),
                         t.param(params_, "attn.v")};
  return nn::attention_scores(t, attn, attn_premix, query);
}

std::pair<int, Var> PointerNetwork::select(Tape& t, Var scores,
                                           const std::vector<char>& forbidden,
                                           DecodeMode mode, Rng* sample_rng) const {
  Var p = t.masked_softmax(scores, forbidden);
  const Mat& pv = t.val(p);
  int pick = -1;
  if (mode == DecodeMode::kGreedy) {
    double best = -1.0;
    for (long i = 0; i < pv.rows(); ++i) {
      if (forbidden[static_cast<std::size_t>(i)]) continue;
      if (pv(i, 0) > best) {
        best = pv(i, 0);
        pick = static_cast<int>(i);
      }
    }
  } else {
    if (!sample_rng) throw ArgumentError("select: sampling needs an rng");
    pick = sample_rng->sample_categorical(pv.col(0));
  }
  return {pick, p};
}

PointerNetwork::Rollout PointerNetwork::rollout(
    Tape& t, const CandidateSet& cands, const CategoricalSchema& schema, DecodeMode mode,
    bool train, Rng* dropout_rng, Rng* sample_rng,
    const std::vector<int>* forced_actions) const {
  const int n = cands.size();
  const int k = cfg_.slate_size;
  if (cands.real_count() < k)
    throw ArgumentError("rollout: query " + cands.query_id + " has " +
                        std::to_string(cands.real_count()) + " real items, needs " +
                        std::to_string(k));
  if (cfg_.use_condition_info &&
      static_cast<int>(cands.criteria.targets.size()) != schema.var_count())
    throw ArgumentError("rollout: query " + cands.query_id + " has no criteria");
  if (forced_actions && static_cast<int>(forced_actions->size()) != k)
    throw ArgumentError("rollout: forced action count != slate size");

  auto embeds = embed(t, cands, train, dropout_rng);
  Encoded enc = encode(t, embeds);
  Var premix = nn::attention_precompute(
      t, nn::AttentionVars{t.param(params_, "attn.we"), t.param(params_, "attn.wd"),
                           t.param(params_, "attn.v")},
      enc.matrix);

  DecodeState state;
  state.lstm = enc.final_state;
  state.forbidden.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    if (cands.items[i].is_padding) state.forbidden[static_cast<std::size_t>(i)] = 1;
  if (cfg_.use_condition_info)
    state.ci = condition_info(cands.criteria, state.prefix, cands, schema);

  Rollout out;
  Var prev = t.param(params_, "start");
  for (int step = 0; step < k; ++step) {
    Var u = decode_step(t, state, prev, premix, train, dropout_rng);
    int pick;
    Var p;
    if (forced_actions) {
      pick = (*forced_actions)[static_cast<std::size_t>(step)];
      if (pick < 0 || pick >= n || state.forbidden[static_cast<std::size_t>(pick)])
        throw ArgumentError("rollout: forced action is forbidden");
      p = t.masked_softmax(u, state.forbidden);
    } else {
      std::tie(pick, p) = select(t, u, state.forbidden, mode, sample_rng);
    }

    out.slate.indices.push_back(pick);
    out.probs.push_back(p);
    out.prob_values.push_back(t.val(p).col(0));
    Var lp = t.log_entry(p, pick);
    out.step_log_probs.push_back(lp);
    out.log_prob_sum = step == 0 ? lp : t.add(out.log_prob_sum, lp);

    state.prefix.push_back(pick);
    state.forbidden[static_cast<std::size_t>(pick)] = 1;
    if (cfg_.use_condition_info)
      state.ci = condition_info(cands.criteria, state.prefix, cands, schema);
    prev = embeds[static_cast<std::size_t>(pick)];
  }
  return out;
}

std::pair<Slate, std::vector<Vec>> PointerNetwork::generate_slate(
    const CandidateSet& cands, const CategoricalSchema& schema, DecodeMode mode,
    Rng* sample_rng) const {
  Tape t;
  Rollout r = rollout(t, cands, schema, mode, /*train=*/false, nullptr, sample_rng);
  return {std::move(r.slate), std::move(r.prob_values)};
}

void PointerNetwork::save(const std::string& path) const {
  nlohmann::json j;
  j["embed_dim"] = cfg_.embed_dim;
  j["hidden_dim"] = cfg_.hidden_dim;
  j["head_dim"] = cfg_.head_dim;
  j["dropout_rate"] = cfg_.dropout_rate;
  j["slate_size"] = cfg_.slate_size;
  j["use_condition_info"] = cfg_.use_condition_info;
  j["feature_dim"] = feature_dim_;
  j["ci_dim"] = ci_dim_;
  nn::ParamStore copy = params_;
  copy.meta = j.dump();
  copy.save(path);
}

PointerNetwork PointerNetwork::load(const std::string& path) {
  nn::ParamStore store = nn::ParamStore::load(path);
  nlohmann::json j = nlohmann::json::parse(store.meta);
  ModelConfig cfg;
  cfg.embed_dim = j.at("embed_dim").get<int>();
  cfg.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.head_dim = j.at("head_dim").get<int>();
  cfg.dropout_rate = j.at("dropout_rate").get<double>();
  cfg.slate_size = j.at("slate_size").get<int>();
  cfg.use_condition_info = j.at("use_condition_info").get<bool>();
  int fdim = j.at("feature_dim").get<int>();
  int cidim = j.at("ci_dim").get<int>();
  return PointerNetwork(cfg, fdim, cidim, std::move(store));
}

}  // namespace slateopt
