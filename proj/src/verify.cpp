#include "slateopt/verify.hpp"

#include <cmath>

namespace slateopt::verify {

using nn::ParamStore;
using nn::Tape;
using nn::Var;

ToyProblem make_toy(int n, int continuous, int cvars, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "toy");
  ToyProblem toy;
  toy.schema.feature_dim = continuous + 2 * cvars;
  for (int j = 0; j < cvars; ++j)
    toy.schema.variables.push_back({continuous + 2 * j, continuous + 2 * j + 1});
  toy.schema.validate();

  toy.cands.query_id = "toy";
  for (int i = 0; i < n; ++i) {
    Item item;
    item.features = Vec::Zero(toy.schema.feature_dim);
    for (int c = 0; c < continuous; ++c) item.features[c] = rng.normal() * 0.5;
    for (int j = 0; j < cvars; ++j) {
      int cat = rng.uniform_int(0, 1);
      item.features[continuous + 2 * j + cat] = 1.0;
    }
    item.label = rng.uniform_int(0, 4);
    item.base_score = rng.uniform();
    toy.cands.items.push_back(std::move(item));
  }
  toy.cands.criteria = infer_criteria(toy.cands, toy.schema);
  return toy;
}

namespace {

void fill(Mat& m, double scale, Rng& rng) {
  for (long c = 0; c < m.cols(); ++c)
    for (long r = 0; r < m.rows(); ++r) m(r, c) = rng.normal() * scale;
}

Check run_one(const std::string& name, ParamStore& store,
              const std::function<Var(Tape&)>& program, double tolerance = 1e-4) {
  nn::GradCheckReport rep = nn::grad_check(store, program);
  return Check{name, rep.max_rel_error, tolerance, rep.max_rel_error < tolerance};
}

}  // namespace

nn::GradCheckReport check_supervised_loss(int n, int continuous, int cvars, int k,
                                          int hidden, std::uint64_t seed) {
  ToyProblem toy = make_toy(n, continuous, cvars, seed);
  ModelConfig mcfg;
  mcfg.embed_dim = hidden;
  mcfg.hidden_dim = hidden;
  mcfg.head_dim = hidden;
  mcfg.dropout_rate = 0.0;  // finite differences need a deterministic program
  mcfg.slate_size = k;
  PointerNetwork model(mcfg, toy.schema.feature_dim, toy.schema.total_width(), seed + 1);

  std::vector<int> forced;
  for (int i = 0; i < k; ++i) forced.push_back(i);
  Slate slate{forced};
  auto labels = masked_step_labels(toy.cands, slate);
  TrainConfig tcfg;
  tcfg.alpha = 0.5;
  tcfg.beta = 0.1;
  tcfg.slate_size = k;

  auto program = [&](Tape& t) -> Var {
    auto roll = model.rollout(t, toy.cands, toy.schema, DecodeMode::kGreedy,
                              /*train=*/false, nullptr, nullptr, &forced);
    return supervised_loss(t, roll.probs, labels, toy.cands, toy.schema, tcfg);
  };
  return nn::grad_check(model.params(), program);
}

std::vector<Check> run_gradient_checks(std::uint64_t seed) {
  std::vector<Check> checks;
  Rng rng = Rng::substream(seed, "gradcheck");

  {
    ParamStore store;
    fill(store.create("w", 3, 5), 0.6, rng);
    fill(store.create("b", 3, 1), 0.3, rng);
    Vec x(5);
    for (int i = 0; i < 5; ++i) x[i] = rng.normal();
    checks.push_back(run_one("dense", store, [&](Tape& t) {
      return t.sum(t.tanh(nn::dense(t, t.param(store, "w"), t.constant(x),
                                    t.param(store, "b"))));
    }));
  }

  {
    const int h = 4, in = 3;
    ParamStore store;
    fill(store.create("wx", 4 * h, in), 0.5, rng);
    fill(store.create("wh", 4 * h, h), 0.5, rng);
    fill(store.create("b", 4 * h, 1), 0.2, rng);
    Vec x0(in), x1(in);
    for (int i = 0; i < in; ++i) {
      x0[i] = rng.normal();
      x1[i] = rng.normal();
    }
    checks.push_back(run_one("recurrent_cell", store, [&](Tape& t) {
      nn::LstmVars cell{t.param(store, "wx"), t.param(store, "wh"), t.param(store, "b")};
      nn::LstmState s{t.constant(Vec::Zero(h)), t.constant(Vec::Zero(h))};
      s = nn::lstm_step(t, cell, t.constant(x0), s);
      s = nn::lstm_step(t, cell, t.constant(x1), s);
      return t.add(t.sum(s.h), t.sum(s.c));
    }));
  }

  {
    const int a = 4, h = 3, q = 3, n = 5;
    ParamStore store;
    fill(store.create("we", a, h), 0.5, rng);
    fill(store.create("wd", a, q), 0.5, rng);
    fill(store.create("v", a, 1), 0.5, rng);
    fill(store.create("enc", h, n), 0.7, rng);
    fill(store.create("query", q, 1), 0.7, rng);
    checks.push_back(run_one("additive_attention", store, [&](Tape& t) {
      nn::AttentionVars attn{t.param(store, "we"), t.param(store, "wd"),
                             t.param(store, "v")};
      Var premix = nn::attention_precompute(t, attn, t.param(store, "enc"));
      Var u = nn::attention_scores(t, attn, premix, t.param(store, "query"));
      return t.sum(t.tanh(u));
    }));
  }

  {
    ParamStore store;
    fill(store.create("u", 6, 1), 1.0, rng);
    std::vector<char> forbidden{0, 1, 0, 0, 1, 0};
    Vec w = Vec::Zero(6);
    w[0] = 0.5;
    w[3] = 0.25;
    w[5] = 0.25;
    checks.push_back(run_one("masked_softmax", store, [&](Tape& t) {
      Var p = t.masked_softmax(t.param(store, "u"), forbidden);
      return t.weighted_neg_log(p, w);
    }));
  }

  {
    ParamStore store;
    fill(store.create("x", 4, 8), 0.8, rng);
    fill(store.create("gamma", 4, 1), 0.4, rng);
    store.at("gamma").array() += 1.0;
    fill(store.create("beta", 4, 1), 0.3, rng);
    checks.push_back(run_one("batchnorm_batch", store, [&](Tape& t) {
      Mat rm = Mat::Zero(4, 1), rv = Mat::Ones(4, 1);
      Var y = t.batchnorm(t.param(store, "x"), t.param(store, "gamma"),
                          t.param(store, "beta"), rm, rv, /*train=*/true);
      return t.sum(t.tanh(y));
    }));
  }

  {
    ToyProblem toy = make_toy(6, 2, 2, seed + 3);
    ParamStore store;
    fill(store.create("u1", 6, 1), 1.0, rng);
    fill(store.create("u2", 6, 1), 1.0, rng);
    std::vector<char> none(6, 0);
    checks.push_back(run_one("soft_gap", store, [&](Tape& t) {
      std::vector<Var> probs{t.masked_softmax(t.param(store, "u1"), none),
                             t.masked_softmax(t.param(store, "u2"), none)};
      auto dist = soft_slate_distribution(t, probs, toy.cands, toy.schema);
      return soft_gap(t, toy.cands.criteria, dist);
    }));
  }

  {
    nn::GradCheckReport rep = check_supervised_loss(5, 2, 2, 3, 8, seed + 4);
    checks.push_back(
        Check{"supervised_loss_toy", rep.max_rel_error, 1e-4, rep.max_rel_error < 1e-4});
  }

  return checks;
}

}  // namespace slateopt::verify
