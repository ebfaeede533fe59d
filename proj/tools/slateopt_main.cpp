#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slateopt/experiment.hpp"
#include "slateopt/ranker.hpp"
#include "slateopt/verify.hpp"

namespace fs = std::filesystem;
using namespace slateopt;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out;
  std::string checkpoint;
  std::string split = "test";
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<int> k;
  std::optional<std::string> mode;
  bool no_condition_info = false;
};

ExperimentConfig effective_config(const CliOptions& opt) {
  if (opt.config_path.empty()) throw ArgumentError("--config is required");
  ExperimentConfig cfg = load_config(opt.config_path);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.sim.rng_seed = *opt.seed;
    cfg.train.rng_seed = *opt.seed;
  }
  if (opt.alpha) cfg.train.alpha = *opt.alpha;
  if (opt.k) {
    cfg.model.slate_size = *opt.k;
    cfg.train.slate_size = *opt.k;
    cfg.mmr.slate_size = *opt.k;
  }
  if (opt.mode) {
    if (*opt.mode == "rl")
      cfg.train.mode = TrainMode::kRl;
    else if (*opt.mode == "sl")
      cfg.train.mode = TrainMode::kSl;
    else
      throw ArgumentError("--mode must be rl or sl");
  }
  if (opt.no_condition_info) cfg.model.use_condition_info = false;
  if (opt.lambda) cfg.mmr.grid = {*opt.lambda};
  return cfg;
}

std::string split_path(const ExperimentConfig& cfg, const std::string& split) {
  if (split == "train") return cfg.train_path;
  if (split == "valid") return cfg.valid_path;
  if (split == "test") return cfg.test_path;
  throw ArgumentError("--split must be train, valid, or test");
}

std::string default_checkpoint(const ExperimentConfig& cfg) {
  return (fs::path(cfg.checkpoint_dir) / "model.ckpt").string();
}

int cmd_simulate(const CliOptions& opt) {
  ExperimentConfig cfg = effective_config(opt);
  std::string out_dir = opt.out.empty() ? "augmented" : opt.out;
  fs::create_directories(out_dir);

  struct SplitIn {
    std::string name;
    std::string path;
  };
  std::vector<SplitIn> splits;
  if (!cfg.train_path.empty()) splits.push_back({"train", cfg.train_path});
  if (!cfg.valid_path.empty()) splits.push_back({"valid", cfg.valid_path});
  if (!cfg.test_path.empty()) splits.push_back({"test", cfg.test_path});
  if (splits.empty()) throw ArgumentError("simulate: no input paths in config");

  std::vector<Dataset> raw;
  for (const auto& s : splits) raw.push_back(parse_letor(s.path));
  int m = 0;
  for (const auto& d : raw) m = std::max(m, d.feature_dim);
  for (auto& d : raw) {
    d.feature_dim = m;
    for (auto& q : d.queries)
      for (auto& item : q.items)
        if (item.features.size() < m) {
          Vec widened = Vec::Zero(m);
          widened.head(item.features.size()) = item.features;
          item.features = std::move(widened);
        }
  }

  CategoricalSchema schema;
  std::vector<std::string> names;
  if (cfg.auto_select_binary > 0) {
    auto cols = sim::select_variance_columns(raw.front(), cfg.auto_select_binary);
    for (int c : cols) names.push_back("col" + std::to_string(c + 1));
    for (auto& d : raw) schema = sim::expand_binary_columns(d, cols);
  } else {
    schema = schema_from_variables(cfg.variables, m);
    names = variable_names(cfg.variables);
  }

  // Base scores: injected column or the builtin ridge ranker fit on train.
  std::optional<LinearRanker> ranker;
  if (cfg.raw_base_score_column == 0) ranker = LinearRanker::fit(raw.front());

  nlohmann::json manifest;
  manifest["feature_dim"] = raw.front().feature_dim + 1;
  manifest["base_score_column"] = raw.front().feature_dim + 1;
  manifest["variables"] = nlohmann::json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    nlohmann::json v;
    v["name"] = names[j];
    nlohmann::json cols = nlohmann::json::array();
    for (int c : schema.variables[j]) cols.push_back(c + 1);
    v["columns"] = cols;
    manifest["variables"].push_back(v);
  }

  for (std::size_t si = 0; si < raw.size(); ++si) {
    std::vector<std::vector<double>> scores;
    if (cfg.raw_base_score_column > 0) {
      int col = cfg.raw_base_score_column - 1;
      if (col >= raw[si].feature_dim)
        throw ArgumentError("raw_base_score_column exceeds feature dim");
      for (const auto& q : raw[si].queries) {
        std::vector<double> qs;
        for (const auto& item : q.items) qs.push_back(item.features[col]);
        scores.push_back(std::move(qs));
      }
    } else {
      scores = ranker->score_dataset(raw[si]);
    }
    sim::SimConfig scfg = cfg.sim;
    scfg.rng_seed = cfg.sim.rng_seed ^ fnv1a64(splits[si].name);
    Dataset augmented = sim::augment_dataset(raw[si], scores, scfg, schema);
    std::string out_path = (fs::path(out_dir) / (splits[si].name + ".letor")).string();
    write_letor(augmented, out_path);
    write_criteria_sidecar(out_path + ".criteria", augmented, names);
    std::printf("simulate: wrote %s (%d sub-queries)\n", out_path.c_str(),
                augmented.query_count());
  }

  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::printf("simulate: schema and score column recorded in %s/manifest.json\n",
              out_dir.c_str());
  return 0;
}

int cmd_train(const CliOptions& opt) {
  ExperimentConfig cfg = effective_config(opt);
  if (cfg.train_path.empty() || cfg.valid_path.empty())
    throw ArgumentError("train: config must set paths.train and paths.valid");

  Dataset train_data = parse_letor(cfg.train_path);
  CategoricalSchema schema = schema_from_variables(cfg.variables, train_data.feature_dim);
  train_data = load_split(cfg.train_path, cfg, schema);
  Dataset valid_data = load_split(cfg.valid_path, cfg, schema);

  PointerNetwork model(cfg.model, train_data.feature_dim, schema.total_width(), cfg.seed);
  TrainResult result = train(model, train_data, valid_data, schema, cfg.train);

  fs::create_directories(cfg.checkpoint_dir);
  std::string ckpt = opt.out.empty() ? default_checkpoint(cfg) : opt.out;
  PointerNetwork best(model.config(), model.feature_dim(), model.ci_dim(),
                      result.best_params);
  best.save(ckpt);
  std::string log_path = ckpt + ".log.csv";
  write_train_log(result.log, log_path);
  std::printf("train: best epoch %d, validation goodness %.4f\n", result.best_epoch,
              result.best_goodness);
  std::printf("train: checkpoint %s, log %s\n", ckpt.c_str(), log_path.c_str());
  return 0;
}

int cmd_evaluate(const CliOptions& opt) {
  ExperimentConfig cfg = effective_config(opt);
  std::string path = split_path(cfg, opt.split);
  if (path.empty()) throw ArgumentError("evaluate: split path missing in config");
  std::string ckpt = opt.checkpoint.empty() ? default_checkpoint(cfg) : opt.checkpoint;
  PointerNetwork model = PointerNetwork::load(ckpt);
  Dataset data = parse_letor(path);
  CategoricalSchema schema = schema_from_variables(cfg.variables, data.feature_dim);
  data = load_split(path, cfg, schema);

  double alpha = cfg.train.alpha;
  std::vector<QueryScoreRow> rows;
  for (const auto& q : data.queries) {
    if (q.real_count() < model.config().slate_size) continue;
    auto [slate, probs] = model.generate_slate(q, schema, DecodeMode::kGreedy);
    rows.push_back({q.query_id,
                    score_slate(q, slate, schema, alpha, model.config().slate_size)});
  }
  EvalResult mean = evaluate(model, data, schema, alpha);

  fs::create_directories(cfg.report_dir);
  std::string out = opt.out.empty()
                        ? (fs::path(cfg.report_dir) / ("evaluate_" + opt.split + ".csv")).string()
                        : opt.out;
  write_per_query_csv(rows, mean, out);
  std::printf("evaluate: %s mean ndcg %.4f gap %.4f goodness %.4f (%d queries, %d skipped)\n",
              opt.split.c_str(), mean.ndcg, mean.gap, mean.goodness, mean.used,
              mean.skipped);
  std::printf("evaluate: wrote %s\n", out.c_str());
  return 0;
}

int cmd_rerank(const CliOptions& opt) {
  ExperimentConfig cfg = effective_config(opt);
  std::string path = split_path(cfg, opt.split);
  if (path.empty()) throw ArgumentError("rerank: split path missing in config");
  std::string ckpt = opt.checkpoint.empty() ? default_checkpoint(cfg) : opt.checkpoint;
  PointerNetwork model = PointerNetwork::load(ckpt);
  Dataset data = parse_letor(path);
  CategoricalSchema schema = schema_from_variables(cfg.variables, data.feature_dim);
  data = load_split(path, cfg, schema);

  std::vector<std::pair<std::string, Slate>> slates;
  int skipped = 0;
  for (const auto& q : data.queries) {
    if (q.real_count() < model.config().slate_size) {
      ++skipped;
      continue;
    }
    auto [slate, probs] = model.generate_slate(q, schema, DecodeMode::kGreedy);
    slates.emplace_back(q.query_id, std::move(slate));
  }
  fs::create_directories(cfg.report_dir);
  std::string out = opt.out.empty()
                        ? (fs::path(cfg.report_dir) / ("slates_" + opt.split + ".csv")).string()
                        : opt.out;
  write_slates_csv(slates, out);
  std::printf("rerank: wrote %zu slates to %s (%d skipped)\n", slates.size(), out.c_str(),
              skipped);
  return 0;
}

int cmd_sweep_mmr(const CliOptions& opt) {
  ExperimentConfig cfg = effective_config(opt);
  std::string path = split_path(cfg, opt.split);
  if (path.empty()) throw ArgumentError("sweep-mmr: split path missing in config");
  Dataset data = parse_letor(path);
  CategoricalSchema schema = schema_from_variables(cfg.variables, data.feature_dim);
  data = load_split(path, cfg, schema);

  mmr::SweepResult sweep = mmr::lambda_sweep(data, schema, cfg.mmr, cfg.train.alpha);
  fs::create_directories(cfg.report_dir);
  std::string out = opt.out.empty()
                        ? (fs::path(cfg.report_dir) / ("mmr_sweep_" + opt.split + ".csv")).string()
                        : opt.out;
  write_sweep_csv(sweep, variable_names(cfg.variables), out);
  const auto& best = sweep.best_row();
  std::printf("sweep-mmr: best lambda %.2f ndcg %.4f gap %.4f goodness %.4f\n",
              best.lambda, best.ndcg, best.gap, best.goodness);
  std::printf("sweep-mmr: wrote %s\n", out.c_str());
  return 0;
}

int cmd_grad_check() {
  auto checks = verify::run_gradient_checks();
  bool all_ok = true;
  for (const auto& c : checks) {
    std::printf("%-22s max rel error %.3e  (tol %.0e)  %s\n", c.name.c_str(),
                c.max_rel_error, c.tolerance, c.passed ? "ok" : "FAIL");
    all_ok = all_ok && c.passed;
  }
  if (!all_ok) throw NumericError("gradient checks failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slate re-ranking toolkit: distribution-aware pointer-network "
               "re-ranker, MMR baseline, and click simulation"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config_path, "experiment config JSON");
    if (needs_config) c->required();
    sub->add_option("--seed", opt.seed, "override config seed");
    sub->add_option("--out", opt.out, "output path override");
  };

  auto* sim_cmd = app.add_subcommand("simulate", "augment a dataset with simulated clicks");
  add_common(sim_cmd, true);

  auto* train_cmd = app.add_subcommand("train", "train the re-ranker");
  add_common(train_cmd, true);
  train_cmd->add_option("--alpha", opt.alpha, "reward/loss balance");
  train_cmd->add_option("--k", opt.k, "slate size");
  train_cmd->add_option("--mode", opt.mode, "rl or sl");
  train_cmd->add_flag("--no-condition-info", opt.no_condition_info,
                      "ablate the condition-information input");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a split");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--checkpoint", opt.checkpoint, "checkpoint path");
  eval_cmd->add_option("--split", opt.split, "train|valid|test");
  eval_cmd->add_option("--alpha", opt.alpha, "reward/loss balance");

  auto* rerank_cmd = app.add_subcommand("rerank", "emit slates for a split");
  add_common(rerank_cmd, true);
  rerank_cmd->add_option("--checkpoint", opt.checkpoint, "checkpoint path");
  rerank_cmd->add_option("--split", opt.split, "train|valid|test");

  auto* sweep_cmd = app.add_subcommand("sweep-mmr", "lambda sweep of the MMR reranker");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--lambda", opt.lambda, "evaluate a single lambda");
  sweep_cmd->add_option("--split", opt.split, "train|valid|test");
  sweep_cmd->add_option("--alpha", opt.alpha, "reward balance");
  sweep_cmd->add_option("--k", opt.k, "slate size");

  auto* gc_cmd = app.add_subcommand("grad-check", "run the gradient verification suite");
  (void)gc_cmd;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints usage or help text
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(opt);
    if (train_cmd->parsed()) return cmd_train(opt);
    if (eval_cmd->parsed()) return cmd_evaluate(opt);
    if (rerank_cmd->parsed()) return cmd_rerank(opt);
    if (sweep_cmd->parsed()) return cmd_sweep_mmr(opt);
    if (gc_cmd->parsed()) return cmd_grad_check();
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
