#include "slateopt/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace slateopt {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& why) {
  throw ParseError("config: " + path + ": " + why);
}

template <typename T>
T field(const json& j, const std::string& path, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(path + "." + key, e.what());
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("config: " + path + ": " + e.what());
  }

  ExperimentConfig cfg;
  cfg.seed = field<std::uint64_t>(j, "", "seed", 0);

  if (j.contains("paths")) {
    const json& p = j.at("paths");
    cfg.train_path = field<std::string>(p, "paths", "train", "");
    cfg.valid_path = field<std::string>(p, "paths", "valid", "");
    cfg.test_path = field<std::string>(p, "paths", "test", "");
    cfg.checkpoint_dir = field<std::string>(p, "paths", "checkpoint_dir", ".");
    cfg.report_dir = field<std::string>(p, "paths", "report_dir", ".");
  }

  if (j.contains("schema")) {
    const json& s = j.at("schema");
    cfg.auto_select_binary = field<int>(s, "schema", "auto_select_binary", 0);
    cfg.base_score_column = field<int>(s, "schema", "base_score_column", 0);
    cfg.raw_base_score_column = field<int>(s, "schema", "raw_base_score_column", 0);
    if (s.contains("variables")) {
      for (std::size_t i = 0; i < s.at("variables").size(); ++i) {
        const json& v = s.at("variables").at(i);
        std::string at = "schema.variables[" + std::to_string(i) + "]";
        SchemaVariable var;
        var.name = field<std::string>(v, at, "name", "");
        var.columns = field<std::vector<int>>(v, at, "columns", {});
        if (var.name.empty()) config_error(at + ".name", "missing");
        if (var.columns.size() < 2) config_error(at + ".columns", "needs >= 2 columns");
        cfg.variables.push_back(std::move(var));
      }
    }
  }

  if (j.contains("sim")) {
    const json& s = j.at("sim");
    cfg.sim.eta = field<double>(s, "sim", "eta", cfg.sim.eta);
    cfg.sim.nu = field<int>(s, "sim", "nu", cfg.sim.nu);
    cfg.sim.max_len = field<int>(s, "sim", "max_len", cfg.sim.max_len);
    cfg.sim.click_threshold = field<double>(s, "sim", "click_threshold", cfg.sim.click_threshold);
    cfg.sim.rng_seed = field<std::uint64_t>(s, "sim", "seed", cfg.seed);
  } else {
    cfg.sim.rng_seed = cfg.seed;
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    cfg.model.embed_dim = field<int>(m, "model", "embed_dim", cfg.model.embed_dim);
    cfg.model.hidden_dim = field<int>(m, "model", "hidden_dim", cfg.model.hidden_dim);
    cfg.model.head_dim = field<int>(m, "model", "head_dim", cfg.model.head_dim);
    cfg.model.dropout_rate = field<double>(m, "model", "dropout_rate", cfg.model.dropout_rate);
    cfg.model.slate_size = field<int>(m, "model", "slate_size", cfg.model.slate_size);
    cfg.model.use_condition_info =
        field<bool>(m, "model", "use_condition_info", cfg.model.use_condition_info);
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    cfg.train.alpha = field<double>(t, "train", "alpha", cfg.train.alpha);
    cfg.train.beta = field<double>(t, "train", "beta", cfg.train.beta);
    cfg.train.lr = field<double>(t, "train", "lr", cfg.train.lr);
    cfg.train.batch_size = field<int>(t, "train", "batch_size", cfg.train.batch_size);
    cfg.train.baseline_decay =
        field<double>(t, "train", "baseline_decay", cfg.train.baseline_decay);
    cfg.train.patience = field<int>(t, "train", "patience", cfg.train.patience);
    cfg.train.max_epochs = field<int>(t, "train", "max_epochs", cfg.train.max_epochs);
    std::string mode = field<std::string>(t, "train", "mode", "rl");
    if (mode == "rl")
      cfg.train.mode = TrainMode::kRl;
    else if (mode == "sl")
      cfg.train.mode = TrainMode::kSl;
    else
      config_error("train.mode", "expected 'rl' or 'sl', got '" + mode + "'");
    std::string baseline = field<std::string>(t, "train", "baseline", "ema");
    if (baseline == "ema")
      cfg.train.baseline = BaselineMode::kEma;
    else if (baseline == "batch_mean")
      cfg.train.baseline = BaselineMode::kBatchMean;
    else
      config_error("train.baseline", "expected 'ema' or 'batch_mean'");
    cfg.train.rng_seed = field<std::uint64_t>(t, "train", "seed", cfg.seed);
  } else {
    cfg.train.rng_seed = cfg.seed;
  }
  cfg.train.slate_size = cfg.model.slate_size;

  if (j.contains("mmr")) {
    const json& m = j.at("mmr");
    cfg.mmr.lambda = field<double>(m, "mmr", "lambda", cfg.mmr.lambda);
    if (m.contains("grid"))
      cfg.mmr.grid = field<std::vector<double>>(m, "mmr", "grid", {});
  }
  if (cfg.mmr.grid.empty()) cfg.mmr.grid = mmr::MmrConfig::default_grid();
  cfg.mmr.slate_size = cfg.model.slate_size;

  return cfg;
}

CategoricalSchema schema_from_variables(const std::vector<SchemaVariable>& variables,
                                        int feature_dim) {
  if (variables.empty()) throw ArgumentError("schema: no categorical variables declared");
  CategoricalSchema schema;
  schema.feature_dim = feature_dim;
  for (const auto& v : variables) {
    std::vector<int> cols;
    for (int c : v.columns) {
      if (c < 1) throw ArgumentError("schema: columns are 1-based; got " + std::to_string(c));
      cols.push_back(c - 1);
    }
    std::sort(cols.begin(), cols.end());
    schema.variables.push_back(std::move(cols));
  }
  schema.validate();
  return schema;
}

std::vector<std::string> variable_names(const std::vector<SchemaVariable>& variables) {
  std::vector<std::string> names;
  names.reserve(variables.size());
  for (const auto& v : variables) names.push_back(v.name);
  return names;
}

Dataset load_split(const std::string& path, const ExperimentConfig& cfg,
                   const CategoricalSchema& schema, bool require_criteria) {
  Dataset data = parse_letor(path);
  if (data.feature_dim < schema.feature_dim) data.feature_dim = schema.feature_dim;
  for (auto& q : data.queries)
    for (auto& item : q.items)
      if (item.features.size() < data.feature_dim) {
        Vec widened = Vec::Zero(data.feature_dim);
        widened.head(item.features.size()) = item.features;
        item.features = std::move(widened);
      }
  if (cfg.base_score_column > 0) {
    if (cfg.base_score_column > data.feature_dim)
      throw ArgumentError("base_score_column " + std::to_string(cfg.base_score_column) +
                          " exceeds feature dim " + std::to_string(data.feature_dim));
    extract_base_scores(data, cfg.base_score_column - 1);
  }
  if (require_criteria) {
    auto by_qid = read_criteria_sidecar(path + ".criteria", variable_names(cfg.variables),
                                        schema);
    attach_criteria(data, by_qid);
  }
  for (const auto& q : data.queries) validate_one_hot(q, schema);
  return data;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void write_summary_csv(const std::vector<MethodSummary>& rows, const std::string& path) {
  if (rows.empty()) throw ArgumentError("write_summary_csv: no rows");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report for writing: " + path);
  out << "method,ndcg,gap,goodness\n";
  for (const auto& r : rows)
    out << r.method << ',' << fmt(r.ndcg) << ',' << fmt(r.gap) << ',' << fmt(r.goodness)
        << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_sweep_csv(const mmr::SweepResult& sweep,
                     const std::vector<std::string>& var_names, const std::string& path) {
  if (sweep.rows.empty()) throw ArgumentError("write_sweep_csv: empty sweep");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report for writing: " + path);
  out << "lambda";
  for (const auto& name : var_names) out << ",gap_" << name;
  out << ",gap,ndcg,goodness\n";
  for (const auto& row : sweep.rows) {
    out << fmt(row.lambda);
    for (int j = 0; j < row.per_variable_gaps.size(); ++j)
      out << ',' << fmt(row.per_variable_gaps[j]);
    out << ',' << fmt(row.gap) << ',' << fmt(row.ndcg) << ',' << fmt(row.goodness) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_per_query_csv(const std::vector<QueryScoreRow>& rows, const EvalResult& mean,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report for writing: " + path);
  out << "qid,ndcg,gap,reward,goodness\n";
  for (const auto& r : rows)
    out << r.qid << ',' << fmt(r.score.ndcg) << ',' << fmt(r.score.gap) << ','
        << fmt(r.score.reward) << ',' << fmt(r.score.goodness) << '\n';
  out << "mean," << fmt(mean.ndcg) << ',' << fmt(mean.gap) << ',' << fmt(mean.reward)
      << ',' << fmt(mean.goodness) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_slates_csv(const std::vector<std::pair<std::string, Slate>>& slates,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report for writing: " + path);
  out << "qid,indices\n";
  for (const auto& [qid, slate] : slates) {
    out << qid << ',';
    for (std::size_t i = 0; i < slate.indices.size(); ++i) {
      if (i) out << ' ';
      out << slate.indices[i];
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Slate score_order_slate(const CandidateSet& cands, int k) {
  if (cands.real_count() < k)
    throw ArgumentError("score_order_slate: fewer than k real items");
  Slate slate;
  for (int i = 0; i < cands.size() && slate.size() < k; ++i)
    if (!cands.items[i].is_padding) slate.indices.push_back(i);
  return slate;
}

}  // namespace slateopt
