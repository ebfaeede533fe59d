#pragma once

#include <string>
#include <vector>

#include "slateopt/letor.hpp"
#include "slateopt/mmr.hpp"
#include "slateopt/model.hpp"
#include "slateopt/simulate.hpp"
#include "slateopt/training.hpp"

namespace slateopt {

struct SchemaVariable {
  std::string name;
  std::vector<int> columns;  // 1-based feature columns in config files
};

struct ExperimentConfig {
  std::uint64_t seed = 0;

  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string checkpoint_dir = ".";
  std::string report_dir = ".";

  std::vector<SchemaVariable> variables;
  int auto_select_binary = 0;     // simulate: pick N binary columns by variance
  int base_score_column = 0;      // 1-based column carrying base scores; 0 = none
  int raw_base_score_column = 0;  // simulate input scores; 0 = fit builtin ranker

  sim::SimConfig sim;
  ModelConfig model;
  TrainConfig train;
  mmr::MmrConfig mmr;
};

// JSON config; unknown or ill-typed fields are reported with their path.
ExperimentConfig load_config(const std::string& path);

CategoricalSchema schema_from_variables(const std::vector<SchemaVariable>& variables,
                                        int feature_dim);
std::vector<std::string> variable_names(const std::vector<SchemaVariable>& variables);

// parse + base-score extraction + sidecar join (at "<path>.criteria") +
// one-hot validation.
Dataset load_split(const std::string& path, const ExperimentConfig& cfg,
                   const CategoricalSchema& schema, bool require_criteria = true);

struct MethodSummary {
  std::string method;
  double ndcg = 0.0;
  double gap = 0.0;
  double goodness = 0.0;
};

void write_summary_csv(const std::vector<MethodSummary>& rows, const std::string& path);

void write_sweep_csv(const mmr::SweepResult& sweep,
                     const std::vector<std::string>& var_names, const std::string& path);

struct QueryScoreRow {
  std::string qid;
  SlateScore score;
};

void write_per_query_csv(const std::vector<QueryScoreRow>& rows, const EvalResult& mean,
                         const std::string& path);

void write_slates_csv(const std::vector<std::pair<std::string, Slate>>& slates,
                      const std::string& path);

// Slate of the first k real items in file (base-ranker) order.
Slate score_order_slate(const CandidateSet& cands, int k);

}  // namespace slateopt
