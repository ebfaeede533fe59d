#pragma once

#include <map>
#include <string>
#include <vector>

#include "slateopt/types.hpp"

namespace slateopt {

struct Dataset {
  std::vector<CandidateSet> queries;
  int feature_dim = 0;

  int query_count() const { return static_cast<int>(queries.size()); }
};

// Parses "<label> qid:<id> <idx>:<val> ... [# comment]" lines. Features are
// 1-based sparse, missing entries are 0, and the dense width is the largest
// index seen in the file. Lines whose comment is exactly "pad" are padding
// items. Queries are grouped by qid in first-appearance order; a qid whose
// lines are not contiguous is still grouped, with a warning on stderr.
Dataset parse_letor(const std::string& path);

// Inverse of parse_letor. Zero entries are dropped except the last feature
// column, which is always written so the parsed width matches feature_dim.
// Padding items carry a "# pad" comment. Floats are shortest round-trip.
void write_letor(const Dataset& data, const std::string& path);

// Copies the given 0-based feature column into every item's base_score.
void extract_base_scores(Dataset& data, int column);

// One line per (qid, variable): "<qid> <variable-name> <v1>,<v2>,...".
void write_criteria_sidecar(const std::string& path, const Dataset& data,
                            const std::vector<std::string>& var_names);

// Returns qid -> criteria with targets ordered like var_names. Every qid must
// appear exactly once per variable; vectors are validated against the schema.
std::map<std::string, DistributionalCriteria> read_criteria_sidecar(
    const std::string& path, const std::vector<std::string>& var_names,
    const CategoricalSchema& schema);

// Joins sidecar records onto the dataset. A query without criteria is a hard
// error, never a silent default.
void attach_criteria(Dataset& data,
                     const std::map<std::string, DistributionalCriteria>& by_qid);

}  // namespace slateopt
