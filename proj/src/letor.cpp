#include "slateopt/letor.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace slateopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& tok, int line_no, const char* what) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError("line " + std::to_string(line_no) + ": malformed " + what + " '" +
                     tok + "'");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct RawItem {
  double label = 0.0;
  std::vector<std::pair<int, double>> features;  // 1-based indices
  bool is_padding = false;
};

}  // namespace

Dataset parse_letor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);

  std::vector<std::string> qid_order;
  std::map<std::string, std::size_t> qid_index;
  std::vector<std::vector<RawItem>> raw;
  int max_feature = 0;
  int line_no = 0;
  int non_contiguous = 0;
  std::string last_qid;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    std::string comment;
    auto hash = line.find('#');
    if (hash != std::string::npos) {
      comment = trim(line.substr(hash + 1));
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    RawItem item;
    item.label = parse_double(tok, line_no, "label");
    if (item.label < 0)
      throw ParseError("line " + std::to_string(line_no) + ": negative label");
    item.is_padding = comment == "pad";

    if (!(ls >> tok) || tok.rfind("qid:", 0) != 0 || tok.size() <= 4)
      throw ParseError("line " + std::to_string(line_no) + ": missing qid field");
    std::string qid = tok.substr(4);

    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0)
        throw ParseError("line " + std::to_string(line_no) + ": malformed feature '" +
                         tok + "'");
      int idx = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ec != std::errc() || p != tok.data() + colon || idx < 1)
        throw ParseError("line " + std::to_string(line_no) + ": bad feature index '" +
                         tok + "'");
      double val = parse_double(tok.substr(colon + 1), line_no, "feature value");
      item.features.emplace_back(idx, val);
      max_feature = std::max(max_feature, idx);
    }

    auto it = qid_index.find(qid);
    if (it == qid_index.end()) {
      qid_index.emplace(qid, raw.size());
      qid_order.push_back(qid);
      raw.emplace_back();
      raw.back().push_back(std::move(item));
    } else {
      if (qid != last_qid) ++non_contiguous;
      raw[it->second].push_back(std::move(item));
    }
    last_qid = qid;
  }

  if (non_contiguous > 0)
    std::cerr << "warning: " << path << ": " << non_contiguous
              << " non-contiguous qid block(s) were merged by qid\n";

  Dataset data;
  data.feature_dim = max_feature;
  data.queries.reserve(raw.size());
  for (std::size_t q = 0; q < raw.size(); ++q) {
    CandidateSet cs;
    cs.query_id = qid_order[q];
    cs.items.reserve(raw[q].size());
    for (auto& ri : raw[q]) {
      Item item;
      item.label = ri.label;
      item.is_padding = ri.is_padding;
      item.features = Vec::Zero(max_feature);
      for (auto& [idx, val] : ri.features) item.features[idx - 1] = val;
      cs.items.push_back(std::move(item));
    }
    data.queries.push_back(std::move(cs));
  }
  return data;
}

void write_letor(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open dataset for writing: " + path);
  const int m = data.feature_dim;
  for (const auto& q : data.queries) {
    for (const auto& item : q.items) {
      if (item.features.size() != m)
        throw DimensionError("write_letor: item width differs from feature_dim");
      out << format_double(item.label) << " qid:" << q.query_id;
      for (int i = 0; i < m; ++i) {
        if (item.features[i] != 0.0 || i == m - 1)
          out << ' ' << (i + 1) << ':' << format_double(item.features[i]);
      }
      if (item.is_padding) out << " # pad";
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void extract_base_scores(Dataset& data, int column) {
  if (column < 0 || column >= data.feature_dim)
    throw ArgumentError("base score column out of range");
  for (auto& q : data.queries)
    for (auto& item : q.items) item.base_score = item.features[column];
}

void write_criteria_sidecar(const std::string& path, const Dataset& data,
                            const std::vector<std::string>& var_names) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open sidecar for writing: " + path);
  for (const auto& q : data.queries) {
    if (q.criteria.targets.size() != var_names.size())
      throw DimensionError("sidecar: query " + q.query_id +
                           " has wrong criteria variable count");
    for (std::size_t j = 0; j < var_names.size(); ++j) {
      out << q.query_id << ' ' << var_names[j] << ' ';
      const Vec& d = q.criteria.targets[j];
      for (int i = 0; i < d.size(); ++i) {
        if (i) out << ',';
        out << format_double(d[i]);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::map<std::string, DistributionalCriteria> read_criteria_sidecar(
    const std::string& path, const std::vector<std::string>& var_names,
    const CategoricalSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sidecar: " + path);
  std::map<std::string, std::map<std::string, Vec>> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string qid, name, values;
    if (!(ls >> qid >> name >> values))
      throw ParseError("sidecar line " + std::to_string(line_no) + ": expected 3 fields");
    std::vector<double> vals;
    std::istringstream vs(values);
    std::string piece;
    while (std::getline(vs, piece, ','))
      vals.push_back(parse_double(piece, line_no, "criteria value"));
    Vec d(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) d[static_cast<int>(i)] = vals[i];
    auto& by_name = records[qid];
    if (by_name.count(name))
      throw ParseError("sidecar line " + std::to_string(line_no) + ": duplicate record for qid " +
                       qid + " variable " + name);
    by_name.emplace(name, std::move(d));
  }

  std::map<std::string, DistributionalCriteria> out;
  for (auto& [qid, by_name] : records) {
    DistributionalCriteria c;
    c.targets.reserve(var_names.size());
    for (const auto& name : var_names) {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw ParseError("sidecar: qid " + qid + " is missing variable " + name);
      c.targets.push_back(it->second);
    }
    validate_criteria(c, schema);
    out.emplace(qid, std::move(c));
  }
  return out;
}

void attach_criteria(Dataset& data,
                     const std::map<std::string, DistributionalCriteria>& by_qid) {
  for (auto& q : data.queries) {
    auto it = by_qid.find(q.query_id);
    if (it == by_qid.end())
      throw ArgumentError("no criteria record for query " + q.query_id);
    q.criteria = it->second;
  }
}

}  // namespace slateopt
