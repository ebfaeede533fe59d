#include "slateopt/nn/param_store.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian");

namespace slateopt::nn {

Mat& ParamStore::create(const std::string& name, int rows, int cols, bool trainable) {
  if (entries_.count(name)) throw ArgumentError("param store: duplicate name " + name);
  Entry e;
  e.value = Mat::Zero(rows, cols);
  e.m = Mat::Zero(rows, cols);
  e.s = Mat::Zero(rows, cols);
  e.trainable = trainable;
  auto [it, ok] = entries_.emplace(name, std::move(e));
  (void)ok;
  return it->second.value;
}

Mat& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ArgumentError("param store: unknown name " + name);
  return it->second.value;
}

const Mat& ParamStore::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ArgumentError("param store: unknown name " + name);
  return it->second.value;
}

bool ParamStore::trainable(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ArgumentError("param store: unknown name " + name);
  return it->second.trainable;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

void ParamStore::adabelief_step(const std::map<std::string, Mat>& grads, double lr,
                                double beta1, double beta2, double eps) {
  for (const auto& [name, g] : grads) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ArgumentError("adabelief: unknown parameter " + name);
    Entry& e = it->second;
    if (!e.trainable) continue;
    if (g.rows() != e.value.rows() || g.cols() != e.value.cols())
      throw DimensionError("adabelief: gradient shape mismatch for " + name);
    if (!g.allFinite()) throw NumericError("adabelief: non-finite gradient for " + name);

    e.step += 1;
    e.m = beta1 * e.m + (1.0 - beta1) * g;
    Mat diff = g - e.m;
    e.s = beta2 * e.s + (1.0 - beta2) * diff.cwiseProduct(diff);
    e.s.array() += eps;
    double mc = 1.0 - std::pow(beta1, static_cast<double>(e.step));
    double sc = 1.0 - std::pow(beta2, static_cast<double>(e.step));
    Mat m_hat = e.m / mc;
    Mat s_hat = e.s / sc;
    e.value.array() -= lr * m_hat.array() / (s_hat.array().sqrt() + eps);
  }
}

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  std::ostringstream header;
  header << "SLATEOPT-CKPT 1\n";
  header << "config " << meta << "\n";
  std::size_t offset = 0;
  for (const auto& [name, e] : entries_) {
    header << "array " << name << " " << e.value.rows() << " " << e.value.cols() << " "
           << offset << " " << (e.trainable ? 1 : 0) << "\n";
    offset += static_cast<std::size_t>(e.value.size());
  }
  header << "data " << offset << "\n";
  out << header.str();
  for (const auto& [name, e] : entries_) {
    for (long c = 0; c < e.value.cols(); ++c) {
      for (long r = 0; r < e.value.rows(); ++r) {
        float f = static_cast<float>(e.value(r, c));
        out.write(reinterpret_cast<const char*>(&f), sizeof(float));
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "SLATEOPT-CKPT 1")
    throw ParseError("checkpoint: bad magic in " + path);

  ParamStore store;
  struct Pending {
    std::string name;
    long rows, cols;
    std::size_t offset;
    bool trainable;
  };
  std::vector<Pending> pending;
  std::size_t total = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "config") {
      auto pos = line.find(' ');
      store.meta = pos == std::string::npos ? "" : line.substr(pos + 1);
    } else if (tag == "array") {
      Pending p;
      int tr = 1;
      if (!(ls >> p.name >> p.rows >> p.cols >> p.offset >> tr))
        throw ParseError("checkpoint: malformed array line: " + line);
      p.trainable = tr != 0;
      pending.push_back(p);
    } else if (tag == "data") {
      if (!(ls >> total)) throw ParseError("checkpoint: malformed data line");
      break;
    } else {
      throw ParseError("checkpoint: unexpected header line: " + line);
    }
  }

  std::vector<float> payload(total);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(total * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != total * sizeof(float))
    throw ParseError("checkpoint: truncated payload in " + path);

  for (const auto& p : pending) {
    Mat& m = store.create(p.name, static_cast<int>(p.rows), static_cast<int>(p.cols),
                          p.trainable);
    std::size_t at = p.offset;
    if (at + static_cast<std::size_t>(p.rows * p.cols) > total)
      throw ParseError("checkpoint: array " + p.name + " exceeds payload");
    for (long c = 0; c < p.cols; ++c)
      for (long r = 0; r < p.rows; ++r) m(r, c) = static_cast<double>(payload[at++]);
  }
  return store;
}

}  // namespace slateopt::nn
