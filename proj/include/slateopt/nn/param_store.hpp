#pragma once

#include <map>
#include <string>
#include <vector>

#include "slateopt/errors.hpp"
#include "slateopt/types.hpp"

namespace slateopt::nn {

/// Named trainable arrays plus per-parameter AdaBelief slots. Forward passes
/// read values concurrently; applying gradients is single-writer.
class ParamStore {
 public:
  Mat& create(const std::string& name, int rows, int cols, bool trainable = true);
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;
  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  bool trainable(const std::string& name) const;
  std::vector<std::string> names() const;

  // m <- b1*m + (1-b1)*g ; s <- b2*s + (1-b2)*(g-m)^2 + eps ; both
  // bias-corrected; param <- param - lr * m_hat / (sqrt(s_hat) + eps).
  // Only parameters present in grads are touched. Throws NumericError with
  // the parameter name on a non-finite gradient.
  void adabelief_step(const std::map<std::string, Mat>& grads, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // Checkpoint container: text header (name/shape/offset per array, plus a
  // caller-provided metadata line) followed by raw little-endian float32
  // payload. Round-trips bit-exactly.
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

  std::string meta;  // serialized into / restored from the checkpoint header

 private:
  struct Entry {
    Mat value;
    Mat m;  // first moment
    Mat s;  // belief (second) moment
    long step = 0;
    bool trainable = true;
  };
  std::map<std::string, Entry> entries_;  // ordered: deterministic iteration
};

}  // namespace slateopt::nn
