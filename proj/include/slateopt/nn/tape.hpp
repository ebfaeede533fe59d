#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "slateopt/errors.hpp"
#include "slateopt/rng.hpp"
#include "slateopt/types.hpp"

namespace slateopt::nn {

class ParamStore;

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Records one forward pass and computes reverse-mode gradients of a scalar
/// output with respect to every node. Parameters bound via param() are
/// single nodes per tape, so reusing a parameter across timesteps
/// accumulates its gradient additively.
class Tape {
 public:
  Tape() { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat v);
  Var constant(const Vec& v) { return constant(Mat(v)); }
  Var scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

  // Binds a named parameter from the store; repeated requests for the same
  // name return the same node.
  Var param(const ParamStore& store, const std::string& name);
  const std::map<std::string, Var>& bound_params() const { return params_; }

  const Mat& val(Var v) const { return nodes_.at(check(v)).value; }
  const Mat& grad(Var v) const { return nodes_.at(check(v)).grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Elementwise / linear algebra
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);          // Hadamard
  Var scale(Var a, double s);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var rows(Var a, int start, int count);
  Var vcat(Var a, Var b);          // stack vertically
  Var hcat(const std::vector<Var>& cols);
  Var add_col_broadcast(Var m, Var v);  // m + v * ones(1, cols)

  // Nonlinearities
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);

  // Reductions to 1x1 scalars
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var entry(Var a, int i);
  Var log_entry(Var a, int i);

  // Softmax over non-forbidden entries of a column vector; forbidden entries
  // are excluded from the normalizer, so their outputs and gradients are
  // exactly zero.
  Var masked_softmax(Var scores, const std::vector<char>& forbidden);

  // Train-mode inverted dropout. rate == 0 returns the input unchanged.
  Var dropout(Var a, double rate, Rng& rng);

  // x is features x batch. Batches of >= 2 in train mode normalize by batch
  // statistics and update the running stats; batches of 1 and eval mode
  // normalize by the running stats.
  Var batchnorm(Var x, Var gamma, Var beta, Mat& running_mean, Mat& running_var,
                bool train, double momentum = 0.1, double eps = 1e-12);

  // Running-stats normalization only; never writes the stats. This is the
  // path sequential decoding takes, where each step is a batch of one.
  Var batchnorm_frozen(Var x, Var gamma, Var beta, const Mat& running_mean,
                       const Mat& running_var, double eps = 1e-12);

  // -sum_i w_i * ln(p_i) over entries with w_i != 0.
  Var weighted_neg_log(Var p, const Vec& w);

  // max_i |target_i - r_i| with the subgradient routed to the first argmax.
  Var linf_gap(const Vec& target, Var r);

  // Reverse sweep from a 1x1 scalar node.
  void backward(Var output);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&)> back;  // null for leaves
  };

  int check(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
      throw ArgumentError("tape: invalid node handle");
    return v.id;
  }
  Var push(Mat value, std::function<void(Tape&)> back = nullptr);
  Mat& g(int id) { return nodes_[id].grad; }
  const Mat& v(int id) const { return nodes_[id].value; }

  std::vector<Node> nodes_;
  std::map<std::string, Var> params_;
};

}  // namespace slateopt::nn
