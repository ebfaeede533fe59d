#include "slateopt/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slateopt/nn/param_store.hpp"

namespace slateopt::nn {

Var Tape::push(Mat value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), Mat(), std::move(back)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Mat v) { return push(std::move(v)); }

Var Tape::param(const ParamStore& store, const std::string& name) {
  auto it = params_.find(name);
  if (it != params_.end()) return it->second;
  Var v = push(store.at(name));
  params_.emplace(name, v);
  return v;
}

Var Tape::add(Var a, Var b) {
  int ia = check(a), ib = check(b);
  if (v(ia).rows() != v(ib).rows() || v(ia).cols() != v(ib).cols())
    throw DimensionError("tape add: shape mismatch");
  int out = size();
  return push(v(ia) + v(ib), [ia, ib, out](Tape& t) {
    t.g(ia) += t.g(out);
    t.g(ib) += t.g(out);
  });
}

Var Tape::sub(Var a, Var b) {
  int ia = check(a), ib = check(b);
  if (v(ia).rows() != v(ib).rows() || v(ia).cols() != v(ib).cols())
    throw DimensionError("tape sub: shape mismatch");
  int out = size();
  return push(v(ia) - v(ib), [ia, ib, out](Tape& t) {
    t.g(ia) += t.g(out);
    t.g(ib) -= t.g(out);
  });
}

Var Tape::cmul(Var a, Var b) {
  int ia = check(a), ib = check(b);
  if (v(ia).rows() != v(ib).rows() || v(ia).cols() != v(ib).cols())
    throw DimensionError("tape cmul: shape mismatch");
  int out = size();
  return push(v(ia).cwiseProduct(v(ib)), [ia, ib, out](Tape& t) {
    t.g(ia) += t.g(out).cwiseProduct(t.v(ib));
    t.g(ib) += t.g(out).cwiseProduct(t.v(ia));
  });
}

Var Tape::scale(Var a, double s) {
  int ia = check(a);
  int out = size();
  return push(v(ia) * s, [ia, s, out](Tape& t) { t.g(ia) += s * t.g(out); });
}

Var Tape::matmul(Var a, Var b) {
  int ia = check(a), ib = check(b);
  if (v(ia).cols() != v(ib).rows()) throw DimensionError("tape matmul: inner dims differ");
  int out = size();
  return push(v(ia) * v(ib), [ia, ib, out](Tape& t) {
    t.g(ia).noalias() += t.g(out) * t.v(ib).transpose();
    t.g(ib).noalias() += t.v(ia).transpose() * t.g(out);
  });
}

Var Tape::transpose(Var a) {
  int ia = check(a);
  int out = size();
  return push(v(ia).transpose(), [ia, out](Tape& t) { t.g(ia) += t.g(out).transpose(); });
}

Var Tape::rows(Var a, int start, int count) {
  int ia = check(a);
  if (start < 0 || count < 1 || start + count > v(ia).rows())
    throw DimensionError("tape rows: range out of bounds");
  int out = size();
  return push(v(ia).middleRows(start, count), [ia, start, count, out](Tape& t) {
    t.g(ia).middleRows(start, count) += t.g(out);
  });
}

Var Tape::vcat(Var a, Var b) {
  int ia = check(a), ib = check(b);
  if (v(ia).cols() != v(ib).cols()) throw DimensionError("tape vcat: column count differs");
  Mat m(v(ia).rows() + v(ib).rows(), v(ia).cols());
  m.topRows(v(ia).rows()) = v(ia);
  m.bottomRows(v(ib).rows()) = v(ib);
  long ra = v(ia).rows();
  int out = size();
  return push(std::move(m), [ia, ib, ra, out](Tape& t) {
    t.g(ia) += t.g(out).topRows(ra);
    t.g(ib) += t.g(out).bottomRows(t.g(out).rows() - ra);
  });
}

Var Tape::hcat(const std::vector<Var>& cols) {
  if (cols.empty()) throw ArgumentError("tape hcat: no columns");
  std::vector<int> ids;
  ids.reserve(cols.size());
  long r = -1;
  for (Var c : cols) {
    int ic = check(c);
    if (v(ic).cols() != 1) throw DimensionError("tape hcat: inputs must be column vectors");
    if (r < 0) r = v(ic).rows();
    if (v(ic).rows() != r) throw DimensionError("tape hcat: row count differs");
    ids.push_back(ic);
  }
  Mat m(r, static_cast<long>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) m.col(static_cast<long>(i)) = v(ids[i]);
  int out = size();
  return push(std::move(m), [ids, out](Tape& t) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      t.g(ids[i]) += t.g(out).col(static_cast<long>(i));
  });
}

Var Tape::add_col_broadcast(Var m, Var vcol) {
  int im = check(m), iv = check(vcol);
  if (v(iv).cols() != 1 || v(iv).rows() != v(im).rows())
    throw DimensionError("tape add_col_broadcast: shape mismatch");
  int out = size();
  return push(v(im).colwise() + Vec(v(iv).col(0)), [im, iv, out](Tape& t) {
    t.g(im) += t.g(out);
    t.g(iv) += t.g(out).rowwise().sum();
  });
}

Var Tape::sigmoid(Var a) {
  int ia = check(a);
  Mat y = (1.0 + (-v(ia).array()).exp()).inverse().matrix();
  int out = size();
  return push(std::move(y), [ia, out](Tape& t) {
    const Mat& yv = t.v(out);
    t.g(ia).array() += t.g(out).array() * yv.array() * (1.0 - yv.array());
  });
}

Var Tape::tanh(Var a) {
  int ia = check(a);
  Mat y = v(ia).array().tanh().matrix();
  int out = size();
  return push(std::move(y), [ia, out](Tape& t) {
    const Mat& yv = t.v(out);
    t.g(ia).array() += t.g(out).array() * (1.0 - yv.array().square());
  });
}

Var Tape::relu(Var a) {
  int ia = check(a);
  Mat y = v(ia).cwiseMax(0.0);
  int out = size();
  return push(std::move(y), [ia, out](Tape& t) {
    t.g(ia).array() +=
        t.g(out).array() * (t.v(ia).array() > 0.0).cast<double>();
  });
}

Var Tape::sum(Var a) {
  int ia = check(a);
  int out = size();
  return push(Mat::Constant(1, 1, v(ia).sum()), [ia, out](Tape& t) {
    t.g(ia).array() += t.g(out)(0, 0);
  });
}

Var Tape::dot(Var a, Var b) {
  int ia = check(a), ib = check(b);
  if (v(ia).rows() != v(ib).rows() || v(ia).cols() != 1 || v(ib).cols() != 1)
    throw DimensionError("tape dot: expects equal-length column vectors");
  int out = size();
  return push(Mat::Constant(1, 1, v(ia).col(0).dot(v(ib).col(0))), [ia, ib, out](Tape& t) {
    double go = t.g(out)(0, 0);
    t.g(ia) += go * t.v(ib);
    t.g(ib) += go * t.v(ia);
  });
}

Var Tape::entry(Var a, int i) {
  int ia = check(a);
  if (v(ia).cols() != 1 || i < 0 || i >= v(ia).rows())
    throw DimensionError("tape entry: index out of range");
  int out = size();
  return push(Mat::Constant(1, 1, v(ia)(i, 0)), [ia, i, out](Tape& t) {
    t.g(ia)(i, 0) += t.g(out)(0, 0);
  });
}

Var Tape::log_entry(Var a, int i) {
  int ia = check(a);
  if (v(ia).cols() != 1 || i < 0 || i >= v(ia).rows())
    throw DimensionError("tape log_entry: index out of range");
  double x = v(ia)(i, 0);
  if (!(x > 0.0)) throw NumericError("tape log_entry: log of non-positive probability");
  int out = size();
  return push(Mat::Constant(1, 1, std::log(x)), [ia, i, out](Tape& t) {
    t.g(ia)(i, 0) += t.g(out)(0, 0) / t.v(ia)(i, 0);
  });
}

Var Tape::masked_softmax(Var scores, const std::vector<char>& forbidden) {
  int ia = check(scores);
  const Mat& u = v(ia);
  if (u.cols() != 1) throw DimensionError("tape masked_softmax: expects a column vector");
  if (static_cast<long>(forbidden.size()) != u.rows())
    throw DimensionError("tape masked_softmax: mask length mismatch");

  double mx = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < u.rows(); ++i)
    if (!forbidden[static_cast<std::size_t>(i)]) mx = std::max(mx, u(i, 0));
  if (!std::isfinite(mx)) throw StateError("tape masked_softmax: all indices forbidden");

  Mat y = Mat::Zero(u.rows(), 1);
  double z = 0.0;
  for (long i = 0; i < u.rows(); ++i) {
    if (forbidden[static_cast<std::size_t>(i)]) continue;
    double e = std::exp(u(i, 0) - mx);
    y(i, 0) = e;
    z += e;
  }
  y /= z;

  int out = size();
  return push(std::move(y), [ia, out](Tape& t) {
    const Mat& p = t.v(out);
    const Mat& go = t.g(out);
    double inner = (go.array() * p.array()).sum();
    t.g(ia).array() += p.array() * (go.array() - inner);
  });
}

Var Tape::dropout(Var a, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout: rate must be in [0,1)");
  if (rate == 0.0) return a;
  int ia = check(a);
  Mat mask(v(ia).rows(), v(ia).cols());
  double keep_scale = 1.0 / (1.0 - rate);
  for (long c = 0; c < mask.cols(); ++c)
    for (long r = 0; r < mask.rows(); ++r)
      mask(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
  int out = size();
  return push(v(ia).cwiseProduct(mask), [ia, mask, out](Tape& t) {
    t.g(ia) += t.g(out).cwiseProduct(mask);
  });
}

Var Tape::batchnorm(Var x, Var gamma, Var beta, Mat& running_mean, Mat& running_var,
                    bool train, double momentum, double eps) {
  int ix = check(x), ig = check(gamma), ib = check(beta);
  long d = v(ix).rows();
  long batch = v(ix).cols();
  if (v(ig).rows() != d || v(ib).rows() != d || v(ig).cols() != 1 || v(ib).cols() != 1)
    throw DimensionError("batchnorm: gamma/beta shape mismatch");
  if (running_mean.rows() != d || running_var.rows() != d)
    throw DimensionError("batchnorm: running stats shape mismatch");

  if (train && batch >= 2) {
    Vec mu = v(ix).rowwise().mean();
    Mat centered = v(ix).colwise() - mu;
    Vec var = centered.cwiseProduct(centered).rowwise().mean();
    Vec invstd = (var.array() + eps).sqrt().inverse().matrix();
    Mat xhat = (centered.array().colwise() * invstd.array()).matrix();
    Mat scaled = (xhat.array().colwise() * v(ig).col(0).array()).matrix();
    Mat y = scaled.colwise() + Vec(v(ib).col(0));

    running_mean.col(0) = (1.0 - momentum) * running_mean.col(0) + momentum * mu;
    double unbias = static_cast<double>(batch) / static_cast<double>(batch - 1);
    running_var.col(0) = (1.0 - momentum) * running_var.col(0) + momentum * (unbias * var);

    int out = size();
    return push(std::move(y), [ix, ig, ib, xhat, invstd, out](Tape& t) {
      const Mat& go = t.g(out);
      double bsz = static_cast<double>(go.cols());
      t.g(ib) += go.rowwise().sum();
      t.g(ig) += go.cwiseProduct(xhat).rowwise().sum();
      Mat gxhat = (go.array().colwise() * t.v(ig).col(0).array()).matrix();
      Vec sum_g = gxhat.rowwise().sum();
      Vec sum_gx = gxhat.cwiseProduct(xhat).rowwise().sum();
      Mat gx = (bsz * gxhat).colwise() - sum_g;
      gx -= (xhat.array().colwise() * sum_gx.array()).matrix();
      gx = (gx.array().colwise() * (invstd.array() / bsz)).matrix();
      t.g(ix) += gx;
    });
  }

  // Running-stats path: batch of 1 in train mode, or eval mode.
  return batchnorm_frozen(x, gamma, beta, running_mean, running_var, eps);
}

Var Tape::batchnorm_frozen(Var x, Var gamma, Var beta, const Mat& running_mean,
                           const Mat& running_var, double eps) {
  int ix = check(x), ig = check(gamma), ib = check(beta);
  long d = v(ix).rows();
  if (v(ig).rows() != d || v(ib).rows() != d || running_mean.rows() != d ||
      running_var.rows() != d)
    throw DimensionError("batchnorm_frozen: shape mismatch");
  Vec invstd = (running_var.col(0).array() + eps).sqrt().inverse().matrix();
  Vec rm = running_mean.col(0);
  Mat centered = v(ix).colwise() - rm;
  Mat xhat = (centered.array().colwise() * invstd.array()).matrix();
  Mat scaled = (xhat.array().colwise() * v(ig).col(0).array()).matrix();
  Mat y = scaled.colwise() + Vec(v(ib).col(0));
  int out = size();
  return push(std::move(y), [ix, ig, ib, xhat, invstd, out](Tape& t) {
    const Mat& go = t.g(out);
    t.g(ib) += go.rowwise().sum();
    t.g(ig) += go.cwiseProduct(xhat).rowwise().sum();
    Mat tmp = (go.array().colwise() * t.v(ig).col(0).array()).matrix();
    t.g(ix) += (tmp.array().colwise() * invstd.array()).matrix();
  });
}

Var Tape::weighted_neg_log(Var p, const Vec& w) {
  int ip = check(p);
  if (v(ip).cols() != 1 || v(ip).rows() != w.size())
    throw DimensionError("weighted_neg_log: shape mismatch");
  double acc = 0.0;
  for (long i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    double pi = v(ip)(i, 0);
    if (!(pi > 0.0))
      throw NumericError("weighted_neg_log: zero probability at a labeled entry");
    acc -= w[i] * std::log(pi);
  }
  Vec wc = w;
  int out = size();
  return push(Mat::Constant(1, 1, acc), [ip, wc, out](Tape& t) {
    double go = t.g(out)(0, 0);
    for (long i = 0; i < wc.size(); ++i) {
      if (wc[i] == 0.0) continue;
      t.g(ip)(i, 0) -= go * wc[i] / t.v(ip)(i, 0);
    }
  });
}

Var Tape::linf_gap(const Vec& target, Var r) {
  int ir = check(r);
  if (v(ir).cols() != 1 || v(ir).rows() != target.size())
    throw DimensionError("linf_gap: shape mismatch");
  long best = 0;
  double best_abs = -1.0;
  for (long i = 0; i < target.size(); ++i) {
    double a = std::abs(target[i] - v(ir)(i, 0));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  double sgn = v(ir)(best, 0) > target[best] ? 1.0 : (v(ir)(best, 0) < target[best] ? -1.0 : 0.0);
  int out = size();
  return push(Mat::Constant(1, 1, best_abs), [ir, best, sgn, out](Tape& t) {
    t.g(ir)(best, 0) += sgn * t.g(out)(0, 0);
  });
}

void Tape::backward(Var output) {
  int io = check(output);
  if (v(io).rows() != 1 || v(io).cols() != 1)
    throw ArgumentError("tape backward: output must be a 1x1 scalar");
  for (int i = 0; i <= io; ++i)
    nodes_[static_cast<std::size_t>(i)].grad =
        Mat::Zero(nodes_[static_cast<std::size_t>(i)].value.rows(),
                  nodes_[static_cast<std::size_t>(i)].value.cols());
  nodes_[static_cast<std::size_t>(io)].grad(0, 0) = 1.0;
  for (int i = io; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.back) n.back(*this);
  }
}

}  // namespace slateopt::nn
