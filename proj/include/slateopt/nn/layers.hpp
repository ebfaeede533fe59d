#pragma once

#include "slateopt/nn/tape.hpp"

namespace slateopt::nn {

// W*x + b
inline Var dense(Tape& t, Var w, Var x, Var b) { return t.add(t.matmul(w, x), b); }

struct LstmVars {
  Var wx;  // (4H x in)
  Var wh;  // (4H x H)
  Var b;   // (4H x 1), gate order: input, forget, candidate, output
};

struct LstmState {
  Var h;
  Var c;
};

// One gated recurrent update: c = f.c_prev + i.g, h = o.tanh(c).
inline LstmState lstm_step(Tape& t, const LstmVars& p, Var x, const LstmState& prev) {
  Var z = t.add(t.add(t.matmul(p.wx, x), t.matmul(p.wh, prev.h)), p.b);
  long hdim = t.val(p.wh).cols();
  Var gi = t.sigmoid(t.rows(z, 0, static_cast<int>(hdim)));
  Var gf = t.sigmoid(t.rows(z, static_cast<int>(hdim), static_cast<int>(hdim)));
  Var gg = t.tanh(t.rows(z, 2 * static_cast<int>(hdim), static_cast<int>(hdim)));
  Var go = t.sigmoid(t.rows(z, 3 * static_cast<int>(hdim), static_cast<int>(hdim)));
  Var c = t.add(t.cmul(gf, prev.c), t.cmul(gi, gg));
  Var h = t.cmul(go, t.tanh(c));
  return LstmState{h, c};
}

struct AttentionVars {
  Var we;  // (A x H_enc)
  Var wd;  // (A x Q)
  Var v;   // (A x 1)
};

// Precompute We * H for all encoder outputs (columns of enc_matrix).
inline Var attention_precompute(Tape& t, const AttentionVars& p, Var enc_matrix) {
  return t.matmul(p.we, enc_matrix);
}

// u[i] = v' tanh(We*H[i] + Wd*q); returns an n x 1 score vector.
inline Var attention_scores(Tape& t, const AttentionVars& p, Var we_h, Var query) {
  Var shifted = t.add_col_broadcast(we_h, t.matmul(p.wd, query));
  Var act = t.tanh(shifted);
  return t.transpose(t.matmul(t.transpose(p.v), act));
}

}  // namespace slateopt::nn
