#pragma once

#include <functional>
#include <string>

#include "slateopt/nn/param_store.hpp"
#include "slateopt/nn/tape.hpp"

namespace slateopt::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares reverse-mode gradients of a deterministic scalar program against
// central finite differences over every trainable parameter. The program
// must build the scalar on the tape it is given and must not use dropout or
// any other source of randomness.
GradCheckReport grad_check(ParamStore& store,
                           const std::function<Var(Tape&)>& program,
                           double step = 1e-5);

}  // namespace slateopt::nn
