#pragma once

#include <string>
#include <vector>

#include "slateopt/model.hpp"
#include "slateopt/nn/grad_check.hpp"
#include "slateopt/training.hpp"

namespace slateopt::verify {

struct ToyProblem {
  CategoricalSchema schema;
  CandidateSet cands;
};

// Random candidate set: `continuous` noise features plus `cvars` two-way
// one-hot variables, graded labels in {0..4}, criteria inferred from the set.
ToyProblem make_toy(int n, int continuous, int cvars, std::uint64_t seed);

struct Check {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 1e-4;
  bool passed = false;
};

// Finite-difference verification battery over every differentiable op plus
// the full supervised loss on an n=5, k=3 instance.
std::vector<Check> run_gradient_checks(std::uint64_t seed = 17);

// Convenience: grad-check the supervised loss for a given instance size.
nn::GradCheckReport check_supervised_loss(int n, int continuous, int cvars, int k,
                                          int hidden, std::uint64_t seed);

}  // namespace slateopt::verify
