#include "slateopt/nn/grad_check.hpp"

#include <cmath>
#include <map>

namespace slateopt::nn {

namespace {

double eval_scalar(ParamStore& store, const std::function<Var(Tape&)>& program) {
  Tape t;
  Var out = program(t);
  return t.val(out)(0, 0);
}

}  // namespace

GradCheckReport grad_check(ParamStore& store,
                           const std::function<Var(Tape&)>& program, double step) {
  std::map<std::string, Mat> analytic;
  {
    Tape t;
    Var out = program(t);
    t.backward(out);
    for (const auto& [name, var] : t.bound_params()) {
      if (store.trainable(name)) analytic[name] = t.grad(var);
    }
  }

  GradCheckReport report;
  for (auto& [name, agrad] : analytic) {
    Mat& value = store.at(name);
    for (long c = 0; c < value.cols(); ++c) {
      for (long r = 0; r < value.rows(); ++r) {
        double saved = value(r, c);
        value(r, c) = saved + step;
        long double fp = eval_scalar(store, program);
        value(r, c) = saved - step;
        long double fm = eval_scalar(store, program);
        value(r, c) = saved;
        double numeric = static_cast<double>((fp - fm) / (2.0L * static_cast<long double>(step)));
        double a = agrad(r, c);
        // Floor keeps fp noise on near-zero gradients from reading as error.
        double denom = std::max({std::abs(a), std::abs(numeric), 1e-4});
        double rel = std::abs(a - numeric) / denom;
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_param = name;
          report.worst_index = static_cast<int>(c * value.rows() + r);
          report.analytic = a;
          report.numeric = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace slateopt::nn
