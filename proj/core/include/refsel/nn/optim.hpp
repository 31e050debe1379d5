#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "refsel/nn/tensor.hpp"

namespace refsel::nn {

enum class OptimizerKind { sgd, adam };
std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

// step() applies the accumulated gradients and leaves them in place;
// callers zero them per batch. Throws NumericalError on non-finite
// gradients.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ParamStore& params) = 0;
};

class SgdOptimizer : public Optimizer {
 public:
  explicit SgdOptimizer(double lr) : lr_(lr) {}
  void step(ParamStore& params) override;

 private:
  double lr_;
};

class AdamOptimizer : public Optimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double epsilon = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}
  void step(ParamStore& params) override;

 private:
  double lr_, beta1_, beta2_, epsilon_;
  long t_ = 0;
  std::map<std::string, Tensor2> first_moment_;
  std::map<std::string, Tensor2> second_moment_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr);

// Central finite-difference check of analytic gradients.
// loss_fn(params, with_grad): returns the scalar loss; when with_grad it
// must also accumulate gradients into the (pre-zeroed) store.
struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_error;
  };
  std::vector<Entry> per_param;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

GradCheckReport grad_check(ParamStore& params,
                           const std::function<double(ParamStore&, bool)>& loss_fn,
                           double tolerance = 1e-4, double step = 1e-5);

}  // namespace refsel::nn
