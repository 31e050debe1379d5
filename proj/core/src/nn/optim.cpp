#include "refsel/nn/optim.hpp"

#include <cmath>

#include "refsel/errors.hpp"

namespace refsel::nn {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer: " + s);
}

namespace {

void require_finite_grads(const ParamStore& params) {
  for (const auto& [name, slot] : params.slots())
    if (!slot.grad.all_finite())
      throw NumericalError("non-finite gradient in parameter " + name);
}

}  // namespace

void SgdOptimizer::step(ParamStore& params) {
  require_finite_grads(params);
  for (auto& [name, slot] : params.slots())
    for (std::size_t i = 0; i < slot.value.size(); ++i)
      slot.value.data[i] -= lr_ * slot.grad.data[i];
}

void AdamOptimizer::step(ParamStore& params) {
  require_finite_grads(params);
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (auto& [name, slot] : params.slots()) {
    Tensor2& m = first_moment_.try_emplace(name, Tensor2::zeros(slot.value.rows, slot.value.cols))
                     .first->second;
    Tensor2& v = second_moment_.try_emplace(name, Tensor2::zeros(slot.value.rows, slot.value.cols))
                     .first->second;
    for (std::size_t i = 0; i < slot.value.size(); ++i) {
      const double g = slot.grad.data[i];
      m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * g;
      v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * g * g;
      slot.value.data[i] -= lr_ * (m.data[i] / bc1) / (std::sqrt(v.data[i] / bc2) + epsilon_);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr) {
  if (kind == OptimizerKind::sgd) return std::make_unique<SgdOptimizer>(lr);
  return std::make_unique<AdamOptimizer>(lr);
}

GradCheckReport grad_check(ParamStore& params,
                           const std::function<double(ParamStore&, bool)>& loss_fn,
                           double tolerance, double step) {
  params.zero_grads();
  loss_fn(params, true);
  std::map<std::string, Tensor2> analytic;
  for (const auto& [name, slot] : params.slots()) analytic[name] = slot.grad;

  GradCheckReport report;
  report.tolerance = tolerance;
  for (auto& [name, slot] : params.slots()) {
    double worst = 0.0;
    for (std::size_t i = 0; i < slot.value.size(); ++i) {
      const double saved = slot.value.data[i];
      slot.value.data[i] = saved + step;
      const double lo_plus = loss_fn(params, false);
      slot.value.data[i] = saved - step;
      const double lo_minus = loss_fn(params, false);
      slot.value.data[i] = saved;
      const double numeric = (lo_plus - lo_minus) / (2.0 * step);
      const double a = analytic[name].data[i];
      const double rel =
          std::abs(a - numeric) / std::max(1e-6, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
    report.per_param.push_back({name, worst});
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace refsel::nn
