#include "refsel/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "refsel/errors.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

namespace {

struct Workspace {
  int n, d, k;
  const std::vector<std::vector<double>>* x;
  const std::vector<int>* y;
  double l2;
  bool fit_intercept;
};

double loss_at(const Workspace& w, const std::vector<double>& theta) {
  // theta layout: k*d weights then k intercepts
  double loss = 0.0;
  std::vector<double> logits(w.k);
  for (int i = 0; i < w.n; ++i) {
    const std::vector<double>& xi = (*w.x)[i];
    for (int c = 0; c < w.k; ++c) {
      double s = w.fit_intercept ? theta[w.k * w.d + c] : 0.0;
      const double* wc = theta.data() + c * w.d;
      for (int j = 0; j < w.d; ++j) s += wc[j] * xi[j];
      logits[c] = s;
    }
    const double hi = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - hi);
    loss += -(logits[(*w.y)[i]] - hi - std::log(sum));
  }
  loss /= w.n;
  double reg = 0.0;
  for (int c = 0; c < w.k; ++c)
    for (int j = 0; j < w.d; ++j) reg += theta[c * w.d + j] * theta[c * w.d + j];
  return loss + 0.5 * w.l2 * reg;
}

// gradient of the data term only; the L2 part is handled in closed form
// by the proximal update
void data_grad_at(const Workspace& w, const std::vector<double>& theta,
                  std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> logits(w.k), probs(w.k);
  for (int i = 0; i < w.n; ++i) {
    const std::vector<double>& xi = (*w.x)[i];
    for (int c = 0; c < w.k; ++c) {
      double s = w.fit_intercept ? theta[w.k * w.d + c] : 0.0;
      const double* wc = theta.data() + c * w.d;
      for (int j = 0; j < w.d; ++j) s += wc[j] * xi[j];
      logits[c] = s;
    }
    const double hi = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (int c = 0; c < w.k; ++c) {
      probs[c] = std::exp(logits[c] - hi);
      sum += probs[c];
    }
    for (int c = 0; c < w.k; ++c) {
      const double delta = probs[c] / sum - (c == (*w.y)[i] ? 1.0 : 0.0);
      double* gc = grad.data() + c * w.d;
      for (int j = 0; j < w.d; ++j) gc[j] += delta * xi[j];
      if (w.fit_intercept) grad[w.k * w.d + c] += delta;
    }
  }
  const double inv_n = 1.0 / w.n;
  for (double& g : grad) g *= inv_n;
}

}  // namespace

std::vector<double> LogisticModel::predict_proba(const std::vector<double>& x) const {
  std::vector<double> z(x);
  if (!feature_mean.empty())
    for (int j = 0; j < num_features; ++j) z[j] = (z[j] - feature_mean[j]) / feature_scale[j];
  std::vector<double> logits(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    double s = intercept.empty() ? 0.0 : intercept[c];
    for (int j = 0; j < num_features; ++j) s += weights[c][j] * z[j];
    logits[c] = s;
  }
  const double hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return logits;
}

int LogisticModel::predict(const std::vector<double>& x) const {
  const std::vector<double> p = predict_proba(x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

LogisticModel train_logistic(const std::vector<std::vector<double>>& features,
                             const std::vector<int>& labels, int num_classes,
                             const LogisticConfig& config, std::uint64_t seed,
                             LogisticFitInfo* info) {
  if (features.empty() || features.size() != labels.size())
    throw ValidationError("logistic: empty or mismatched training data");
  const int n = static_cast<int>(features.size());
  const int d = static_cast<int>(features[0].size());
  if (num_classes < 2) throw ValidationError("logistic: need at least 2 classes");
  std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2)
    throw ValidationError("logistic: training labels contain a single class");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw ValidationError("logistic: label out of range");
  for (const auto& row : features)
    if (static_cast<int>(row.size()) != d)
      throw ValidationError("logistic: representation width is not constant");

  LogisticModel model;
  model.num_classes = num_classes;
  model.num_features = d;

  std::vector<std::vector<double>> scaled;
  const std::vector<std::vector<double>>* x = &features;
  if (config.standardize) {
    model.feature_mean.assign(d, 0.0);
    model.feature_scale.assign(d, 0.0);
    for (const auto& row : features)
      for (int j = 0; j < d; ++j) model.feature_mean[j] += row[j];
    for (int j = 0; j < d; ++j) model.feature_mean[j] /= n;
    for (const auto& row : features)
      for (int j = 0; j < d; ++j) {
        const double c = row[j] - model.feature_mean[j];
        model.feature_scale[j] += c * c;
      }
    for (int j = 0; j < d; ++j)
      model.feature_scale[j] = std::max(std::sqrt(model.feature_scale[j] / n), 1e-12);
    scaled = features;
    for (auto& row : scaled)
      for (int j = 0; j < d; ++j) row[j] = (row[j] - model.feature_mean[j]) / model.feature_scale[j];
    x = &scaled;
  }

  Workspace w{n, d, num_classes, x, &labels, config.l2, config.fit_intercept};

  const int dim = num_classes * d + num_classes;
  std::vector<double> theta(dim, 0.0);
  if (config.init_scale != 0.0) {
    Rng rng(derive_seed(seed, "logistic.init"));
    for (int i = 0; i < num_classes * d; ++i)
      theta[i] = rng.uniform(-config.init_scale, config.init_scale);
  }

  LogisticFitInfo fit;
  std::vector<double> grad(dim), candidate(dim);
  double loss = loss_at(w, theta);
  fit.loss_path.push_back(loss);
  double step = 1.0;
  for (int it = 0; it < config.max_iterations; ++it) {
    data_grad_at(w, theta, grad);
    // convergence on the full regularized gradient
    double gnorm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double reg = i < num_classes * d ? config.l2 * theta[i] : 0.0;
      gnorm2 += (grad[i] + reg) * (grad[i] + reg);
    }
    fit.final_gradient_norm = std::sqrt(gnorm2);
    if (fit.final_gradient_norm < config.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    // Backtracking line search on the gradient mapping. Weights take a
    // gradient step on the data term followed by the exact L2 shrinkage
    // (w - t g)/(1 + t l2); the unregularized intercept takes the plain
    // step. The step size carries over between iterations.
    step = std::min(step * 2.0, 1e4);
    double next_loss;
    for (;;) {
      const double shrink = 1.0 / (1.0 + step * config.l2);
      for (int i = 0; i < dim; ++i) {
        candidate[i] = theta[i] - step * grad[i];
        if (i < num_classes * d) candidate[i] *= shrink;
      }
      next_loss = loss_at(w, candidate);
      double mapping2 = 0.0;  // squared norm of the gradient mapping
      for (int i = 0; i < dim; ++i) {
        const double m = (theta[i] - candidate[i]) / step;
        mapping2 += m * m;
      }
      if (next_loss <= loss - 1e-4 * step * mapping2 || step < 1e-16) break;
      step *= 0.5;
    }
    if (next_loss > loss) break;  // no descent possible at the smallest step
    theta.swap(candidate);
    loss = next_loss;
    fit.loss_path.push_back(loss);
    ++fit.iterations;
  }

  model.weights.assign(num_classes, std::vector<double>(d));
  for (int c = 0; c < num_classes; ++c)
    for (int j = 0; j < d; ++j) model.weights[c][j] = theta[c * d + j];
  if (config.fit_intercept) {
    model.intercept.assign(num_classes, 0.0);
    for (int c = 0; c < num_classes; ++c) model.intercept[c] = theta[num_classes * d + c];
  }
  if (info) *info = std::move(fit);
  return model;
}

}  // namespace refsel
