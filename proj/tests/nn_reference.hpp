#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "refsel/nn/tensor.hpp"

// Scalar-loop reference implementations, independent of the tape. Used as
// oracles for the kernel and for the c-RNN target-indexing check.
namespace refsel::test {

inline std::vector<double> ref_affine(const nn::Tensor2& w_xh, const std::vector<double>& x,
                                      const nn::Tensor2& w_hh, const std::vector<double>& h) {
  std::vector<double> out(w_xh.cols, 0.0);
  for (int j = 0; j < w_xh.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < w_xh.rows; ++i) s += x[i] * w_xh.at(i, j);
    for (int i = 0; i < w_hh.rows; ++i) s += h[i] * w_hh.at(i, j);
    out[j] = s;
  }
  return out;
}

inline std::vector<double> ref_gru_step(const nn::ParamStore& ps, const std::string& prefix,
                                        const std::vector<double>& x,
                                        const std::vector<double>& h) {
  const auto z_in = ref_affine(ps.value(prefix + ".update_x"), x, ps.value(prefix + ".update_h"), h);
  const auto r_in = ref_affine(ps.value(prefix + ".reset_x"), x, ps.value(prefix + ".reset_h"), h);
  const int n = static_cast<int>(z_in.size());
  std::vector<double> z(n), r(n), rh(n);
  for (int j = 0; j < n; ++j) {
    z[j] = 1.0 / (1.0 + std::exp(-z_in[j]));
    r[j] = 1.0 / (1.0 + std::exp(-r_in[j]));
    rh[j] = r[j] * h[j];
  }
  const auto c_in = ref_affine(ps.value(prefix + ".cand_x"), x, ps.value(prefix + ".cand_h"), rh);
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = z[j] * h[j] + (1.0 - z[j]) * std::tanh(c_in[j]);
  return out;
}

// Per-step [forward ; backward] states from zero initial states.
inline std::vector<std::vector<double>> ref_bigru(const nn::ParamStore& ps,
                                                  const std::string& fwd_prefix,
                                                  const std::string& bwd_prefix,
                                                  const std::vector<std::vector<double>>& inputs,
                                                  int hidden) {
  const std::size_t n = inputs.size();
  std::vector<std::vector<double>> fwd(n), bwd(n);
  std::vector<double> h(hidden, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    h = ref_gru_step(ps, fwd_prefix, inputs[t], h);
    fwd[t] = h;
  }
  h.assign(hidden, 0.0);
  for (std::size_t t = n; t-- > 0;) {
    h = ref_gru_step(ps, bwd_prefix, inputs[t], h);
    bwd[t] = h;
  }
  std::vector<std::vector<double>> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    out[t] = fwd[t];
    out[t].insert(out[t].end(), bwd[t].begin(), bwd[t].end());
  }
  return out;
}

inline std::vector<double> ref_dense_relu(const nn::Tensor2& w, const std::vector<double>& x) {
  std::vector<double> out(w.rows, 0.0);
  for (int r = 0; r < w.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < w.cols; ++c) s += w.at(r, c) * x[c];
    out[r] = s > 0.0 ? s : 0.0;
  }
  return out;
}

}  // namespace refsel::test
