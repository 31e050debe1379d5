#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace refsel {
class Rng;
}

namespace refsel::nn {

// Dense row-major double matrix. Row vectors (1 x n) carry sequence steps
// and hidden states throughout the kernel.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  static Tensor2 zeros(int r, int c) { return Tensor2(r, c); }
  static Tensor2 from(int r, int c, std::initializer_list<double> values);

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& other) const {
    return rows == other.rows && cols == other.cols;
  }
  bool all_finite() const;
  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool operator==(const Tensor2&) const = default;
};

// C += op(A) * op(B); shapes checked, throws on mismatch.
void gemm_acc(Tensor2& c, const Tensor2& a, const Tensor2& b, bool trans_a, bool trans_b);

// Symmetric uniform init in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
Tensor2 glorot_uniform(int rows, int cols, Rng& rng);

// Named parameters with matching gradient accumulators. std::map keeps
// iteration order deterministic for optimizers and checkpoints.
class ParamStore {
 public:
  struct Slot {
    Tensor2 value;
    Tensor2 grad;
  };

  Tensor2& add(const std::string& name, Tensor2 init);
  bool has(const std::string& name) const { return slots_.count(name) > 0; }
  Tensor2& value(const std::string& name);
  const Tensor2& value(const std::string& name) const;
  Tensor2& grad(const std::string& name);
  const Tensor2& grad(const std::string& name) const;
  void zero_grads();
  bool grads_finite() const;

  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }
  std::size_t parameter_count() const;

  bool operator==(const ParamStore& other) const;

 private:
  std::map<std::string, Slot> slots_;
};

// Text checkpoint container: {"format":"refsel-params","version":1,
// "params":{name:{"rows":r,"cols":c,"data":[...]}}}. Doubles are written
// with up to 17 significant digits (shortest round-trip encoding), so
// save/load round-trips bit-exactly.
void save_params(const ParamStore& params, const std::string& path);
ParamStore load_params(const std::string& path);
std::string params_to_json_string(const ParamStore& params);
ParamStore params_from_json_string(const std::string& text);

}  // namespace refsel::nn
