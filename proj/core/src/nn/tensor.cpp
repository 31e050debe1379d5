#include "refsel/nn/tensor.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "refsel/errors.hpp"
#include "refsel/seeding.hpp"

namespace refsel::nn {

using nlohmann::json;

Tensor2 Tensor2::from(int r, int c, std::initializer_list<double> values) {
  Tensor2 t(r, c);
  if (values.size() != t.size()) throw ValidationError("Tensor2::from: size mismatch");
  std::copy(values.begin(), values.end(), t.data.begin());
  return t;
}

bool Tensor2::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void gemm_acc(Tensor2& c, const Tensor2& a, const Tensor2& b, bool trans_a, bool trans_b) {
  const int m = trans_a ? a.cols : a.rows;
  const int k = trans_a ? a.rows : a.cols;
  const int kb = trans_b ? b.cols : b.rows;
  const int n = trans_b ? b.rows : b.cols;
  if (k != kb || c.rows != m || c.cols != n)
    throw ValidationError("gemm: dimension mismatch (" + std::to_string(m) + "x" +
                          std::to_string(k) + " * " + std::to_string(kb) + "x" +
                          std::to_string(n) + " -> " + std::to_string(c.rows) + "x" +
                          std::to_string(c.cols) + ")");
  if (!trans_a && !trans_b) {
    for (int i = 0; i < m; ++i) {
      double* crow = c.row_ptr(i);
      const double* arow = a.row_ptr(i);
      for (int p = 0; p < k; ++p) {
        const double av = arow[p];
        if (av == 0.0) continue;
        const double* brow = b.row_ptr(p);
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    for (int i = 0; i < m; ++i) {
      double* crow = c.row_ptr(i);
      const double* arow = a.row_ptr(i);
      for (int j = 0; j < n; ++j) {
        const double* brow = b.row_ptr(j);
        double sum = 0.0;
        for (int p = 0; p < k; ++p) sum += arow[p] * brow[p];
        crow[j] += sum;
      }
    }
  } else if (trans_a && !trans_b) {
    for (int p = 0; p < k; ++p) {
      const double* arow = a.row_ptr(p);
      const double* brow = b.row_ptr(p);
      for (int i = 0; i < m; ++i) {
        const double av = arow[i];
        if (av == 0.0) continue;
        double* crow = c.row_ptr(i);
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
    for (int i = 0; i < m; ++i) {
      double* crow = c.row_ptr(i);
      for (int j = 0; j < n; ++j) {
        const double* brow = b.row_ptr(j);
        double sum = 0.0;
        for (int p = 0; p < k; ++p) sum += a.at(p, i) * brow[p];
        crow[j] += sum;
      }
    }
  }
}

Tensor2 glorot_uniform(int rows, int cols, Rng& rng) {
  Tensor2 t(rows, cols);
  const double a = std::sqrt(6.0 / (rows + cols));
  for (double& v : t.data) v = rng.uniform(-a, a);
  return t;
}

Tensor2& ParamStore::add(const std::string& name, Tensor2 init) {
  auto [it, inserted] = slots_.emplace(name, Slot{std::move(init), Tensor2{}});
  if (!inserted) throw ValidationError("parameter already exists: " + name);
  it->second.grad = Tensor2::zeros(it->second.value.rows, it->second.value.cols);
  return it->second.value;
}

Tensor2& ParamStore::value(const std::string& name) {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw ValidationError("unknown parameter: " + name);
  return it->second.value;
}

const Tensor2& ParamStore::value(const std::string& name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw ValidationError("unknown parameter: " + name);
  return it->second.value;
}

Tensor2& ParamStore::grad(const std::string& name) {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw ValidationError("unknown parameter: " + name);
  return it->second.grad;
}

const Tensor2& ParamStore::grad(const std::string& name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw ValidationError("unknown parameter: " + name);
  return it->second.grad;
}

void ParamStore::zero_grads() {
  for (auto& [name, slot] : slots_) slot.grad.fill(0.0);
}

bool ParamStore::grads_finite() const {
  for (const auto& [name, slot] : slots_)
    if (!slot.grad.all_finite()) return false;
  return true;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, slot] : slots_) n += slot.value.size();
  return n;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (slots_.size() != other.slots_.size()) return false;
  for (const auto& [name, slot] : slots_) {
    auto it = other.slots_.find(name);
    if (it == other.slots_.end() || !(it->second.value == slot.value)) return false;
  }
  return true;
}

std::string params_to_json_string(const ParamStore& params) {
  json j;
  j["format"] = "refsel-params";
  j["version"] = 1;
  json jp = json::object();
  for (const auto& [name, slot] : params.slots()) {
    jp[name] = {{"rows", slot.value.rows}, {"cols", slot.value.cols}, {"data", slot.value.data}};
  }
  j["params"] = std::move(jp);
  return j.dump();
}

ParamStore params_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed parameter container: ") + e.what());
  }
  if (j.value("format", "") != "refsel-params")
    throw ParseError("not a refsel parameter container");
  if (j.value("version", 0) != 1) throw ParseError("unsupported parameter container version");
  ParamStore ps;
  for (const auto& [name, jp] : j.at("params").items()) {
    Tensor2 t(jp.at("rows").get<int>(), jp.at("cols").get<int>());
    const auto& data = jp.at("data");
    if (data.size() != t.size()) throw ParseError("parameter " + name + ": data length mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = data[i].get<double>();
    ps.add(name, std::move(t));
  }
  return ps;
}

void save_params(const ParamStore& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write parameter file: " + path);
  out << params_to_json_string(params) << "\n";
}

ParamStore load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return params_from_json_string(buf.str());
}

}  // namespace refsel::nn
