#pragma once

#include <string>
#include <vector>

#include "refsel/nn/optim.hpp"

namespace refsel {

// Finite-difference verification of every kernel op and of both
// architectures at toy size (vocab 10, hidden <= 8).
struct GradCheckCase {
  std::string name;
  nn::GradCheckReport report;
};

std::vector<GradCheckCase> run_gradcheck_suite(double tolerance = 1e-4);

}  // namespace refsel
