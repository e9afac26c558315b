#pragma once

#include <span>
#include <vector>

#include "soilfusion/matrix.hpp"

namespace soilfusion {

inline constexpr double kDefaultRidge = 1e-8;

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

// Least squares with an unpenalized intercept and a ridge term on the
// weights: minimizes sum (y - Xw - b)^2 + ridge * |w|^2.
LinearModel fit_linear(MatrixView x, std::span<const double> y, double ridge = kDefaultRidge);

double predict_linear(const LinearModel& model, std::span<const double> row);
std::vector<double> predict_linear(const LinearModel& model, MatrixView x);

}  // namespace soilfusion
