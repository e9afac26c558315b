#include "soilfusion/linear_model.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace soilfusion {

LinearModel fit_linear(MatrixView x, std::span<const double> y, double ridge) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  if (n == 0 || d == 0) throw InsufficientDataError("linear regression needs at least one row and one feature");
  if (y.size() != x.rows()) throw DimensionError("target length does not match row count");
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be non-negative");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw SchemaError("non-finite feature value in linear regression input");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw SchemaError("non-finite target value in linear regression input");
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> xm(x.data().data(), n, d);
  const Eigen::Map<const Eigen::VectorXd> ym(y.data(), n);

  // Centering removes the intercept from the penalized problem; the ridge
  // part is appended as sqrt(ridge) * I rows and the whole system is solved
  // by Householder QR.
  const Eigen::RowVectorXd x_mean = xm.colwise().mean();
  const double y_mean = ym.mean();
  Eigen::MatrixXd a(n + d, d);
  a.topRows(n) = xm.rowwise() - x_mean;
  a.bottomRows(d) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + d);
  b.head(n) = ym.array() - y_mean;

  const Eigen::VectorXd w = a.householderQr().solve(b);

  LinearModel model;
  model.weights.assign(w.data(), w.data() + d);
  model.intercept = y_mean - x_mean.dot(w);
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> row) {
  if (row.size() != model.weights.size()) {
    throw DimensionError("linear model expects " + std::to_string(model.weights.size()) + " features, got " +
                         std::to_string(row.size()));
  }
  double acc = model.intercept;
  for (std::size_t j = 0; j < row.size(); ++j) acc += model.weights[j] * row[j];
  return acc;
}

std::vector<double> predict_linear(const LinearModel& model, MatrixView x) {
  if (x.cols() != model.weights.size()) {
    throw DimensionError("linear model expects " + std::to_string(model.weights.size()) + " features, got " +
                         std::to_string(x.cols()));
  }
  std::vector<double> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict_linear(model, x.row(i)));
  return out;
}

}  // namespace soilfusion
