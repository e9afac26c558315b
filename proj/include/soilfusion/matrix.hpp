#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "soilfusion/error.hpp"

namespace soilfusion {

// Non-owning row-major view of an n x d feature matrix.
class MatrixView {
 public:
  MatrixView(std::span<const double> data, std::size_t rows, std::size_t cols)
      : data_(data), rows_(rows), cols_(cols) {
    if (data.size() != rows * cols) {
      throw DimensionError("matrix buffer holds " + std::to_string(data.size()) + " values, expected " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return data_.subspan(i * cols_, cols_); }
  std::span<const double> data() const { return data_; }

 private:
  std::span<const double> data_;
  std::size_t rows_;
  std::size_t cols_;
};

}  // namespace soilfusion
