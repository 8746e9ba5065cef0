#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "hypstab/coeffs.hpp"
#include "hypstab/symbol.hpp"

namespace testing {

inline hypstab::Matrix mat(int rows, int cols, std::initializer_list<double> values) {
  hypstab::Matrix m(rows, cols);
  auto it = values.begin();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = *it++;
  }
  return m;
}

inline hypstab::SystemSpec spec1(const hypstab::Matrix& a0, const hypstab::Matrix& b0, double delta = 1.0) {
  return hypstab::SystemSpec::constant({a0}, b0, delta);
}

inline hypstab::CoefficientMatrix coeff(const hypstab::SystemSpec& spec,
                                        const std::vector<std::vector<std::string>>& text) {
  return hypstab::parse_matrix_expr(text, spec.variables());
}

inline hypstab::Vector vec(std::initializer_list<double> values) {
  hypstab::Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace testing
