#pragma once

#include <vector>

namespace ale2fluid {

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n-1.
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

const GaussRule& gauss_legendre(int n);

/// Number of 1D points of the rule used by every assembly and diagnostic
/// integral (per direction in cells, per edge on curves).
inline constexpr int kAssemblyPoints = 5;

}  // namespace ale2fluid
