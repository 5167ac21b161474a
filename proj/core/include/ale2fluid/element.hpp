#pragma once

#include <array>
#include <vector>

#include "ale2fluid/geometry.hpp"
#include "ale2fluid/mesh.hpp"
#include "ale2fluid/quadrature.hpp"

namespace ale2fluid {

/// Quadratic Lagrange basis on the nodes -1, 0, 1.
std::array<double, 3> lagrange_p2(double s);
std::array<double, 3> lagrange_p2_derivative(double s);

struct Q2Shape {
  std::array<double, 9> value{};
  std::array<Vec2, 9> grad_ref{};
};

Q2Shape q2_shape(const Vec2& ref);

/// Geometry and shape data of one isoparametric cell at tensor Gauss points.
class CellValues {
 public:
  explicit CellValues(int points_1d = kAssemblyPoints);

  void reinit(const Mesh& mesh, int cell);

  int n_points() const { return static_cast<int>(ref_.size()); }
  const Vec2& ref_point(int q) const { return ref_[q]; }
  const Vec2& point(int q) const { return x_[q]; }
  double jxw(int q) const { return jxw_[q]; }
  double jacobian_det(int q) const { return det_[q]; }
  double shape(int q, int k) const { return shapes_[q].value[k]; }
  const Vec2& grad(int q, int k) const { return grad_[q][k]; }
  int cell() const { return cell_; }
  const Mesh& mesh() const { return *mesh_; }

 private:
  std::vector<Vec2> ref_;
  std::vector<double> weight_;
  std::vector<Q2Shape> shapes_;
  std::vector<Vec2> x_;
  std::vector<double> det_;
  std::vector<double> jxw_;
  std::vector<std::array<Vec2, 9>> grad_;
  const Mesh* mesh_ = nullptr;
  int cell_ = -1;
};

/// Data of a curved quadratic edge (nodes in the given order) at Gauss points.
class EdgeValues {
 public:
  explicit EdgeValues(int points = kAssemblyPoints);

  void reinit(const Mesh& mesh, const std::array<int, 3>& nodes);

  int n_points() const { return static_cast<int>(s_.size()); }
  double param(int q) const { return s_[q]; }
  const Vec2& point(int q) const { return x_[q]; }
  /// dX/ds with s the reference parameter in [-1, 1].
  const Vec2& tangent_ref(int q) const { return dx_[q]; }
  const Vec2& unit_tangent(int q) const { return t_[q]; }
  /// Left normal of the unit tangent.
  Vec2 left_normal(int q) const { return rotate_left(t_[q]); }
  double dsigma(int q) const { return ds_[q]; }
  double shape(int q, int k) const { return phi_[q][k]; }
  /// Derivative of the shape function with respect to arc length.
  double shape_ds(int q, int k) const { return dphi_[q][k]; }

 private:
  std::vector<double> s_;
  std::vector<double> w_;
  std::vector<std::array<double, 3>> phi_;
  std::vector<std::array<double, 3>> dphi_ref_;
  std::vector<Vec2> x_;
  std::vector<Vec2> dx_;
  std::vector<Vec2> t_;
  std::vector<double> ds_;
  std::vector<std::array<double, 3>> dphi_;
};

/// Position and reference-parameter tangent of a quadratic edge at s.
std::pair<Vec2, Vec2> edge_point(const Mesh& mesh, const std::array<int, 3>& nodes, double s);

}  // namespace ale2fluid
