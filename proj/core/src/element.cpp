#include "ale2fluid/element.hpp"

#include <cmath>

namespace ale2fluid {

std::array<double, 3> lagrange_p2(double s) {
  return {0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)};
}

std::array<double, 3> lagrange_p2_derivative(double s) {
  return {s - 0.5, -2.0 * s, s + 0.5};
}

Q2Shape q2_shape(const Vec2& ref) {
  const auto lx = lagrange_p2(ref.x);
  const auto ly = lagrange_p2(ref.y);
  const auto dx = lagrange_p2_derivative(ref.x);
  const auto dy = lagrange_p2_derivative(ref.y);
  Q2Shape s;
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) {
      s.value[3 * b + a] = lx[a] * ly[b];
      s.grad_ref[3 * b + a] = {dx[a] * ly[b], lx[a] * dy[b]};
    }
  }
  return s;
}

CellValues::CellValues(int points_1d) {
  const GaussRule& g = gauss_legendre(points_1d);
  for (int j = 0; j < points_1d; ++j) {
    for (int i = 0; i < points_1d; ++i) {
      ref_.push_back({g.points[i], g.points[j]});
      weight_.push_back(g.weights[i] * g.weights[j]);
      shapes_.push_back(q2_shape(ref_.back()));
    }
  }
  const std::size_t n = ref_.size();
  x_.resize(n);
  det_.resize(n);
  jxw_.resize(n);
  grad_.resize(n);
}

void CellValues::reinit(const Mesh& mesh, int cell) {
  mesh_ = &mesh;
  cell_ = cell;
  const auto& ids = mesh.topology().cells[cell];
  std::array<Vec2, 9> xn;
  for (int k = 0; k < 9; ++k) xn[k] = mesh.node(ids[k]);
  for (std::size_t q = 0; q < ref_.size(); ++q) {
    const Q2Shape& s = shapes_[q];
    Vec2 x{};
    Vec2 dxds{};
    Vec2 dxdt{};
    for (int k = 0; k < 9; ++k) {
      x += s.value[k] * xn[k];
      dxds += s.grad_ref[k].x * xn[k];
      dxdt += s.grad_ref[k].y * xn[k];
    }
    const double det = dxds.x * dxdt.y - dxdt.x * dxds.y;
    x_[q] = x;
    det_[q] = det;
    jxw_[q] = det * weight_[q];
    // inverse transpose applied to reference gradients
    for (int k = 0; k < 9; ++k) {
      const Vec2& g = s.grad_ref[k];
      grad_[q][k] = {(dxdt.y * g.x - dxds.y * g.y) / det, (-dxdt.x * g.x + dxds.x * g.y) / det};
    }
  }
}

EdgeValues::EdgeValues(int points) {
  const GaussRule& g = gauss_legendre(points);
  s_ = g.points;
  w_ = g.weights;
  for (double s : s_) {
    phi_.push_back(lagrange_p2(s));
    dphi_ref_.push_back(lagrange_p2_derivative(s));
  }
  x_.resize(s_.size());
  dx_.resize(s_.size());
  t_.resize(s_.size());
  ds_.resize(s_.size());
  dphi_.resize(s_.size());
}

void EdgeValues::reinit(const Mesh& mesh, const std::array<int, 3>& nodes) {
  const Vec2 p[3] = {mesh.node(nodes[0]), mesh.node(nodes[1]), mesh.node(nodes[2])};
  for (std::size_t q = 0; q < s_.size(); ++q) {
    Vec2 x{};
    Vec2 dx{};
    for (int k = 0; k < 3; ++k) {
      x += phi_[q][k] * p[k];
      dx += dphi_ref_[q][k] * p[k];
    }
    const double len = norm(dx);
    x_[q] = x;
    dx_[q] = dx;
    t_[q] = (1.0 / len) * dx;
    ds_[q] = len * w_[q];
    for (int k = 0; k < 3; ++k) dphi_[q][k] = dphi_ref_[q][k] / len;
  }
}

std::pair<Vec2, Vec2> edge_point(const Mesh& mesh, const std::array<int, 3>& nodes, double s) {
  const auto phi = lagrange_p2(s);
  const auto dphi = lagrange_p2_derivative(s);
  Vec2 x{};
  Vec2 dx{};
  for (int k = 0; k < 3; ++k) {
    x += phi[k] * mesh.node(nodes[k]);
    dx += dphi[k] * mesh.node(nodes[k]);
  }
  return {x, dx};
}

}  // namespace ale2fluid
