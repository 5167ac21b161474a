#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ale2fluid/fem.hpp"
#include "doctest.h"

using namespace ale2fluid;

namespace {

const Rect kBox{-2.0, 2.0, 0.0, 2.0};

Mesh gravity_mesh(int nx, int ny) {
  return build_structured_mesh(kBox, nx, ny, [](double x) { return x / 5.0 + 1.0; },
                               MotionDirection::Vertical);
}

Mesh wavy_mesh(int nx, int ny) {
  return build_structured_mesh(kBox, nx, ny, [](double x) { return 1.0 + 0.2 * std::sin(x); },
                               MotionDirection::Vertical);
}

Eigen::MatrixXd dense(const CsrMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) d(i, a.col_idx[k]) = a.values[k];
  }
  return d;
}

double quad(const CsrMatrix& a, const std::vector<double>& u) { return dot(u, a.multiply(u)); }

}  // namespace

TEST_CASE("dof counts") {
  const Mesh m = gravity_mesh(2, 2);
  const Spaces s = build_spaces(m, false);
  CHECK(s.velocity.dof_count == 50);
  CHECK(s.pressure.dof_count == 12);
  CHECK(s.pressure.local_size == 3);
  CHECK(s.pressure.zero_mean);
  // all 16 boundary nodes lose one component, the four corners lose both
  CHECK(s.velocity.free_count == 50 - 16 - 4);

  StructuredMeshSpec spec;
  spec.domain = kBox;
  spec.cross_cells = 8;
  spec.band_cells = {2, 2};
  spec.interfaces = {[](double) { return 1.0; }};
  spec.band_region = {1, 2};
  const Mesh plain = build_structured_mesh(spec);
  spec.periodic = true;
  const Mesh periodic = build_structured_mesh(spec);
  const int full = build_spaces(plain, false).velocity.dof_count;
  const Spaces sp = build_spaces(periodic, true);
  CHECK(full - sp.velocity.dof_count == 2 * (2 * 4 + 1));
  for (const auto& p : periodic.topology().periodic_pairs) {
    CHECK(sp.velocity.node_dof(p.left, 0) == sp.velocity.node_dof(p.right, 0));
  }
  CHECK_THROWS_AS(build_spaces(plain, true), AssemblyError);
}

TEST_CASE("pressure mass against constants gives cell areas") {
  const Mesh m = wavy_mesh(5, 4);
  const Spaces s = build_spaces(m);
  const CsrMatrix mp = assemble_full(mass_form(s.pressure, std::vector<double>(m.num_cells(), 1.0)), m);
  std::vector<double> one(s.pressure.dof_count, 0.0);
  for (int c = 0; c < m.num_cells(); ++c) one[3 * c] = 1.0;
  const auto r = mp.multiply(one);
  for (int c = 0; c < m.num_cells(); ++c) {
    const double area =
        region_integral(m, 0, [c](const QuadraturePoint& p) { return p.cell == c ? 1.0 : 0.0; });
    CHECK(r[3 * c] == doctest::Approx(area).epsilon(1e-13));
  }
}

TEST_CASE("Q2 reproduces linear and bilinear fields") {
  // linear fields on the curved isoparametric mesh, x1 x2 on a rectangular one
  const Mesh curved = wavy_mesh(4, 4);
  const Mesh flat = build_structured_mesh(kBox, 4, 4, [](double) { return 0.7; },
                                          MotionDirection::Vertical);
  const FunctionSpace sc = build_scalar_space(curved);
  const FunctionSpace sf = build_scalar_space(flat);
  const auto lin = interpolate_scalar(sc, curved, [](const Vec2& x) { return x.y; });
  const auto bil = interpolate_scalar(sf, flat, [](const Vec2& x) { return x.x * x.y; });
  const auto px = interpolate_scalar(sf, flat, [](const Vec2& x) { return x.x; });
  const auto py = interpolate_scalar(sf, flat, [](const Vec2& x) { return x.y; });
  for (int c = 0; c < curved.num_cells(); ++c) {
    for (const Vec2 ref : {Vec2{0.3, -0.7}, Vec2{-1.0, 1.0}, Vec2{0.0, 0.25}}) {
      const FieldSample a = evaluate_field(sc, curved, lin, c, ref);
      CHECK(std::abs(a.grad(0, 0)) < 1e-12);
      CHECK(std::abs(a.grad(0, 1) - 1.0) < 1e-12);
      const FieldSample b = evaluate_field(sf, flat, bil, c, ref);
      const double x1 = evaluate_field(sf, flat, px, c, ref).value.x;
      const double x2 = evaluate_field(sf, flat, py, c, ref).value.x;
      CHECK(std::abs(b.grad(0, 0) - x2) < 1e-12);
      CHECK(std::abs(b.grad(0, 1) - x1) < 1e-12);
    }
  }
}

TEST_CASE("field gradient matches central finite differences") {
  const Mesh m = wavy_mesh(4, 4);
  const Spaces s = build_spaces(m);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coef(s.velocity.dof_count);
  for (double& c : coef) c = u(rng);
  const FunctionSpace pos_space = build_scalar_space(m);
  const auto px = interpolate_scalar(pos_space, m, [](const Vec2& x) { return x.x; });
  const auto py = interpolate_scalar(pos_space, m, [](const Vec2& x) { return x.y; });
  const int cell = 5;
  const Vec2 ref{0.2, -0.4};
  const FieldSample f = evaluate_field(s.velocity, m, coef, cell, ref);
  // d/dxi by finite differences, then map with the inverse Jacobian
  const double h = 1e-6;
  auto at = [&](const std::vector<double>& c, const FunctionSpace& sp, Vec2 r) {
    return evaluate_field(sp, m, c, cell, r).value;
  };
  Eigen::Matrix2d jac;
  Eigen::Matrix2d dv;
  for (int d = 0; d < 2; ++d) {
    Vec2 rp = ref, rm = ref;
    rp[d] += h;
    rm[d] -= h;
    jac(0, d) = (at(px, pos_space, rp).x - at(px, pos_space, rm).x) / (2 * h);
    jac(1, d) = (at(py, pos_space, rp).x - at(py, pos_space, rm).x) / (2 * h);
    const Vec2 vp = at(coef, s.velocity, rp);
    const Vec2 vm = at(coef, s.velocity, rm);
    dv(0, d) = (vp.x - vm.x) / (2 * h);
    dv(1, d) = (vp.y - vm.y) / (2 * h);
  }
  const Eigen::Matrix2d g = dv * jac.inverse();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(std::abs(g(i, j) - f.grad(i, j)) < 1e-6);
  }
}

TEST_CASE("mass, divergence and viscous forms on closed-form fields") {
  const Mesh m = wavy_mesh(6, 4);
  const Spaces s = build_spaces(m);
  const double rho = 0.81;
  const double eta = 1.95;
  const double area = kBox.area();

  const CsrMatrix mass = assemble_full(mass_form(s.velocity, std::vector<double>(m.num_cells(), rho)), m);
  const auto ex = interpolate_velocity(s.velocity, m, [](const Vec2&) { return Vec2{1.0, 0.0}; }, false);
  CHECK(quad(mass, ex) == doctest::Approx(rho * area).epsilon(1e-13));

  const CsrMatrix div = assemble_full(divergence_form(s.pressure, s.velocity), m);
  const auto stretch = interpolate_velocity(s.velocity, m, [](const Vec2& x) { return Vec2{x.x, -x.y}; }, false);
  for (double r : div.multiply(stretch)) CHECK(std::abs(r) < 1e-12);

  const CsrMatrix visc = assemble_full(viscous_form(s.velocity, std::vector<double>(m.num_cells(), eta)), m);
  const auto shear = interpolate_velocity(s.velocity, m, [](const Vec2& x) { return Vec2{x.y, 0.0}; }, false);
  const double oracle = region_integral(m, 0, [&](const QuadraturePoint& p) {
    const FieldSample f = evaluate_field(s.velocity, m, shear, p.cell, p.ref);
    double d2 = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) d2 += std::pow(f.grad(i, j) + f.grad(j, i), 2);
    }
    return 0.5 * eta * d2;
  });
  CHECK(oracle == doctest::Approx(eta * area).epsilon(1e-13));
  CHECK(quad(visc, shear) == doctest::Approx(eta * area).epsilon(1e-12));
}

TEST_CASE("divergence block has only the constant pressure mode in its kernel") {
  const Mesh m = gravity_mesh(8, 4);
  const Spaces s = build_spaces(m);
  const CsrMatrix b = assemble(divergence_form(s.pressure, s.velocity), m);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dense(b));
  lu.setThreshold(1e-10);
  CHECK(lu.rank() == s.pressure.dof_count - 1);
}

TEST_CASE("assembly is additive and symmetric forms give symmetric matrices") {
  const Mesh m = wavy_mesh(6, 4);
  const Spaces s = build_spaces(m);
  const auto rho = per_region(m, 1.0, 0.91);
  const auto eta = per_region(m, 0.01, 0.0091);
  BilinearForm joint = mass_form(s.velocity, rho);
  const BilinearForm visc = viscous_form(s.velocity, eta);
  joint.volume.push_back(visc.volume[0]);
  const CsrMatrix a = assemble(mass_form(s.velocity, rho), m);
  const CsrMatrix b = assemble(visc, m);
  const CsrMatrix ab = assemble(joint, m);
  double err = 0.0;
  for (int i = 0; i < ab.rows; ++i) {
    for (int k = ab.row_ptr[i]; k < ab.row_ptr[i + 1]; ++k) {
      const int j = ab.col_idx[k];
      err = std::max(err, std::abs(ab.values[k] - a.at(i, j) - b.at(i, j)));
    }
  }
  CHECK(err < 1e-15 * ab.frobenius_norm() + 1e-16);
  CHECK(a.asymmetry() < 1e-13);
  CHECK(b.asymmetry() < 1e-13);
  CHECK(assemble(laplace_form(build_scalar_space(m)), m).asymmetry() < 1e-13);
}

TEST_CASE("wall term on a missing tag is rejected") {
  StructuredMeshSpec spec;
  spec.domain = kBox;
  spec.cross_cells = 4;
  spec.band_cells = {2, 2};
  spec.interfaces = {[](double) { return 1.0; }};
  spec.band_region = {1, 2};
  spec.periodic = true;
  const Mesh m = build_structured_mesh(spec);
  const Spaces s = build_spaces(m);
  BilinearForm f;
  f.test = f.trial = &s.velocity;
  f.wall.push_back({{WallTag::Left}, [](const EdgeContext&, LocalMatrix&) {}});
  CHECK_THROWS_AS(assemble(f, m), AssemblyError);
  f.wall.front().tags = {WallTag::Top};
  CHECK_NOTHROW(assemble(f, m));
}

TEST_CASE("lifting moves prescribed values to the load") {
  const Mesh m = wavy_mesh(4, 4);
  const FunctionSpace base = build_scalar_space(m);
  std::vector<int> boundary;
  for (const auto& e : m.topology().wall_edges) {
    for (int n : e.nodes) boundary.push_back(base.node_dof(n));
  }
  const FunctionSpace s = base.with_constraints(boundary);
  // harmonic linear field is reproduced exactly from its boundary values
  const auto exact = interpolate_scalar(s, m, [](const Vec2& x) { return 2.0 * x.x - x.y + 0.5; });
  LinearForm zero;
  zero.test = &s;
  const LiftedSystem sys = assemble_lifted(laplace_form(s), zero, m, exact);
  const auto u = expand_from_free(s, solve_direct(sys.matrix, sys.rhs), exact);
  for (int i = 0; i < s.dof_count; ++i) CHECK(u[i] == doctest::Approx(exact[i]).epsilon(1e-11));
}
