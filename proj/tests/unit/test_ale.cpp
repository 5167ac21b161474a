#include <cmath>
#include <random>

#include "ale2fluid/ale_motion.hpp"
#include "doctest.h"

using namespace ale2fluid;

namespace {

const Rect kBox{-2.0, 2.0, 0.0, 2.0};

double tilted(double x) { return x / 5.0 + 1.0; }

Mesh couette_like(int cross) {
  StructuredMeshSpec spec;
  spec.domain = {0.0, 4.0, 0.0, 1.0};
  spec.direction = MotionDirection::Horizontal;
  spec.cross_cells = cross;
  spec.band_cells = {2, 4, 2};
  spec.interfaces = {[](double y) { return 1.0 + 0.1 * y; }, [](double y) { return 3.0 - 0.1 * y * y; }};
  spec.band_region = {1, 2, 1};
  spec.periodic = true;
  return build_structured_mesh(spec);
}

Vec2 vortex(const Vec2& x) {
  const double a = M_PI / 4.0;
  const double b = M_PI / 2.0;
  return {std::sin(a * (x.x + 2.0)) * b * std::cos(b * x.y),
          -a * std::cos(a * (x.x + 2.0)) * std::sin(b * x.y)};
}

// Jacobian determinants of the moved mesh at 5x5 Gauss points, evaluated
// from the biquadratic map without the library element code.
double sampled_min_jacobian(const Mesh& mesh, const std::vector<double>& w, double dt) {
  const double g[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                       0.9061798459386640};
  auto l = [](double s, int a) { return a == 0 ? 0.5 * s * (s - 1) : a == 1 ? 1 - s * s : 0.5 * s * (s + 1); };
  auto dl = [](double s, int a) { return a == 0 ? s - 0.5 : a == 1 ? -2 * s : s + 0.5; };
  double worst = 1e300;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& ids = mesh.topology().cells[c];
    for (double s : g) {
      for (double t : g) {
        double xs = 0, xt = 0, ys = 0, yt = 0;
        for (int b = 0; b < 3; ++b) {
          for (int a = 0; a < 3; ++a) {
            const Vec2 p = mesh.node(ids[3 * b + a]);
            const double y = p.y + dt * w[ids[3 * b + a]];
            xs += dl(s, a) * l(t, b) * p.x;
            xt += l(s, a) * dl(t, b) * p.x;
            ys += dl(s, a) * l(t, b) * y;
            yt += l(s, a) * dl(t, b) * y;
          }
        }
        worst = std::min(worst, xs * yt - xt * ys);
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("normals of straight interfaces") {
  const Mesh flat = build_structured_mesh(kBox, 8, 4, [](double) { return 1.0; }, MotionDirection::Vertical);
  const NodalNormals nf = discrete_normals(flat);
  CHECK(nf.size() == 17);
  for (const Vec2& n : nf.unit) {
    CHECK(std::abs(n.x) < 1e-15);
    CHECK(n.y == doctest::Approx(1.0).epsilon(1e-15));
  }
  const Mesh tilt = build_structured_mesh(kBox, 8, 4, tilted, MotionDirection::Vertical);
  const NodalNormals nt = discrete_normals(tilt);
  const double s = std::sqrt(1.0 + 1.0 / 25.0);
  for (int i = 0; i < nt.size(); ++i) {
    CHECK(nt.unit[i].x == doctest::Approx(-0.2 / s).epsilon(1e-14));
    CHECK(nt.unit[i].y == doctest::Approx(1.0 / s).epsilon(1e-14));
    CHECK(norm(nt.unit[i]) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("normals on a circular arc converge at second order") {
  // circle of radius 2 centred at (0, -1), sampled on x in (-1, 1)
  const Rect box{-1.0, 1.0, 0.0, 2.0};
  auto arc = [](double x) { return std::sqrt(4.0 - x * x) - 1.0; };
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const Mesh m = build_structured_mesh(box, n, 8, arc, MotionDirection::Vertical);
    const NodalNormals nn = discrete_normals(m);
    double e = 0.0;
    for (int i = 0; i < nn.size(); ++i) {
      const Vec2 x = m.node(nn.nodes[i]);
      if (std::abs(x.x) > 1.0 - 1e-12) continue;  // one-sided contact nodes
      const Vec2 exact = 0.5 * Vec2{x.x, x.y + 1.0};
      e = std::max(e, norm(nn.unit[i] - exact));
    }
    err.push_back(e);
  }
  const double order = std::log2(err[1] / err[2]);
  MESSAGE("arc normal errors " << err[0] << " " << err[1] << " " << err[2]);
  CHECK(order >= 1.9);
}

TEST_CASE("weighted normals equal the volume integral of the basis gradient") {
  const Mesh m = build_structured_mesh(kBox, 8, 6, [](double x) { return 1.0 + 0.2 * std::sin(x); },
                                       MotionDirection::Vertical);
  const NodalNormals nn = discrete_normals(m);
  const FunctionSpace s = build_scalar_space(m);
  for (int i = 0; i < nn.size(); ++i) {
    const int node = nn.nodes[i];
    const Vec2 x = m.node(node);
    if (std::abs(std::abs(x.x) - 2.0) < 1e-12) continue;
    std::vector<double> phi(s.dof_count, 0.0);
    phi[s.node_dof(node)] = 1.0;
    Vec2 g{};
    for (int d = 0; d < 2; ++d) {
      g[d] = region_integral(m, 1, [&](const QuadraturePoint& p) {
        return evaluate_field(s, m, phi, p.cell, p.ref).grad(0, d);
      });
    }
    CHECK(std::abs(g.x - nn.weighted[i].x) < 1e-10);
    CHECK(std::abs(g.y - nn.weighted[i].y) < 1e-10);
  }
}

TEST_CASE("kinematic trace") {
  const Mesh flat = build_structured_mesh(kBox, 4, 4, [](double) { return 1.0; }, MotionDirection::Vertical);
  const NodalNormals nf = discrete_normals(flat);
  const auto t0 = kinematic_trace(nf, std::vector<Vec2>(nf.size(), Vec2{0.3, 0.7}), MotionDirection::Vertical);
  for (double t : t0) CHECK(t == doctest::Approx(0.7));

  const Mesh tilt = build_structured_mesh(kBox, 8, 4, tilted, MotionDirection::Vertical);
  const NodalNormals nt = discrete_normals(tilt);
  const auto t1 = kinematic_trace(nt, std::vector<Vec2>(nt.size(), Vec2{1.0, 0.0}), MotionDirection::Vertical);
  for (double t : t1) CHECK(t == doctest::Approx(-0.2).epsilon(1e-13));
  std::vector<Vec2> tangent(nt.size());
  for (int i = 0; i < nt.size(); ++i) tangent[i] = rotate_left(nt.unit[i]);
  for (double t : kinematic_trace(nt, tangent, MotionDirection::Vertical)) CHECK(std::abs(t) < 1e-15);

  try {
    kinematic_trace(nf, std::vector<Vec2>(nf.size(), Vec2{1.0, 0.0}), MotionDirection::Horizontal);
    FAIL("expected the steepness guard to fire");
  } catch (const SteepInterfaceError& e) {
    CHECK(e.node() == nf.nodes[0]);
  }
  // the tilted normal has |n1| close to 0.2: allowed at 0.1, rejected at 0.25
  CHECK_NOTHROW(kinematic_trace(nt, tangent, MotionDirection::Horizontal));
  CHECK_THROWS_AS(kinematic_trace(nt, tangent, MotionDirection::Horizontal, 0.25), SteepInterfaceError);
}

TEST_CASE("extrapolated trace") {
  const Mesh tilt = build_structured_mesh(kBox, 8, 4, tilted, MotionDirection::Vertical);
  const NodalNormals nt = discrete_normals(tilt);
  std::vector<Vec2> v(nt.size());
  for (int i = 0; i < nt.size(); ++i) v[i] = {0.1 * i, 1.0 - 0.05 * i};
  const auto m1 = kinematic_trace(nt, v, MotionDirection::Vertical);

  const auto same = extrapolated_trace(nt, v, &v, MotionDirection::Vertical);
  CHECK_FALSE(same.fell_back);
  const std::vector<Vec2> zero(nt.size());
  const auto doubled = extrapolated_trace(nt, v, &zero, MotionDirection::Vertical);
  const auto first = extrapolated_trace(nt, v, nullptr, MotionDirection::Vertical);
  CHECK(first.fell_back);
  for (int i = 0; i < nt.size(); ++i) {
    CHECK(same.trace[i] == doctest::Approx(m1[i]).epsilon(1e-15));
    CHECK(doubled.trace[i] == doctest::Approx(2.0 * m1[i]).epsilon(1e-15));
    CHECK(first.trace[i] == m1[i]);
  }

  // u(t) = t v sampled at t_{n-1} = 0.3 and t_n = 0.4 predicts t = 0.5
  std::vector<Vec2> un(nt.size()), up(nt.size()), ux(nt.size());
  for (int i = 0; i < nt.size(); ++i) {
    un[i] = 0.4 * v[i];
    up[i] = 0.3 * v[i];
    ux[i] = 0.5 * v[i];
  }
  const auto ex = extrapolated_trace(nt, un, &up, MotionDirection::Vertical);
  const auto exact = kinematic_trace(nt, ux, MotionDirection::Vertical);
  for (int i = 0; i < nt.size(); ++i) CHECK(std::abs(ex.trace[i] - exact[i]) < 1e-15);
}

TEST_CASE("mesh velocity of constant, zero and linear traces") {
  const Mesh m = couette_like(6);
  const NodalNormals nn = discrete_normals(m);
  const MeshVelocity c = solve_mesh_velocity(m, nn.nodes, std::vector<double>(nn.size(), 0.37),
                                             MotionDirection::Horizontal);
  for (double w : c.w) CHECK(w == doctest::Approx(0.37).epsilon(1e-12));
  const MeshVelocity z = solve_mesh_velocity(m, nn.nodes, std::vector<double>(nn.size(), 0.0),
                                             MotionDirection::Horizontal);
  for (double w : z.w) CHECK(w == 0.0);

  // walls normal to vertical motion hold w = 0, so the bounds include 0
  const Mesh flat = build_structured_mesh(kBox, 8, 8, [](double) { return 1.0; }, MotionDirection::Vertical);
  const NodalNormals nf = discrete_normals(flat);
  std::vector<double> trace(nf.size());
  for (int i = 0; i < nf.size(); ++i) trace[i] = 0.5 + 0.2 * flat.node(nf.nodes[i]).x;
  const MeshVelocity lin = solve_mesh_velocity(flat, nf.nodes, trace, MotionDirection::Vertical);
  const double lo = std::min(0.0, *std::min_element(trace.begin(), trace.end()));
  const double hi = std::max(0.0, *std::max_element(trace.begin(), trace.end()));
  for (double w : lin.w) {
    CHECK(w >= lo - 1e-12);
    CHECK(w <= hi + 1e-12);
  }
  for (int i = 0; i < nf.size(); ++i) CHECK(lin.w[nf.nodes[i]] == trace[i]);
}

TEST_CASE("mesh velocity is linear in the trace and satisfies the nodal kinematic condition") {
  const Mesh m = build_structured_mesh(kBox, 8, 4, tilted, MotionDirection::Vertical);
  const NodalNormals nn = discrete_normals(m);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(nn.size()), b(nn.size()), ab(nn.size());
  for (int i = 0; i < nn.size(); ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
    ab[i] = 2.0 * a[i] - 3.0 * b[i];
  }
  const auto wa = solve_mesh_velocity(m, nn.nodes, a, MotionDirection::Vertical).w;
  const auto wb = solve_mesh_velocity(m, nn.nodes, b, MotionDirection::Vertical).w;
  const auto wab = solve_mesh_velocity(m, nn.nodes, ab, MotionDirection::Vertical).w;
  for (std::size_t n = 0; n < wa.size(); ++n) CHECK(std::abs(wab[n] - 2.0 * wa[n] + 3.0 * wb[n]) < 1e-12);

  std::vector<Vec2> vel(nn.size());
  for (int i = 0; i < nn.size(); ++i) vel[i] = {u(rng), u(rng)};
  const auto trace = kinematic_trace(nn, vel, MotionDirection::Vertical);
  const MeshVelocity mv = solve_mesh_velocity(m, nn.nodes, trace, MotionDirection::Vertical);
  for (int i = 0; i < nn.size(); ++i) {
    const Vec2 w = mv.at_node(nn.nodes[i]);
    CHECK(std::abs(dot(w, nn.unit[i]) - dot(vel[i], nn.unit[i])) < 1e-14);
  }
}

TEST_CASE("large time step tangles the gravity mesh at the bisected threshold") {
  const Mesh m = build_structured_mesh(kBox, 8, 4, tilted, MotionDirection::Vertical);
  const Spaces s = build_spaces(m);
  const auto u0 = interpolate_velocity(s.velocity, m, vortex);
  const NodalNormals nn = discrete_normals(m);
  const auto trace = kinematic_trace(nn, interface_values(s.velocity, u0, nn), MotionDirection::Vertical);
  const MeshVelocity mv = solve_mesh_velocity(m, nn.nodes, trace, MotionDirection::Vertical);

  double lo = 0.0, hi = 1.0;
  while (sampled_min_jacobian(m, mv.w, hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sampled_min_jacobian(m, mv.w, mid) > 0.0 ? lo : hi) = mid;
  }
  MESSAGE("tangling threshold dt = " << hi);
  CHECK_NOTHROW(apply_motion(m, mv.motion(0.99 * lo)));
  CHECK_THROWS_AS(apply_motion(m, mv.motion(1.01 * hi)), MeshTangledError);
}
