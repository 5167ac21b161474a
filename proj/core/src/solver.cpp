#include "ale2fluid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ale2fluid {

std::string to_string(MotionScheme s) {
  switch (s) {
    case MotionScheme::M1: return "M1";
    case MotionScheme::M2: return "M2";
    case MotionScheme::M3: return "M3";
  }
  return "?";
}

std::string to_string(GravityDomain g) {
  switch (g) {
    case GravityDomain::Prev: return "prev";
    case GravityDomain::Next: return "next";
    case GravityDomain::Half: return "half";
  }
  return "?";
}

std::string to_string(LinearSolverKind k) {
  return k == LinearSolverKind::Direct ? "direct" : "gmres";
}

MotionScheme parse_motion_scheme(const std::string& s) {
  if (s == "M1") return MotionScheme::M1;
  if (s == "M2") return MotionScheme::M2;
  if (s == "M3") return MotionScheme::M3;
  throw std::invalid_argument("unknown motion scheme '" + s + "' (expected M1, M2 or M3)");
}

GravityDomain parse_gravity_domain(const std::string& s) {
  if (s == "prev") return GravityDomain::Prev;
  if (s == "next") return GravityDomain::Next;
  if (s == "half") return GravityDomain::Half;
  throw std::invalid_argument("unknown gravity domain '" + s + "' (expected prev, next or half)");
}

LinearSolverKind parse_linear_solver(const std::string& s) {
  if (s == "direct") return LinearSolverKind::Direct;
  if (s == "gmres") return LinearSolverKind::Gmres;
  throw std::invalid_argument("unknown linear solver '" + s + "' (expected direct or gmres)");
}

Vec2 PhysicalParams::wall_velocity(WallTag tag) const {
  const double v = wall_speed[static_cast<int>(tag)];
  return (tag == WallTag::Bottom || tag == WallTag::Top) ? Vec2{v, 0.0} : Vec2{0.0, v};
}

void PhysicalParams::validate() const {
  if (!(rho1 > 0.0 && rho2 > 0.0)) throw std::invalid_argument("densities must be positive");
  if (!(eta1 > 0.0 && eta2 > 0.0)) throw std::invalid_argument("viscosities must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  if (!(beta1 >= 0.0 && beta2 >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(theta_s > 0.0 && theta_s < M_PI)) throw std::invalid_argument("theta_s must lie in (0, pi)");
  if (!std::isfinite(g)) throw std::invalid_argument("g must be finite");
}

void SchemeConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(m2_relaxation > 0.0 && m2_relaxation <= 1.0)) {
    throw std::invalid_argument("m2_relaxation must lie in (0, 1]");
  }
  if (!(m2_tol > 0.0)) throw std::invalid_argument("m2_tol must be positive");
  if (m2_max_iter < 1) throw std::invalid_argument("m2_max_iter must be at least 1");
  if (!(n_min > 0.0 && n_min < 1.0)) throw std::invalid_argument("n_min must lie in (0, 1)");
}

FixedPointError::FixedPointError(int iterations, double residual)
    : std::runtime_error("M2 fixed point did not converge after " + std::to_string(iterations) +
                         " iterations (last displacement change " + std::to_string(residual) +
                         ")"),
      iterations_(iterations),
      residual_(residual) {}

namespace {

void check_pair(const State& state, const Mesh& next_mesh) {
  state.check();
  if (!state.mesh.same_topology(next_mesh)) {
    throw AssemblyError("next mesh does not share the state's topology");
  }
}

/// Gravity load -int rho g phi e_2 on one mesh, scaled.
std::vector<double> gravity_load(const Mesh& mesh, const FunctionSpace& vs,
                                 const PhysicalParams& p, double scale) {
  LinearForm l;
  l.test = &vs;
  l.volume.push_back([&](const CellValues& cv, LocalVector& out) {
    const double f = -scale * p.rho(cv.mesh().region(cv.cell())) * p.g;
    for (int q = 0; q < cv.n_points(); ++q) {
      for (int k = 0; k < 9; ++k) out[2 * k + 1] += f * cv.shape(q, k) * cv.jxw(q);
    }
  });
  return assemble_full(l, mesh);
}

}  // namespace

Vec2 contact_conormal(const Mesh& mesh, const ContactNode& contact) {
  const auto& topo = mesh.topology();
  const auto [begin, end] = topo.chain_ranges.at(contact.chain);
  const auto& edge = topo.interface_edges[contact.chain_end ? end - 1 : begin];
  const Vec2 t = edge_point(mesh, edge.nodes, contact.chain_end ? 1.0 : -1.0).second;
  const Vec2 m = (1.0 / norm(t)) * t;
  return contact.chain_end ? m : -1.0 * m;
}

Vec2 contact_wall_tangent(const Mesh& mesh, const ContactNode& contact) {
  const auto& topo = mesh.topology();
  bool on_wall = false;
  for (const WallEdge& e : topo.wall_edges) {
    if (e.tag == contact.wall &&
        std::find(e.nodes.begin(), e.nodes.end(), contact.node) != e.nodes.end()) {
      on_wall = true;
      break;
    }
  }
  if (!on_wall) {
    throw AssemblyError("contact node " + std::to_string(contact.node) + " is not on wall '" +
                        to_string(contact.wall) + "'");
  }
  // The wall tangent pointing away from fluid 1 has a positive component
  // along the interface normal (which points out of fluid 1).
  const Vec2 m = contact_conormal(mesh, contact);
  const Vec2 t = contact.chain_end ? m : -1.0 * m;
  const Vec2 n = rotate_left(t);
  const Vec2 tau = rotate_left(wall_normal(contact.wall));
  const double s = dot(n, tau);
  if (s == 0.0) throw AssemblyError("interface tangent to the wall at a contact");
  return s > 0.0 ? tau : -1.0 * tau;
}

std::vector<double> surface_tension_load(const Mesh& mesh, const FunctionSpace& velocity,
                                         const PhysicalParams& params) {
  if (params.gamma == 0.0) return std::vector<double>(velocity.dof_count, 0.0);
  const double gamma = params.gamma;
  LinearForm l;
  l.test = &velocity;
  l.interface.push_back([gamma](const EdgeContext& ctx, LocalVector& out) {
    const EdgeValues& ev = ctx.ev;
    for (int q = 0; q < ev.n_points(); ++q) {
      const Vec2& t = ev.unit_tangent(q);
      for (int k = 0; k < 3; ++k) {
        const double f = -gamma * ev.shape_ds(q, k) * ev.dsigma(q);
        out[2 * k] += f * t.x;
        out[2 * k + 1] += f * t.y;
      }
    }
  });
  const double young = gamma * std::cos(params.theta_s);
  l.contact.push_back([&mesh, young](const ContactNode& c) {
    return young * contact_wall_tangent(mesh, c);
  });
  return assemble_full(l, mesh);
}

MomentumSystem assemble_momentum_system(const State& state, const Mesh& next_mesh,
                                        const MeshVelocity& w, const PhysicalParams& params,
                                        const SchemeConfig& scheme) {
  check_pair(state, next_mesh);
  if (static_cast<int>(w.w.size()) != next_mesh.num_nodes()) {
    throw AssemblyError("mesh velocity does not match the mesh");
  }
  const FunctionSpace& vs = state.spaces->velocity;
  const FunctionSpace& ps = state.spaces->pressure;
  const FunctionSpace ss = build_scalar_space(next_mesh);
  const std::vector<double> wc = node_field_to_coeffs(ss, w.w);
  const std::vector<double>& un = state.velocity;
  const double dt = scheme.dt;
  const int d = component(w.direction);
  const Vec2 e = unit_vector(w.direction);
  const PhysicalParams& p = params;

  BilinearForm a;
  a.test = &vs;
  a.trial = &vs;
  a.volume.push_back([&](const CellValues& cv, LocalMatrix& m) {
    const int region = cv.mesh().region(cv.cell());
    const double rho = p.rho(region);
    const double eta = p.eta(region);
    for (int q = 0; q < cv.n_points(); ++q) {
      const FieldSample u = velocity_at(cv, q, vs, un);
      Vec2 gw;
      const double wq = scalar_at(cv, q, ss, wc, &gw);
      const Vec2 adv = u.value - wq * e;
      const double react = rho * (1.0 / dt - gw[d] + 0.5 * (u.grad(0, 0) + u.grad(1, 1)));
      const double jw = cv.jxw(q);
      for (int i = 0; i < 9; ++i) {
        const double pi = cv.shape(q, i);
        const Vec2& gi = cv.grad(q, i);
        for (int j = 0; j < 9; ++j) {
          const Vec2& gj = cv.grad(q, j);
          const double s =
              (react * pi * cv.shape(q, j) + rho * dot(adv, gj) * pi + eta * dot(gi, gj)) * jw;
          for (int c = 0; c < 2; ++c) {
            m(2 * i + c, 2 * j + c) += s;
            for (int b = 0; b < 2; ++b) m(2 * i + c, 2 * j + b) += eta * gi[b] * gj[c] * jw;
          }
        }
      }
    }
  });
  const double half_drho = 0.5 * p.delta_rho();
  if (half_drho != 0.0) {
    a.interface.push_back([&](const EdgeContext& ctx, LocalMatrix& m) {
      const EdgeValues& ev = ctx.ev;
      std::array<Vec2, 3> nodal;
      for (int k = 0; k < 3; ++k) {
        const int n = ctx.nodes[k];
        nodal[k] = Vec2{un[vs.node_dof(n, 0)], un[vs.node_dof(n, 1)]} - w.w[n] * e;
      }
      for (int q = 0; q < ev.n_points(); ++q) {
        Vec2 adv{};
        for (int k = 0; k < 3; ++k) adv += ev.shape(q, k) * nodal[k];
        const double f = half_drho * dot(adv, ev.left_normal(q)) * ev.dsigma(q);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            const double s = f * ev.shape(q, i) * ev.shape(q, j);
            m(2 * i, 2 * j) += s;
            m(2 * i + 1, 2 * j + 1) += s;
          }
        }
      }
    });
  }
  const bool friction = p.beta1 != 0.0 || p.beta2 != 0.0;
  if (friction) {
    a.wall.push_back({{}, [&](const EdgeContext& ctx, LocalMatrix& m) {
                        const double beta = p.beta(next_mesh.region(ctx.cell));
                        const EdgeValues& ev = ctx.ev;
                        for (int q = 0; q < ev.n_points(); ++q) {
                          for (int i = 0; i < 3; ++i) {
                            for (int j = 0; j < 3; ++j) {
                              const double s =
                                  beta * ev.shape(q, i) * ev.shape(q, j) * ev.dsigma(q);
                              m(2 * i, 2 * j) += s;
                              m(2 * i + 1, 2 * j + 1) += s;
                            }
                          }
                        }
                      }});
  }

  // Right-hand side on the new mesh: friction toward the wall velocity,
  // surface tension and the gravity share on Omega^{n+1}.
  LinearForm l;
  l.test = &vs;
  if (friction) {
    l.wall.push_back({{}, [&](const EdgeContext& ctx, LocalVector& out) {
                        const double beta = p.beta(next_mesh.region(ctx.cell));
                        const Vec2 ub = p.wall_velocity(*ctx.wall);
                        const EdgeValues& ev = ctx.ev;
                        for (int q = 0; q < ev.n_points(); ++q) {
                          for (int k = 0; k < 3; ++k) {
                            const double s = beta * ev.shape(q, k) * ev.dsigma(q);
                            out[2 * k] += s * ub.x;
                            out[2 * k + 1] += s * ub.y;
                          }
                        }
                      }});
  }
  std::vector<double> rhs_full = assemble_full(l, next_mesh);
  const auto tension = surface_tension_load(next_mesh, vs, p);
  for (int i = 0; i < vs.dof_count; ++i) rhs_full[i] += tension[i];

  LinearForm inertia;
  inertia.test = &vs;
  inertia.volume.push_back([&](const CellValues& cv, LocalVector& out) {
    const double rho = p.rho(cv.mesh().region(cv.cell()));
    for (int q = 0; q < cv.n_points(); ++q) {
      const Vec2 u = velocity_at(cv, q, vs, un).value;
      const double f = rho / dt * cv.jxw(q);
      for (int k = 0; k < 9; ++k) {
        out[2 * k] += f * u.x * cv.shape(q, k);
        out[2 * k + 1] += f * u.y * cv.shape(q, k);
      }
    }
  });
  const auto old_load = assemble_full(inertia, state.mesh);
  for (int i = 0; i < vs.dof_count; ++i) rhs_full[i] += old_load[i];

  if (p.g != 0.0) {
    auto add = [&](const Mesh& m, double scale) {
      const auto gl = gravity_load(m, vs, p, scale);
      for (int i = 0; i < vs.dof_count; ++i) rhs_full[i] += gl[i];
    };
    switch (scheme.gravity_domain) {
      case GravityDomain::Prev: add(state.mesh, 1.0); break;
      case GravityDomain::Next: add(next_mesh, 1.0); break;
      case GravityDomain::Half:
        add(state.mesh, 0.5);
        add(next_mesh, 0.5);
        break;
    }
  }

  MomentumSystem sys;
  sys.velocity_free = vs.free_count;
  sys.pressure_count = ps.dof_count;
  const int nu = vs.free_count;
  const int np = ps.dof_count;
  std::vector<Triplet> t;
  append_free(assemble_triplets(a, next_mesh), vs, vs, 0, 0, t);
  const auto b = assemble_triplets(divergence_form(ps, vs), next_mesh);
  append_free(b, ps, vs, nu, 0, t);
  std::vector<Triplet> bt;
  bt.reserve(b.size());
  for (const Triplet& x : b) bt.push_back({x.col, x.row, x.value});
  append_free(bt, vs, ps, 0, nu, t);

  // Zero-mean multiplier: c_i = int q_i on Omega^{n+1}.
  CellValues cv;
  for (int c = 0; c < next_mesh.num_cells(); ++c) {
    cv.reinit(next_mesh, c);
    const PressureFrame f = pressure_frame(next_mesh, c);
    std::array<double, 3> m{};
    for (int q = 0; q < cv.n_points(); ++q) {
      const auto basis = f.basis(cv.point(q));
      for (int k = 0; k < 3; ++k) m[k] += basis[k] * cv.jxw(q);
    }
    const int* pd = ps.cell_dofs(c);
    for (int k = 0; k < 3; ++k) {
      t.push_back({nu + pd[k], nu + np, m[k]});
      t.push_back({nu + np, nu + pd[k], m[k]});
    }
  }
  const int n = nu + np + 1;
  sys.matrix = CsrMatrix::from_triplets(n, n, std::move(t), true);
  sys.rhs.assign(n, 0.0);
  const auto rf = restrict_to_free(vs, rhs_full);
  std::copy(rf.begin(), rf.end(), sys.rhs.begin());
  return sys;
}

State solve_on_mesh(const State& state, const Mesh& next_mesh, const MeshVelocity& w,
                    const PhysicalParams& params, const SchemeConfig& scheme, int* iterations,
                    double* residual) {
  const MomentumSystem sys = assemble_momentum_system(state, next_mesh, w, params, scheme);
  const FunctionSpace& vs = state.spaces->velocity;
  std::vector<double> x;
  if (scheme.solver == LinearSolverKind::Direct) {
    x = solve_direct(sys.matrix, sys.rhs);
    if (iterations) *iterations = 1;
    if (residual) {
      auto r = sys.matrix.multiply(x);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= sys.rhs[i];
      const double bn = norm2(sys.rhs);
      *residual = bn > 0.0 ? norm2(r) / bn : norm2(r);
    }
  } else {
    std::vector<double> x0(sys.rhs.size(), 0.0);
    const auto uf = restrict_to_free(vs, state.velocity);
    std::copy(uf.begin(), uf.end(), x0.begin());
    std::copy(state.pressure.begin(), state.pressure.end(), x0.begin() + sys.velocity_free);
    GmresResult r = solve_gmres_ilu(sys.matrix, sys.rhs, x0, scheme.gmres);
    x = std::move(r.x);
    if (iterations) *iterations = r.iterations;
    if (residual) *residual = r.residual;
  }
  State out;
  out.spaces = state.spaces;
  out.mesh = next_mesh;
  out.time = state.time + scheme.dt;
  out.velocity = expand_from_free(
      vs, std::vector<double>(x.begin(), x.begin() + sys.velocity_free));
  out.pressure.assign(x.begin() + sys.velocity_free,
                      x.begin() + sys.velocity_free + sys.pressure_count);
  return out;
}

StepResult step(const State& state, const State* previous, const PhysicalParams& params,
                const SchemeConfig& scheme) {
  params.validate();
  scheme.validate();
  state.check();
  if (state.mesh.topology().direction != scheme.direction) {
    throw std::invalid_argument("scheme motion direction differs from the mesh's");
  }
  const FunctionSpace& vs = state.spaces->velocity;
  StepResult res;
  res.old_mesh = state.mesh;

  auto move = [&](const Mesh& on, const std::vector<double>& trace, const NodalNormals& normals) {
    MeshVelocity mv = solve_mesh_velocity(on, normals.nodes, trace, scheme.direction);
    Mesh next = apply_motion(state.mesh, mv.motion(scheme.dt));
    return std::make_pair(std::move(mv), std::move(next));
  };

  if (scheme.scheme != MotionScheme::M2) {
    const NodalNormals normals = discrete_normals(state.mesh);
    const auto un = interface_values(vs, state.velocity, normals);
    std::vector<double> trace;
    if (scheme.scheme == MotionScheme::M1) {
      trace = kinematic_trace(normals, un, scheme.direction, scheme.n_min);
    } else {
      std::vector<Vec2> prev;
      if (previous) {
        if (!previous->mesh.same_topology(state.mesh)) {
          throw AssemblyError("previous state does not share the mesh topology");
        }
        prev = interface_values(vs, previous->velocity, normals);
      }
      ExtrapolatedTrace et = extrapolated_trace(normals, un, previous ? &prev : nullptr,
                                                scheme.direction, scheme.n_min);
      trace = std::move(et.trace);
      res.trace_fell_back = et.fell_back;
    }
    auto [mv, next] = move(state.mesh, trace, normals);
    res.state = solve_on_mesh(state, next, mv, params, scheme, &res.linear_iterations,
                              &res.linear_residual);
    res.mesh_velocity = std::move(mv);
    return res;
  }

  std::vector<double> u = state.velocity;
  Mesh current = state.mesh;
  double change = std::numeric_limits<double>::infinity();
  const double omega = scheme.m2_relaxation;
  for (int k = 1; k <= scheme.m2_max_iter; ++k) {
    const NodalNormals normals = discrete_normals(current);
    const auto values = interface_values(vs, u, normals);
    const auto trace = kinematic_trace(normals, values, scheme.direction, scheme.n_min);
    auto [mv, next] = move(current, trace, normals);
    State solved = solve_on_mesh(state, next, mv, params, scheme, &res.linear_iterations,
                                 &res.linear_residual);
    change = 0.0;
    for (int n : normals.nodes) change = std::max(change, norm(next.node(n) - current.node(n)));
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = omega * solved.velocity[i] + (1.0 - omega) * u[i];
    }
    current = next;
    if (k >= 2 && change <= scheme.m2_tol) {
      res.state = std::move(solved);
      res.mesh_velocity = std::move(mv);
      res.fixed_point_iterations = k;
      res.fixed_point_residual = change;
      return res;
    }
  }
  throw FixedPointError(scheme.m2_max_iter, change);
}

std::vector<ContactState> measure_contact_state(const State& state, const PhysicalParams& params) {
  const FunctionSpace& vs = state.spaces->velocity;
  std::vector<ContactState> out;
  for (const ContactNode& c : state.mesh.topology().contacts) {
    ContactState s;
    s.node = c.node;
    s.wall = c.wall;
    s.position = state.mesh.node(c.node);
    const double cos_theta =
        std::clamp(dot(contact_conormal(state.mesh, c), contact_wall_tangent(state.mesh, c)),
                   -1.0, 1.0);
    s.angle = std::acos(cos_theta);
    s.velocity = {state.velocity[vs.node_dof(c.node, 0)], state.velocity[vs.node_dof(c.node, 1)]};
    const Vec2 tau = (c.wall == WallTag::Bottom || c.wall == WallTag::Top) ? Vec2{1.0, 0.0}
                                                                           : Vec2{0.0, 1.0};
    s.slip = dot(s.velocity - params.wall_velocity(c.wall), tau);
    out.push_back(s);
  }
  return out;
}

}  // namespace ale2fluid
