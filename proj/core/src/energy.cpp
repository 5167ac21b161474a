#include "ale2fluid/energy.hpp"

#include <algorithm>
#include <cmath>

namespace ale2fluid {

EnergyTerms energy_terms(const State& state, const PhysicalParams& params) {
  state.check();
  const FunctionSpace& vs = state.spaces->velocity;
  EnergyTerms e;
  CellValues cv;
  for (int c = 0; c < state.mesh.num_cells(); ++c) {
    cv.reinit(state.mesh, c);
    const int region = state.mesh.region(c);
    const double rho = params.rho(region);
    const double eta = params.eta(region);
    for (int q = 0; q < cv.n_points(); ++q) {
      const FieldSample u = velocity_at(cv, q, vs, state.velocity);
      double sym = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const double s = u.grad(i, j) + u.grad(j, i);
          sym += s * s;
        }
      }
      e.K += 0.5 * rho * dot(u.value, u.value) * cv.jxw(q);
      e.W += rho * params.g * cv.point(q).y * cv.jxw(q);
      e.Pv += 0.5 * eta * sym * cv.jxw(q);
    }
  }
  e.sigma = interface_measure(state.mesh);
  return e;
}

double euler_dissipation(const State& old_state, const State& new_state,
                         const PhysicalParams& params) {
  old_state.check();
  if (old_state.spaces != new_state.spaces) throw AssemblyError("states use different spaces");
  const double dt = new_state.time - old_state.time;
  if (!(dt > 0.0)) throw std::invalid_argument("states are not in time order");
  std::vector<double> diff(new_state.velocity.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = new_state.velocity[i] - old_state.velocity[i];
  }
  const FunctionSpace& vs = old_state.spaces->velocity;
  double sum = 0.0;
  CellValues cv;
  for (int c = 0; c < old_state.mesh.num_cells(); ++c) {
    cv.reinit(old_state.mesh, c);
    const double rho = params.rho(old_state.mesh.region(c));
    for (int q = 0; q < cv.n_points(); ++q) {
      const Vec2 d = velocity_at(cv, q, vs, diff).value;
      sum += rho / (2.0 * dt) * dot(d, d) * cv.jxw(q);
    }
  }
  return sum;
}

namespace {

Vec2 nodal_velocity(const State& s, int node) {
  const FunctionSpace& vs = s.spaces->velocity;
  return {s.velocity[vs.node_dof(node, 0)], s.velocity[vs.node_dof(node, 1)]};
}

}  // namespace

double friction_power(const State& state, const PhysicalParams& params) {
  if (params.beta1 == 0.0 && params.beta2 == 0.0) return 0.0;
  double sum = 0.0;
  EdgeValues ev;
  for (const WallEdge& e : state.mesh.topology().wall_edges) {
    const double beta = params.beta(state.mesh.region(e.cell));
    const Vec2 ub = params.wall_velocity(e.tag);
    ev.reinit(state.mesh, e.nodes);
    std::array<Vec2, 3> un;
    for (int k = 0; k < 3; ++k) un[k] = nodal_velocity(state, e.nodes[k]);
    for (int q = 0; q < ev.n_points(); ++q) {
      Vec2 u{};
      for (int k = 0; k < 3; ++k) u += ev.shape(q, k) * un[k];
      sum += beta * dot(u - ub, u) * ev.dsigma(q);
    }
  }
  return sum;
}

double contact_power(const State& state, const PhysicalParams& params) {
  if (params.gamma == 0.0) return 0.0;
  double sum = 0.0;
  for (const ContactNode& c : state.mesh.topology().contacts) {
    sum += dot(contact_wall_tangent(state.mesh, c), nodal_velocity(state, c.node));
  }
  return params.gamma * std::cos(params.theta_s) * sum;
}

double gravity_spurious(const Mesh& mesh, const std::vector<double>& w, MotionDirection direction,
                        double dt, const PhysicalParams& params) {
  const int d = component(direction);
  double sum = 0.0;
  EdgeValues ev;
  for (const InterfaceEdge& e : mesh.topology().interface_edges) {
    ev.reinit(mesh, e.nodes);
    for (int q = 0; q < ev.n_points(); ++q) {
      double wq = 0.0;
      for (int k = 0; k < 3; ++k) wq += ev.shape(q, k) * w[e.nodes[k]];
      sum += wq * wq * ev.left_normal(q)[d] * ev.dsigma(q);
    }
  }
  return -0.5 * dt * params.delta_rho() * params.g * sum;
}

double surface_divergence(const Mesh& mesh, const std::vector<double>& w,
                          MotionDirection direction) {
  const int d = component(direction);
  double sum = 0.0;
  EdgeValues ev;
  for (const InterfaceEdge& e : mesh.topology().interface_edges) {
    ev.reinit(mesh, e.nodes);
    for (int q = 0; q < ev.n_points(); ++q) {
      double dw = 0.0;
      for (int k = 0; k < 3; ++k) dw += ev.shape_ds(q, k) * w[e.nodes[k]];
      sum += ev.unit_tangent(q)[d] * dw * ev.dsigma(q);
    }
  }
  return sum;
}

EnergyRecorder::EnergyRecorder(const State& initial, PhysicalParams params, SchemeConfig scheme)
    : params_(params), scheme_(scheme) {
  last_ = energy_terms(initial, params_);
  initial_.step = 0;
  initial_.time = initial.time;
  initial_.K = last_.K;
  initial_.W = last_.W;
  initial_.Pv = last_.Pv;
  initial_.sigma = last_.sigma;
  initial_.friction_power = friction_power(initial, params_);
  initial_.contact_power = contact_power(initial, params_);
}

std::vector<EnergyReport> EnergyRecorder::push(const State& before, const StepResult& result) {
  const double dt = scheme_.dt;
  const double gamma = params_.gamma;
  const EnergyTerms now = energy_terms(result.state, params_);
  const MeshVelocity& mv = result.mesh_velocity;
  std::vector<EnergyReport> out;

  EnergyReport r;
  r.step = ++steps_;
  r.time = result.state.time;
  r.K = now.K;
  r.W = now.W;
  r.Pv = now.Pv;
  r.sigma = now.sigma;
  r.euler = euler_dissipation(before, result.state, params_);
  r.friction_power = friction_power(result.state, params_);
  r.contact_power = contact_power(result.state, params_);

  if (scheme_.scheme == MotionScheme::M1) {
    if (pending_) {
      EnergyReport& p = pending_->report;
      p.balance = (p.K - pending_->K_prev) / dt + (now.W - p.W) / dt + p.Pv +
                  gamma * (now.sigma - p.sigma) / dt + p.friction_power + p.euler -
                  p.contact_power;
      p.eps_g = gravity_spurious(result.old_mesh, mv.w, mv.direction, dt, params_);
      p.eps_gamma = gamma / dt *
                    (now.sigma - p.sigma -
                     dt * surface_divergence(result.old_mesh, mv.w, mv.direction));
      out.push_back(p);
    }
    pending_ = Pending{r, last_.K};
  } else {
    r.balance = (now.K - last_.K) / dt + (now.W - last_.W) / dt + now.Pv +
                gamma * (now.sigma - last_.sigma) / dt + r.friction_power + r.euler -
                r.contact_power;
    r.eps_g = gravity_spurious(result.old_mesh, mv.w, mv.direction, dt, params_);
    r.eps_gamma = -gamma / dt *
                  (now.sigma - last_.sigma -
                   dt * surface_divergence(result.state.mesh, mv.w, mv.direction));
    out.push_back(r);
  }
  last_ = now;
  return out;
}

std::vector<EnergyReport> EnergyRecorder::finish() {
  std::vector<EnergyReport> out;
  if (pending_) out.push_back(pending_->report);
  pending_.reset();
  return out;
}

GclVolumeResult gcl_volume_check(const Mesh& mesh, const std::vector<Vec2>& w, double dt,
                                 const std::function<double(const Vec2&)>& phi, int region,
                                 int points_1d) {
  if (static_cast<int>(w.size()) != mesh.num_nodes()) {
    throw std::invalid_argument("mesh velocity does not match the mesh");
  }
  std::vector<Vec2> moved(mesh.nodes());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += dt * w[i];
  const Mesh next(mesh.shared_topology(), std::move(moved));
  CellValues co(points_1d);
  CellValues cn(points_1d);
  double i_new = 0.0, i_old = 0.0, r_old = 0.0, r_new = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (region != 0 && mesh.region(c) != region) continue;
    co.reinit(mesh, c);
    cn.reinit(next, c);
    const auto& cell = mesh.topology().cells[c];
    for (int q = 0; q < co.n_points(); ++q) {
      double div_y = 0.0, div_x = 0.0;
      for (int k = 0; k < 9; ++k) {
        div_y += dot(w[cell[k]], co.grad(q, k));
        div_x += dot(w[cell[k]], cn.grad(q, k));
      }
      const double f = phi(cn.point(q));
      i_new += f * cn.jxw(q);
      i_old += f * co.jxw(q);
      r_old += f * div_y * co.jxw(q);
      r_new += f * div_x * cn.jxw(q);
    }
  }
  GclVolumeResult res;
  res.dt = dt;
  res.lhs = i_new - i_old;
  res.rhs_old = dt * r_old;
  res.rhs_new = dt * r_new;
  res.residual_old = res.lhs - res.rhs_old;
  res.residual_new = res.lhs - res.rhs_new;
  return res;
}

namespace {

// (W(x + dt w) - W(x)) / dt pulled back to the old mesh. The map is linear in
// the node positions, so y' det J' - y det J = dt det J (w + y dw/dy + dt w dw/dy)
// exactly and no large potentials are subtracted.
double potential_rate(const Mesh& mesh, const std::vector<double>& w, double dt,
                      const PhysicalParams& p) {
  CellValues cv;
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    cv.reinit(mesh, c);
    const auto& nodes = mesh.topology().cells[c];
    const double rho = p.rho(mesh.region(c));
    for (int q = 0; q < cv.n_points(); ++q) {
      double wq = 0.0, wy = 0.0;
      for (int k = 0; k < 9; ++k) {
        wq += cv.shape(q, k) * w[nodes[k]];
        wy += cv.grad(q, k).y * w[nodes[k]];
      }
      sum += rho * p.g * (wq + cv.point(q).y * wy + dt * wq * wy) * cv.jxw(q);
    }
  }
  return sum;
}

std::pair<double, double> interface_gravity_terms(const Mesh& mesh, const std::vector<double>& w,
                                                  const PhysicalParams& p) {
  double flux = 0.0, quad = 0.0;
  EdgeValues ev;
  for (const InterfaceEdge& e : mesh.topology().interface_edges) {
    ev.reinit(mesh, e.nodes);
    for (int q = 0; q < ev.n_points(); ++q) {
      double wq = 0.0;
      for (int k = 0; k < 3; ++k) wq += ev.shape(q, k) * w[e.nodes[k]];
      const double n2 = ev.left_normal(q).y * ev.dsigma(q);
      flux += ev.point(q).y * wq * n2;
      quad += wq * wq * n2;
    }
  }
  const double c = p.delta_rho() * p.g;
  return {c * flux, c * quad};
}

}  // namespace

GclGravityResult gcl_gravity_check(const Mesh& mesh, const std::vector<double>& w, double dt,
                                   const PhysicalParams& params) {
  const Mesh next =
      apply_motion(mesh, MotionMap::single_component(w, MotionDirection::Vertical, dt));
  GclGravityResult r;
  r.dt = dt;
  r.dW = potential_rate(mesh, w, dt, params);
  const auto [fo, qo] = interface_gravity_terms(mesh, w, params);
  const auto [fn, qn] = interface_gravity_terms(next, w, params);
  r.flux_old = fo;
  r.flux_new = fn;
  r.quad_old = 0.5 * dt * qo;
  r.quad_new = 0.5 * dt * qn;
  r.residual_old = r.flux_old + r.dW + r.quad_old;
  r.residual_new = r.flux_new + r.dW - r.quad_new;
  r.scale = std::max({std::abs(r.flux_old), std::abs(r.flux_new), std::abs(r.dW),
                      std::abs(r.quad_old), std::abs(r.quad_new)});
  return r;
}

GclSurfaceResult gcl_surface_gap(const Mesh& mesh, const std::vector<double>& w,
                                 MotionDirection direction, double dt,
                                 const std::function<double(const Vec2&)>& phi) {
  const Mesh next = apply_motion(mesh, MotionMap::single_component(w, direction, dt));
  const int d = component(direction);
  GclSurfaceResult r;
  r.dt = dt;
  r.min_factor = std::numeric_limits<double>::infinity();
  EdgeValues eo, en;
  for (const InterfaceEdge& e : mesh.topology().interface_edges) {
    eo.reinit(mesh, e.nodes);
    en.reinit(next, e.nodes);
    for (int q = 0; q < eo.n_points(); ++q) {
      double dw_old = 0.0, dw_new = 0.0;
      for (int k = 0; k < 3; ++k) {
        dw_old += eo.shape_ds(q, k) * w[e.nodes[k]];
        dw_new += en.shape_ds(q, k) * w[e.nodes[k]];
      }
      const double tr_old = eo.unit_tangent(q)[d] * dw_old;
      const double tr_new = en.unit_tangent(q)[d] * dw_new;
      r.min_factor = std::min({r.min_factor, 1.0 + dt * tr_old, 1.0 - dt * tr_new});
      const double f = phi(en.point(q));
      const double stretch = f * (en.dsigma(q) - eo.dsigma(q));
      r.gap_old += stretch - dt * f * tr_old * eo.dsigma(q);
      r.gap_new += stretch - dt * f * tr_new * en.dsigma(q);
    }
  }
  if (r.min_factor < 0.0) {
    throw HypothesisError("time step too large for the surface GCL bound (min 1 +/- dt tr = " +
                              std::to_string(r.min_factor) + ")",
                          r.min_factor);
  }
  return r;
}

BalanceSummary summarize_balance(const std::vector<EnergyReport>& reports, double dt, double t0,
                                 double t1) {
  BalanceSummary s;
  for (const EnergyReport& r : reports) {
    if (!(r.time > t0 && r.time <= t1) || !std::isfinite(r.balance)) continue;
    if (s.count == 0) {
      s.min_balance = s.max_balance = r.balance;
    } else {
      s.min_balance = std::min(s.min_balance, r.balance);
      s.max_balance = std::max(s.max_balance, r.balance);
    }
    s.integral += dt * r.balance;
    s.integral_abs += dt * std::abs(r.balance);
    ++s.count;
  }
  return s;
}

}  // namespace ale2fluid
