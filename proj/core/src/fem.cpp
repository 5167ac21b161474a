#include "ale2fluid/fem.hpp"

#include <algorithm>
#include <cmath>

namespace ale2fluid {

int FunctionSpace::merged_count() const {
  if (merged_node.empty()) return 0;
  return *std::max_element(merged_node.begin(), merged_node.end()) + 1;
}

void FunctionSpace::renumber_free() {
  free_index.assign(dof_count, -1);
  free_count = 0;
  for (int i = 0; i < dof_count; ++i) {
    if (!constrained[i]) free_index[i] = free_count++;
  }
}

FunctionSpace FunctionSpace::with_constraints(const std::vector<int>& dofs) const {
  FunctionSpace s = *this;
  for (int d : dofs) s.constrained.at(d) = 1;
  s.renumber_free();
  return s;
}

namespace {

FunctionSpace q2_space(const Mesh& mesh, SpaceKind kind) {
  const auto& topo = mesh.topology();
  FunctionSpace s;
  s.kind = kind;
  s.topology = mesh.shared_topology();
  const int comps = kind == SpaceKind::VelocityQ2 ? 2 : 1;
  s.merged_node.assign(topo.num_nodes(), -1);
  int next = 0;
  for (int n = 0; n < topo.num_nodes(); ++n) {
    if (topo.periodic_image[n] == n) s.merged_node[n] = next++;
  }
  for (int n = 0; n < topo.num_nodes(); ++n) {
    if (topo.periodic_image[n] != n) s.merged_node[n] = s.merged_node[topo.periodic_image[n]];
  }
  s.dof_count = comps * next;
  s.local_size = 9 * comps;
  s.dof_map.resize(static_cast<std::size_t>(topo.num_cells()) * s.local_size);
  for (int c = 0; c < topo.num_cells(); ++c) {
    for (int k = 0; k < 9; ++k) {
      for (int d = 0; d < comps; ++d) {
        s.dof_map[c * s.local_size + comps * k + d] = comps * s.merged_node[topo.cells[c][k]] + d;
      }
    }
  }
  s.constrained.assign(s.dof_count, 0);
  s.renumber_free();
  return s;
}

}  // namespace

Spaces build_spaces(const Mesh& mesh, bool periodic) {
  if (periodic != mesh.topology().is_periodic()) {
    throw AssemblyError(periodic ? "periodic spaces requested on a mesh without periodic pairs"
                                 : "mesh is periodic but non-periodic spaces were requested");
  }
  return build_spaces(mesh);
}

Spaces build_spaces(const Mesh& mesh) {
  const auto& topo = mesh.topology();
  Spaces sp;
  sp.velocity = q2_space(mesh, SpaceKind::VelocityQ2);
  for (const WallEdge& e : topo.wall_edges) {
    const int comp = (e.tag == WallTag::Bottom || e.tag == WallTag::Top) ? 1 : 0;
    for (int n : e.nodes) sp.velocity.constrained[sp.velocity.node_dof(n, comp)] = 1;
  }
  sp.velocity.renumber_free();

  FunctionSpace& p = sp.pressure;
  p.kind = SpaceKind::PressureP1Disc;
  p.topology = mesh.shared_topology();
  p.local_size = 3;
  p.dof_count = 3 * topo.num_cells();
  p.dof_map.resize(p.dof_count);
  for (int i = 0; i < p.dof_count; ++i) p.dof_map[i] = i;
  p.constrained.assign(p.dof_count, 0);
  p.zero_mean = true;
  p.renumber_free();
  return sp;
}

FunctionSpace build_scalar_space(const Mesh& mesh) { return q2_space(mesh, SpaceKind::ScalarQ2); }

PressureFrame pressure_frame(const Mesh& mesh, int cell) {
  const auto x = mesh.cell_nodes(cell);
  double xmin = x[0].x, xmax = x[0].x, ymin = x[0].y, ymax = x[0].y;
  for (const Vec2& p : x) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return {x[4], 0.5 * std::max(xmax - xmin, ymax - ymin)};
}

FieldSample evaluate_field(const FunctionSpace& space, const Mesh& mesh,
                           const std::vector<double>& coeffs, int cell, const Vec2& ref) {
  const Q2Shape s = q2_shape(ref);
  const auto xn = mesh.cell_nodes(cell);
  Vec2 x{};
  Vec2 dxs{};
  Vec2 dxt{};
  for (int k = 0; k < 9; ++k) {
    x += s.value[k] * xn[k];
    dxs += s.grad_ref[k].x * xn[k];
    dxt += s.grad_ref[k].y * xn[k];
  }
  FieldSample out;
  if (space.kind == SpaceKind::PressureP1Disc) {
    const PressureFrame f = pressure_frame(mesh, cell);
    const auto b = f.basis(x);
    const int* d = space.cell_dofs(cell);
    for (int k = 0; k < 3; ++k) out.value.x += b[k] * coeffs[d[k]];
    out.grad(0, 0) = coeffs[d[1]] / f.scale;
    out.grad(0, 1) = coeffs[d[2]] / f.scale;
    return out;
  }
  const double det = dxs.x * dxt.y - dxt.x * dxs.y;
  const int comps = space.components();
  const int* d = space.cell_dofs(cell);
  for (int k = 0; k < 9; ++k) {
    const Vec2& g = s.grad_ref[k];
    const Vec2 grad{(dxt.y * g.x - dxs.y * g.y) / det, (-dxt.x * g.x + dxs.x * g.y) / det};
    for (int c = 0; c < comps; ++c) {
      const double a = coeffs[d[comps * k + c]];
      out.value[c] += s.value[k] * a;
      out.grad(c, 0) += grad.x * a;
      out.grad(c, 1) += grad.y * a;
    }
  }
  return out;
}

FieldSample velocity_at(const CellValues& cv, int q, const FunctionSpace& space,
                        const std::vector<double>& coeffs) {
  FieldSample out;
  const int* d = space.cell_dofs(cv.cell());
  for (int k = 0; k < 9; ++k) {
    const double phi = cv.shape(q, k);
    const Vec2& g = cv.grad(q, k);
    for (int c = 0; c < 2; ++c) {
      const double a = coeffs[d[2 * k + c]];
      out.value[c] += phi * a;
      out.grad(c, 0) += g.x * a;
      out.grad(c, 1) += g.y * a;
    }
  }
  return out;
}

double scalar_at(const CellValues& cv, int q, const FunctionSpace& space,
                 const std::vector<double>& coeffs, Vec2* grad) {
  const int* d = space.cell_dofs(cv.cell());
  double v = 0.0;
  Vec2 g{};
  for (int k = 0; k < 9; ++k) {
    v += cv.shape(q, k) * coeffs[d[k]];
    g += coeffs[d[k]] * cv.grad(q, k);
  }
  if (grad) *grad = g;
  return v;
}

State State::zero(const Mesh& mesh, std::shared_ptr<const Spaces> spaces, double time) {
  State s;
  s.velocity.assign(spaces->velocity.dof_count, 0.0);
  s.pressure.assign(spaces->pressure.dof_count, 0.0);
  s.spaces = std::move(spaces);
  s.mesh = mesh;
  s.time = time;
  return s;
}

void State::check() const {
  if (!spaces) throw AssemblyError("state without spaces");
  if (spaces->velocity.topology != mesh.shared_topology()) {
    throw AssemblyError("state mesh does not match its spaces");
  }
  if (static_cast<int>(velocity.size()) != spaces->velocity.dof_count ||
      static_cast<int>(pressure.size()) != spaces->pressure.dof_count) {
    throw AssemblyError("state coefficient vectors do not match their spaces");
  }
  for (int i = 0; i < spaces->velocity.dof_count; ++i) {
    if (spaces->velocity.constrained[i] && velocity[i] != 0.0) {
      throw AssemblyError("state violates a wall constraint");
    }
  }
}

namespace {

bool is_q2(const FunctionSpace& s) { return s.kind != SpaceKind::PressureP1Disc; }

std::vector<int> edge_dofs(const FunctionSpace& s, const std::array<int, 3>& nodes) {
  const int comps = s.components();
  std::vector<int> d(3 * comps);
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < comps; ++c) d[comps * k + c] = s.node_dof(nodes[k], c);
  }
  return d;
}

bool wall_selected(const std::vector<WallTag>& tags, WallTag t) {
  return tags.empty() || std::find(tags.begin(), tags.end(), t) != tags.end();
}

void check_tags(const Mesh& mesh, const std::vector<WallTag>& tags) {
  for (WallTag t : tags) {
    if (!mesh.topology().has_wall(t)) {
      throw AssemblyError("form references missing wall tag '" + to_string(t) + "'");
    }
  }
}

template <class Fn>
void for_each_edge_term(const Mesh& mesh, bool interface, const std::vector<WallTag>* tags,
                        EdgeValues& ev, Fn&& fn) {
  const auto& topo = mesh.topology();
  if (interface) {
    for (int i = 0; i < static_cast<int>(topo.interface_edges.size()); ++i) {
      const auto& e = topo.interface_edges[i];
      ev.reinit(mesh, e.nodes);
      fn(EdgeContext{ev, e.nodes, e.fluid1_cell, std::nullopt, i});
    }
    return;
  }
  for (int i = 0; i < static_cast<int>(topo.wall_edges.size()); ++i) {
    const auto& e = topo.wall_edges[i];
    if (!wall_selected(*tags, e.tag)) continue;
    ev.reinit(mesh, e.nodes);
    fn(EdgeContext{ev, e.nodes, e.cell, e.tag, i});
  }
}

}  // namespace

std::vector<Triplet> assemble_triplets(const BilinearForm& form, const Mesh& mesh, int points_1d) {
  if (!form.test || !form.trial) throw AssemblyError("bilinear form without spaces");
  const FunctionSpace& ts = *form.test;
  const FunctionSpace& us = *form.trial;
  if (ts.topology != mesh.shared_topology() || us.topology != mesh.shared_topology()) {
    throw AssemblyError("form spaces were built on a different mesh topology");
  }
  for (const auto& w : form.wall) check_tags(mesh, w.tags);
  std::vector<Triplet> out;
  if (!form.volume.empty()) {
    out.reserve(static_cast<std::size_t>(mesh.num_cells()) * ts.local_size * us.local_size);
    CellValues cv(points_1d);
    LocalMatrix local(ts.local_size, us.local_size);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      cv.reinit(mesh, c);
      local.setZero();
      for (const auto& k : form.volume) k(cv, local);
      const int* rd = ts.cell_dofs(c);
      const int* cd = us.cell_dofs(c);
      for (int i = 0; i < ts.local_size; ++i) {
        for (int j = 0; j < us.local_size; ++j) {
          if (local(i, j) != 0.0) out.push_back({rd[i], cd[j], local(i, j)});
        }
      }
    }
  }
  if ((!form.interface.empty() || !form.wall.empty()) && !(is_q2(ts) && is_q2(us))) {
    throw AssemblyError("edge terms need Q2 spaces");
  }
  EdgeValues ev(points_1d);
  auto scatter_edges = [&](bool interface, const std::vector<WallTag>* tags,
                           const EdgeMatrixKernel& kernel) {
    for_each_edge_term(mesh, interface, tags, ev, [&](const EdgeContext& ctx) {
      const auto rd = edge_dofs(ts, ctx.nodes);
      const auto cd = edge_dofs(us, ctx.nodes);
      LocalMatrix local = LocalMatrix::Zero(rd.size(), cd.size());
      kernel(ctx, local);
      for (std::size_t i = 0; i < rd.size(); ++i) {
        for (std::size_t j = 0; j < cd.size(); ++j) {
          if (local(i, j) != 0.0) out.push_back({rd[i], cd[j], local(i, j)});
        }
      }
    });
  };
  for (const auto& k : form.interface) scatter_edges(true, nullptr, k);
  for (const auto& w : form.wall) scatter_edges(false, &w.tags, w.kernel);
  return out;
}

CsrMatrix assemble_full(const BilinearForm& form, const Mesh& mesh) {
  return CsrMatrix::from_triplets(form.test->dof_count, form.trial->dof_count,
                                  assemble_triplets(form, mesh));
}

void append_free(const std::vector<Triplet>& full, const FunctionSpace& test,
                 const FunctionSpace& trial, int row_offset, int col_offset,
                 std::vector<Triplet>& out) {
  for (const Triplet& t : full) {
    const int r = test.free_index[t.row];
    const int c = trial.free_index[t.col];
    if (r >= 0 && c >= 0) out.push_back({r + row_offset, c + col_offset, t.value});
  }
}

CsrMatrix assemble(const BilinearForm& form, const Mesh& mesh) {
  std::vector<Triplet> t;
  append_free(assemble_triplets(form, mesh), *form.test, *form.trial, 0, 0, t);
  return CsrMatrix::from_triplets(form.test->free_count, form.trial->free_count, std::move(t));
}

std::vector<double> assemble_full(const LinearForm& form, const Mesh& mesh, int points_1d) {
  if (!form.test) throw AssemblyError("linear form without a space");
  const FunctionSpace& ts = *form.test;
  if (ts.topology != mesh.shared_topology()) {
    throw AssemblyError("form space was built on a different mesh topology");
  }
  for (const auto& w : form.wall) check_tags(mesh, w.tags);
  std::vector<double> out(ts.dof_count, 0.0);
  if (!form.volume.empty()) {
    CellValues cv(points_1d);
    LocalVector local(ts.local_size);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      cv.reinit(mesh, c);
      local.setZero();
      for (const auto& k : form.volume) k(cv, local);
      const int* d = ts.cell_dofs(c);
      for (int i = 0; i < ts.local_size; ++i) out[d[i]] += local[i];
    }
  }
  if ((!form.interface.empty() || !form.wall.empty() || !form.contact.empty()) && !is_q2(ts)) {
    throw AssemblyError("edge and contact terms need a Q2 space");
  }
  EdgeValues ev(points_1d);
  auto scatter_edges = [&](bool interface, const std::vector<WallTag>* tags,
                           const EdgeVectorKernel& kernel) {
    for_each_edge_term(mesh, interface, tags, ev, [&](const EdgeContext& ctx) {
      const auto d = edge_dofs(ts, ctx.nodes);
      LocalVector local = LocalVector::Zero(d.size());
      kernel(ctx, local);
      for (std::size_t i = 0; i < d.size(); ++i) out[d[i]] += local[i];
    });
  };
  for (const auto& k : form.interface) scatter_edges(true, nullptr, k);
  for (const auto& w : form.wall) scatter_edges(false, &w.tags, w.kernel);
  for (const auto& k : form.contact) {
    for (const ContactNode& cn : mesh.topology().contacts) {
      const Vec2 f = k(cn);
      for (int c = 0; c < ts.components(); ++c) out[ts.node_dof(cn.node, c)] += f[c];
    }
  }
  return out;
}

std::vector<double> assemble(const LinearForm& form, const Mesh& mesh) {
  return restrict_to_free(*form.test, assemble_full(form, mesh));
}

std::vector<double> restrict_to_free(const FunctionSpace& space, const std::vector<double>& full) {
  std::vector<double> out(space.free_count);
  for (int i = 0; i < space.dof_count; ++i) {
    if (space.free_index[i] >= 0) out[space.free_index[i]] = full[i];
  }
  return out;
}

std::vector<double> expand_from_free(const FunctionSpace& space, const std::vector<double>& free,
                                     const std::vector<double>& constrained_values) {
  std::vector<double> out(space.dof_count, 0.0);
  for (int i = 0; i < space.dof_count; ++i) {
    if (space.free_index[i] >= 0) {
      out[i] = free[space.free_index[i]];
    } else if (!constrained_values.empty()) {
      out[i] = constrained_values[i];
    }
  }
  return out;
}

LiftedSystem assemble_lifted(const BilinearForm& a, const LinearForm& l, const Mesh& mesh,
                             const std::vector<double>& constrained_values) {
  const FunctionSpace& s = *a.test;
  if (a.trial != a.test || l.test != a.test) throw AssemblyError("lifting needs one space");
  if (static_cast<int>(constrained_values.size()) != s.dof_count) {
    throw AssemblyError("constrained values must cover every dof");
  }
  const auto full = assemble_triplets(a, mesh);
  LiftedSystem sys;
  sys.rhs = assemble(l, mesh);
  std::vector<Triplet> t;
  t.reserve(full.size());
  for (const Triplet& e : full) {
    const int r = s.free_index[e.row];
    if (r < 0) continue;
    const int c = s.free_index[e.col];
    if (c >= 0) {
      t.push_back({r, c, e.value});
    } else {
      sys.rhs[r] -= e.value * constrained_values[e.col];
    }
  }
  sys.matrix = CsrMatrix::from_triplets(s.free_count, s.free_count, std::move(t));
  return sys;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

BilinearForm mass_form(const FunctionSpace& space, std::vector<double> coefficient) {
  BilinearForm f;
  f.test = f.trial = &space;
  if (space.kind == SpaceKind::PressureP1Disc) {
    f.volume.push_back([coef = std::move(coefficient)](const CellValues& cv, LocalMatrix& m) {
      const PressureFrame fr = pressure_frame(cv.mesh(), cv.cell());
      const double c = coef[cv.cell()];
      for (int q = 0; q < cv.n_points(); ++q) {
        const auto b = fr.basis(cv.point(q));
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) m(i, j) += c * b[i] * b[j] * cv.jxw(q);
        }
      }
    });
    return f;
  }
  const int comps = space.components();
  f.volume.push_back([comps, coef = std::move(coefficient)](const CellValues& cv, LocalMatrix& m) {
    const double c = coef[cv.cell()];
    for (int q = 0; q < cv.n_points(); ++q) {
      for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) {
          const double v = c * cv.shape(q, a) * cv.shape(q, b) * cv.jxw(q);
          for (int d = 0; d < comps; ++d) m(comps * a + d, comps * b + d) += v;
        }
      }
    }
  });
  return f;
}

BilinearForm viscous_form(const FunctionSpace& velocity, std::vector<double> eta) {
  BilinearForm f;
  f.test = f.trial = &velocity;
  f.volume.push_back([eta = std::move(eta)](const CellValues& cv, LocalMatrix& m) {
    const double e = eta[cv.cell()];
    for (int q = 0; q < cv.n_points(); ++q) {
      const double w = e * cv.jxw(q);
      for (int a = 0; a < 9; ++a) {
        const Vec2& ga = cv.grad(q, a);
        for (int b = 0; b < 9; ++b) {
          const Vec2& gb = cv.grad(q, b);
          const double gg = dot(ga, gb);
          // eta/2 (grad u + grad u^T) : (grad v + grad v^T)
          for (int i = 0; i < 2; ++i) {
            m(2 * a + i, 2 * b + i) += w * gg;
            for (int j = 0; j < 2; ++j) m(2 * a + i, 2 * b + j) += w * ga[j] * gb[i];
          }
        }
      }
    }
  });
  return f;
}

BilinearForm divergence_form(const FunctionSpace& pressure, const FunctionSpace& velocity) {
  BilinearForm f;
  f.test = &pressure;
  f.trial = &velocity;
  f.volume.push_back([](const CellValues& cv, LocalMatrix& m) {
    const PressureFrame fr = pressure_frame(cv.mesh(), cv.cell());
    for (int q = 0; q < cv.n_points(); ++q) {
      const auto b = fr.basis(cv.point(q));
      for (int i = 0; i < 3; ++i) {
        const double w = -b[i] * cv.jxw(q);
        for (int k = 0; k < 9; ++k) {
          m(i, 2 * k) += w * cv.grad(q, k).x;
          m(i, 2 * k + 1) += w * cv.grad(q, k).y;
        }
      }
    }
  });
  return f;
}

BilinearForm laplace_form(const FunctionSpace& scalar) {
  BilinearForm f;
  f.test = f.trial = &scalar;
  f.volume.push_back([](const CellValues& cv, LocalMatrix& m) {
    for (int q = 0; q < cv.n_points(); ++q) {
      for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) m(a, b) += dot(cv.grad(q, a), cv.grad(q, b)) * cv.jxw(q);
      }
    }
  });
  return f;
}

std::vector<double> per_region(const Mesh& mesh, double value1, double value2) {
  std::vector<double> v(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) v[c] = mesh.region(c) == 1 ? value1 : value2;
  return v;
}

std::vector<double> interpolate_velocity(const FunctionSpace& space, const Mesh& mesh,
                                         const std::function<Vec2(const Vec2&)>& f,
                                         bool respect_constraints) {
  std::vector<double> out(space.dof_count, 0.0);
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.topology().periodic_image[n] != n) continue;
    const Vec2 v = f(mesh.node(n));
    for (int c = 0; c < 2; ++c) {
      const int d = space.node_dof(n, c);
      out[d] = (respect_constraints && space.constrained[d]) ? 0.0 : v[c];
    }
  }
  return out;
}

std::vector<double> interpolate_scalar(const FunctionSpace& space, const Mesh& mesh,
                                       const std::function<double(const Vec2&)>& f) {
  std::vector<double> out(space.dof_count, 0.0);
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.topology().periodic_image[n] == n) out[space.node_dof(n)] = f(mesh.node(n));
  }
  return out;
}

}  // namespace ale2fluid
