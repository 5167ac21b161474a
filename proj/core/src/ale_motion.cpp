#include "ale2fluid/ale_motion.hpp"

#include <cmath>
#include <string>

namespace ale2fluid {

int NodalNormals::index_of(const MeshTopology& topo, int node) const {
  const int rep = topo.periodic_image[node];
  for (int i = 0; i < size(); ++i) {
    if (nodes[i] == rep) return i;
  }
  return -1;
}

NodalNormals discrete_normals(const Mesh& mesh) {
  const auto& topo = mesh.topology();
  if (topo.interface_edges.empty()) throw MeshError("mesh has no interface");
  NodalNormals out;
  std::vector<int> slot(mesh.num_nodes(), -1);
  for (int n : topo.interface_nodes()) {
    const int rep = topo.periodic_image[n];
    if (slot[rep] < 0) {
      slot[rep] = out.size();
      out.nodes.push_back(rep);
    }
  }
  out.weighted.assign(out.size(), Vec2{});
  EdgeValues ev;
  for (const auto& e : topo.interface_edges) {
    ev.reinit(mesh, e.nodes);
    for (int q = 0; q < ev.n_points(); ++q) {
      const Vec2 n = ev.left_normal(q);
      for (int k = 0; k < 3; ++k) {
        out.weighted[slot[topo.periodic_image[e.nodes[k]]]] += (ev.shape(q, k) * ev.dsigma(q)) * n;
      }
    }
  }
  out.unit.resize(out.size());
  for (int i = 0; i < out.size(); ++i) {
    const double len = norm(out.weighted[i]);
    if (!(len > 0.0)) {
      throw MeshError("degenerate interface: zero weighted normal at node " +
                      std::to_string(out.nodes[i]));
    }
    out.unit[i] = (1.0 / len) * out.weighted[i];
  }
  return out;
}

SteepInterfaceError::SteepInterfaceError(int node, double component)
    : std::runtime_error("interface too steep for motion direction at node " +
                         std::to_string(node) + " (normal component " + std::to_string(component) +
                         ")"),
      node_(node) {}

std::vector<double> kinematic_trace(const NodalNormals& normals, const std::vector<Vec2>& u,
                                    MotionDirection direction, double n_min) {
  if (static_cast<int>(u.size()) != normals.size()) {
    throw std::invalid_argument("velocity values do not match interface nodes");
  }
  const int d = component(direction);
  std::vector<double> trace(normals.size());
  for (int i = 0; i < normals.size(); ++i) {
    const Vec2& n = normals.unit[i];
    if (std::abs(n[d]) < n_min) throw SteepInterfaceError(normals.nodes[i], n[d]);
    trace[i] = dot(u[i], n) / n[d];
  }
  return trace;
}

std::vector<Vec2> interface_values(const FunctionSpace& velocity, const std::vector<double>& coeffs,
                                   const NodalNormals& normals) {
  std::vector<Vec2> out(normals.size());
  for (int i = 0; i < normals.size(); ++i) {
    out[i] = {coeffs[velocity.node_dof(normals.nodes[i], 0)],
              coeffs[velocity.node_dof(normals.nodes[i], 1)]};
  }
  return out;
}

ExtrapolatedTrace extrapolated_trace(const NodalNormals& normals, const std::vector<Vec2>& u_n,
                                     const std::vector<Vec2>* u_prev, MotionDirection direction,
                                     double n_min) {
  ExtrapolatedTrace out;
  if (!u_prev) {
    out.fell_back = true;
    out.trace = kinematic_trace(normals, u_n, direction, n_min);
    return out;
  }
  if (u_prev->size() != u_n.size()) {
    throw std::invalid_argument("previous velocity does not match interface nodes");
  }
  std::vector<Vec2> u(u_n.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 2.0 * u_n[i] - (*u_prev)[i];
  out.trace = kinematic_trace(normals, u, direction, n_min);
  return out;
}

std::vector<double> node_field_to_coeffs(const FunctionSpace& space, const std::vector<double>& w) {
  std::vector<double> c(space.dof_count, 0.0);
  for (std::size_t n = 0; n < w.size(); ++n) c[space.node_dof(static_cast<int>(n))] = w[n];
  return c;
}

MeshVelocity solve_mesh_velocity(const Mesh& mesh, const std::vector<int>& interface_nodes,
                                 const std::vector<double>& trace, MotionDirection direction) {
  if (interface_nodes.size() != trace.size()) {
    throw std::invalid_argument("trace does not match interface nodes");
  }
  const auto& topo = mesh.topology();
  const FunctionSpace base = build_scalar_space(mesh);
  std::vector<double> values(base.dof_count, 0.0);
  std::vector<char> fixed(base.dof_count, 0);
  std::vector<int> dofs;
  for (const WallEdge& e : topo.wall_edges) {
    if (component(direction) != ((e.tag == WallTag::Bottom || e.tag == WallTag::Top) ? 1 : 0)) {
      continue;
    }
    for (int n : e.nodes) {
      const int d = base.node_dof(n);
      fixed[d] = 1;
      dofs.push_back(d);
    }
  }
  for (std::size_t i = 0; i < interface_nodes.size(); ++i) {
    const int d = base.node_dof(interface_nodes[i]);
    if (fixed[d] && trace[i] != 0.0) {
      throw MeshError("interface node " + std::to_string(interface_nodes[i]) +
                      " lies on a wall that cannot move");
    }
    values[d] = trace[i];
    dofs.push_back(d);
  }
  const FunctionSpace space = base.with_constraints(dofs);
  MeshVelocity mv;
  mv.direction = direction;
  mv.interface_nodes = interface_nodes;
  mv.trace = trace;
  std::vector<double> coeffs;
  if (space.free_count > 0) {
    LinearForm zero;
    zero.test = &space;
    const LiftedSystem sys = assemble_lifted(laplace_form(space), zero, mesh, values);
    coeffs = expand_from_free(space, solve_direct(sys.matrix, sys.rhs), values);
  } else {
    coeffs = values;
  }
  mv.w.resize(mesh.num_nodes());
  for (int n = 0; n < mesh.num_nodes(); ++n) mv.w[n] = coeffs[space.node_dof(n)];
  return mv;
}

}  // namespace ale2fluid
