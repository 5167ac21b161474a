#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "ale2fluid/fem.hpp"
#include "ale2fluid/mesh.hpp"

namespace ale2fluid {

/// Nodal interface normals N_i = int_Sigma phi_i n dsigma with n the elementwise
/// geometric normal pointing out of fluid 1. Periodic seam nodes are merged
/// and listed once, by their representative node.
struct NodalNormals {
  std::vector<int> nodes;
  std::vector<Vec2> weighted;
  std::vector<Vec2> unit;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Position in `nodes` of a mesh node (or its periodic partner), -1 if absent.
  int index_of(const MeshTopology& topo, int node) const;
};

NodalNormals discrete_normals(const Mesh& mesh);

class SteepInterfaceError : public std::runtime_error {
 public:
  SteepInterfaceError(int node, double component);
  int node() const { return node_; }

 private:
  int node_;
};

inline constexpr double kDefaultNormalThreshold = 0.1;

/// trace_i = (u_i . n_i) / (n_i . e_dir).
std::vector<double> kinematic_trace(const NodalNormals& normals, const std::vector<Vec2>& u,
                                    MotionDirection direction,
                                    double n_min = kDefaultNormalThreshold);

/// Nodal velocity values at the interface nodes listed in `normals`.
std::vector<Vec2> interface_values(const FunctionSpace& velocity, const std::vector<double>& coeffs,
                                   const NodalNormals& normals);

struct ExtrapolatedTrace {
  std::vector<double> trace;
  bool fell_back = false;  // no previous velocity: plain kinematic trace
};

/// Trace of 2 u^n - u^{n-1} at the interface nodes.
ExtrapolatedTrace extrapolated_trace(const NodalNormals& normals, const std::vector<Vec2>& u_n,
                                     const std::vector<Vec2>* u_prev, MotionDirection direction,
                                     double n_min = kDefaultNormalThreshold);

/// Scalar mesh-velocity field (the component along the motion direction),
/// one value per mesh node.
struct MeshVelocity {
  MotionDirection direction = MotionDirection::Vertical;
  std::vector<double> w;
  std::vector<int> interface_nodes;
  std::vector<double> trace;

  MotionMap motion(double dt) const { return MotionMap::single_component(w, direction, dt); }
  Vec2 at_node(int node) const { return w[node] * unit_vector(direction); }
};

/// Harmonic extension of the trace: Laplace problem on the whole mesh with
/// Dirichlet data on the interface, w = 0 on walls normal to the motion and
/// natural conditions on walls parallel to it.
MeshVelocity solve_mesh_velocity(const Mesh& mesh, const std::vector<int>& interface_nodes,
                                 const std::vector<double>& trace, MotionDirection direction);

/// Values of a scalar per-node field as a Q2 coefficient vector of `space`.
std::vector<double> node_field_to_coeffs(const FunctionSpace& space, const std::vector<double>& w);

}  // namespace ale2fluid
