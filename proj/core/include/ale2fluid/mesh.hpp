#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ale2fluid/geometry.hpp"

namespace ale2fluid {

enum class WallTag { Bottom = 0, Right = 1, Top = 2, Left = 3 };

std::string to_string(WallTag tag);

/// Outward unit normal of an axis-aligned wall.
Vec2 wall_normal(WallTag tag);

/// Curved quadratic edge on the interface. Nodes are ordered along the chain,
/// which is oriented with fluid 1 on its right, so the left normal of the
/// tangent points out of fluid 1.
struct InterfaceEdge {
  std::array<int, 3> nodes{};
  int fluid1_cell = -1;
  int fluid2_cell = -1;
  int chain = -1;
};

struct WallEdge {
  std::array<int, 3> nodes{};
  int cell = -1;
  WallTag tag = WallTag::Bottom;
};

/// Interface node lying on the wall; `chain_end` is true for the last node of
/// its chain and false for the first.
struct ContactNode {
  int node = -1;
  WallTag wall = WallTag::Bottom;
  int chain = -1;
  bool chain_end = false;
};

struct PeriodicPair {
  int left = -1;
  int right = -1;
};

/// Connectivity shared by every snapshot of a moving mesh. Cells are 9-node
/// biquadratic patches stored lexicographically: local node (a, b), a, b in
/// {0, 1, 2}, sits at index 3 * b + a (a along x, b along y).
struct MeshTopology {
  int nodes_x = 0;
  int nodes_y = 0;
  MotionDirection direction = MotionDirection::Vertical;
  std::vector<std::array<int, 9>> cells;
  std::vector<int> cell_region;
  std::vector<InterfaceEdge> interface_edges;  // grouped by chain, in chain order
  std::vector<std::pair<int, int>> chain_ranges;  // [begin, end) into interface_edges
  std::vector<bool> chain_closed;
  std::vector<WallEdge> wall_edges;
  std::vector<ContactNode> contacts;
  std::vector<PeriodicPair> periodic_pairs;
  std::vector<int> periodic_image;  // node -> representative node
  Vec2 period{};

  int num_nodes() const { return nodes_x * nodes_y; }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_chains() const { return static_cast<int>(chain_ranges.size()); }
  bool is_periodic() const { return !periodic_pairs.empty(); }
  bool has_wall(WallTag tag) const;
  /// Mesh nodes on the interface in chain order. A periodic chain lists both
  /// seam nodes.
  std::vector<int> interface_nodes() const;
};

class Mesh {
 public:
  Mesh() = default;
  Mesh(std::shared_ptr<const MeshTopology> topology, std::vector<Vec2> nodes);

  const MeshTopology& topology() const { return *topology_; }
  const std::shared_ptr<const MeshTopology>& shared_topology() const { return topology_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const Vec2& node(int i) const { return nodes_[i]; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_cells() const { return topology_->num_cells(); }
  int region(int cell) const { return topology_->cell_region[cell]; }
  std::array<Vec2, 9> cell_nodes(int cell) const;
  bool same_topology(const Mesh& other) const { return topology_ == other.topology_; }

 private:
  std::shared_ptr<const MeshTopology> topology_;
  std::vector<Vec2> nodes_;
};

struct Rect {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

/// Height function x2 = h(x1) for vertical motion, abscissa x1 = a(x2) for
/// horizontal motion.
using InterfaceCurve = std::function<double(double)>;

/// Logically rectangular mesh made of bands stacked along the motion
/// direction and separated by interface curves.
struct StructuredMeshSpec {
  Rect domain;
  MotionDirection direction = MotionDirection::Vertical;
  int cross_cells = 2;              // cells across the motion direction
  std::vector<int> band_cells;      // cells along the motion direction, per band
  std::vector<InterfaceCurve> interfaces;  // band_cells.size() - 1 curves
  std::vector<int> band_region;     // fluid index per band
  bool periodic = false;            // identify the x = x0 and x = x1 node columns
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshTangledError : public MeshError {
 public:
  MeshTangledError(int cell, double min_jacobian);
  int cell() const { return cell_; }
  double min_jacobian() const { return min_jacobian_; }

 private:
  int cell_;
  double min_jacobian_;
};

Mesh build_structured_mesh(const StructuredMeshSpec& spec);

/// Two-region mesh with one interface. Vertical motion: fluid 1 below the
/// height curve; horizontal motion: fluid 1 left of the abscissa curve.
Mesh build_structured_mesh(const Rect& domain, int nx, int ny, const InterfaceCurve& curve,
                           MotionDirection direction);

/// Node displacement x = y + dt * w(y).
struct MotionMap {
  std::vector<Vec2> displacement;
  double dt = 0.0;

  /// Displacement dt * w * e_dir from nodal values of the scalar component.
  static MotionMap single_component(const std::vector<double>& w_per_node,
                                    MotionDirection direction, double dt);
  /// Throws unless only the `direction` component is nonzero.
  void check_single_component(MotionDirection direction) const;
};

Mesh apply_motion(const Mesh& mesh, const MotionMap& motion);

/// Smallest Jacobian determinant over the assembly quadrature points and the
/// cell that attains it.
std::pair<int, double> min_jacobian(const Mesh& mesh);

double interface_measure(const Mesh& mesh, int points_per_edge = 5);
double chain_measure(const Mesh& mesh, int chain, int points_per_edge = 5);

struct QuadraturePoint {
  int cell = -1;
  int q = -1;
  Vec2 ref;
  Vec2 x;
};

/// Region 0 integrates over both fluids.
double region_integral(const Mesh& mesh, int region,
                       const std::function<double(const QuadraturePoint&)>& integrand,
                       int points_1d = 5);

double region_area(const Mesh& mesh, int region);

/// Text snapshot `ale2fluid-mesh v1`, coordinates with 17 significant digits.
void write_mesh(std::ostream& out, const Mesh& mesh);

struct MeshSnapshot {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 9>> cells;
  std::vector<int> regions;
  std::vector<std::array<int, 4>> interface_edges;  // n0, n1, n2, chain
  std::vector<int> contacts;
};

MeshSnapshot read_mesh(std::istream& in);

}  // namespace ale2fluid
