#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ale2fluid/element.hpp"
#include "ale2fluid/mesh.hpp"
#include "ale2fluid/sparse.hpp"

namespace ale2fluid {

enum class SpaceKind { VelocityQ2, PressureP1Disc, ScalarQ2 };

/// Global numbering of one finite-element space. Velocity dofs are
/// 2 * merged_node + component; periodic partners share a merged node.
struct FunctionSpace {
  SpaceKind kind = SpaceKind::ScalarQ2;
  std::shared_ptr<const MeshTopology> topology;
  int dof_count = 0;
  int local_size = 0;
  std::vector<int> dof_map;       // cell * local_size + k
  std::vector<int> merged_node;   // mesh node -> merged node (Q2 spaces)
  std::vector<char> constrained;  // per dof
  std::vector<int> free_index;    // per dof, -1 when constrained
  int free_count = 0;
  bool zero_mean = false;

  const int* cell_dofs(int cell) const { return dof_map.data() + cell * local_size; }
  int components() const { return kind == SpaceKind::VelocityQ2 ? 2 : 1; }
  /// Dof of a mesh node (Q2 spaces).
  int node_dof(int node, int comp = 0) const { return components() * merged_node[node] + comp; }
  int merged_count() const;

  /// Same numbering with the given dofs constrained in addition.
  FunctionSpace with_constraints(const std::vector<int>& dofs) const;
  void renumber_free();
};

struct Spaces {
  FunctionSpace velocity;
  FunctionSpace pressure;
};

/// Velocity space with the normal component eliminated on every wall node and
/// discontinuous P1 pressure with a zero-mean constraint.
Spaces build_spaces(const Mesh& mesh, bool periodic);
Spaces build_spaces(const Mesh& mesh);
FunctionSpace build_scalar_space(const Mesh& mesh);

/// Pressure basis 1, (x - xc)/hc, (y - yc)/hc in physical coordinates, with xc
/// the cell centre node and hc half the cell extent.
struct PressureFrame {
  Vec2 center;
  double scale = 1.0;

  std::array<double, 3> basis(const Vec2& x) const {
    return {1.0, (x.x - center.x) / scale, (x.y - center.y) / scale};
  }
};
PressureFrame pressure_frame(const Mesh& mesh, int cell);

struct FieldSample {
  Vec2 value;  // scalar fields use value.x
  Mat2 grad;   // grad(i, j) = d value_i / d x_j
};

FieldSample evaluate_field(const FunctionSpace& space, const Mesh& mesh,
                           const std::vector<double>& coeffs, int cell, const Vec2& ref);

/// Velocity value and gradient at a quadrature point of initialised CellValues.
FieldSample velocity_at(const CellValues& cv, int q, const FunctionSpace& space,
                        const std::vector<double>& coeffs);
double scalar_at(const CellValues& cv, int q, const FunctionSpace& space,
                 const std::vector<double>& coeffs, Vec2* grad = nullptr);

struct State {
  std::shared_ptr<const Spaces> spaces;
  Mesh mesh;
  std::vector<double> velocity;
  std::vector<double> pressure;
  double time = 0.0;

  static State zero(const Mesh& mesh, std::shared_ptr<const Spaces> spaces, double time = 0.0);
  void check() const;
};

using LocalMatrix = Eigen::MatrixXd;
using LocalVector = Eigen::VectorXd;

/// Edge data handed to boundary kernels. Local dofs on an edge are ordered
/// components * s + c over the three edge nodes.
struct EdgeContext {
  const EdgeValues& ev;
  std::array<int, 3> nodes;
  int cell;                      // adjacent cell (fluid 1 side for interface edges)
  std::optional<WallTag> wall;
  int index;                     // edge index in its list
};

using VolumeMatrixKernel = std::function<void(const CellValues&, LocalMatrix&)>;
using EdgeMatrixKernel = std::function<void(const EdgeContext&, LocalMatrix&)>;
using VolumeVectorKernel = std::function<void(const CellValues&, LocalVector&)>;
using EdgeVectorKernel = std::function<void(const EdgeContext&, LocalVector&)>;
using ContactVectorKernel = std::function<Vec2(const ContactNode&)>;

/// Wall integrals run over the listed tags; an empty list means every wall.
struct WallMatrixTerm {
  std::vector<WallTag> tags;
  EdgeMatrixKernel kernel;
};
struct WallVectorTerm {
  std::vector<WallTag> tags;
  EdgeVectorKernel kernel;
};

struct BilinearForm {
  const FunctionSpace* test = nullptr;
  const FunctionSpace* trial = nullptr;
  std::vector<VolumeMatrixKernel> volume;
  std::vector<EdgeMatrixKernel> interface;  // Q2 spaces only
  std::vector<WallMatrixTerm> wall;          // Q2 spaces only
};

struct LinearForm {
  const FunctionSpace* test = nullptr;
  std::vector<VolumeVectorKernel> volume;
  std::vector<EdgeVectorKernel> interface;
  std::vector<WallVectorTerm> wall;
  std::vector<ContactVectorKernel> contact;  // nodal force on velocity dofs
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Triplets in the full (unconstrained) numbering.
std::vector<Triplet> assemble_triplets(const BilinearForm& form, const Mesh& mesh,
                                       int points_1d = kAssemblyPoints);
CsrMatrix assemble_full(const BilinearForm& form, const Mesh& mesh);
/// Matrix on free dofs; constrained rows and columns are dropped.
CsrMatrix assemble(const BilinearForm& form, const Mesh& mesh);
std::vector<double> assemble_full(const LinearForm& form, const Mesh& mesh,
                                  int points_1d = kAssemblyPoints);
std::vector<double> assemble(const LinearForm& form, const Mesh& mesh);

/// Drops constrained entries of full-numbering triplets and shifts them.
void append_free(const std::vector<Triplet>& full, const FunctionSpace& test,
                 const FunctionSpace& trial, int row_offset, int col_offset,
                 std::vector<Triplet>& out);

std::vector<double> restrict_to_free(const FunctionSpace& space, const std::vector<double>& full);
/// Full vector from free values; constrained dofs take `constrained_values`
/// (all zero when empty).
std::vector<double> expand_from_free(const FunctionSpace& space, const std::vector<double>& free,
                                     const std::vector<double>& constrained_values = {});

/// Free-dof system of a problem with prescribed constrained values, the
/// constrained columns moved to the load.
struct LiftedSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
};
LiftedSystem assemble_lifted(const BilinearForm& a, const LinearForm& l, const Mesh& mesh,
                             const std::vector<double>& constrained_values);

double dot(const std::vector<double>& a, const std::vector<double>& b);

// Standard forms. Coefficients are given per cell.
BilinearForm mass_form(const FunctionSpace& space, std::vector<double> coefficient);
BilinearForm viscous_form(const FunctionSpace& velocity, std::vector<double> eta);
/// -int q div u.
BilinearForm divergence_form(const FunctionSpace& pressure, const FunctionSpace& velocity);
BilinearForm laplace_form(const FunctionSpace& scalar);

/// Per-cell coefficient taking `value1` in fluid 1 and `value2` in fluid 2.
std::vector<double> per_region(const Mesh& mesh, double value1, double value2);

/// Nodal interpolation of a vector field into the velocity space (constrained
/// dofs included unless `respect_constraints`).
std::vector<double> interpolate_velocity(const FunctionSpace& space, const Mesh& mesh,
                                         const std::function<Vec2(const Vec2&)>& f,
                                         bool respect_constraints = true);
std::vector<double> interpolate_scalar(const FunctionSpace& space, const Mesh& mesh,
                                       const std::function<double(const Vec2&)>& f);

}  // namespace ale2fluid
