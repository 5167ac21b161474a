#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ale2fluid/ale_motion.hpp"
#include "ale2fluid/fem.hpp"
#include "ale2fluid/sparse.hpp"

namespace ale2fluid {

enum class MotionScheme { M1, M2, M3 };
enum class GravityDomain { Prev, Next, Half };
enum class LinearSolverKind { Direct, Gmres };

std::string to_string(MotionScheme s);
std::string to_string(GravityDomain g);
std::string to_string(LinearSolverKind k);
MotionScheme parse_motion_scheme(const std::string& s);
GravityDomain parse_gravity_domain(const std::string& s);
LinearSolverKind parse_linear_solver(const std::string& s);

struct PhysicalParams {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double gamma = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double theta_s = 1.5707963267948966;
  double g = 0.0;
  /// Tangential wall speed per WallTag: along +x on bottom/top walls, along
  /// +y on left/right walls.
  std::array<double, 4> wall_speed{};

  double delta_rho() const { return rho2 - rho1; }
  double rho(int region) const { return region == 1 ? rho1 : rho2; }
  double eta(int region) const { return region == 1 ? eta1 : eta2; }
  double beta(int region) const { return region == 1 ? beta1 : beta2; }
  Vec2 wall_velocity(WallTag tag) const;
  void validate() const;
};

struct SchemeConfig {
  MotionScheme scheme = MotionScheme::M1;
  GravityDomain gravity_domain = GravityDomain::Next;
  double dt = 0.025;
  double m2_relaxation = 0.7;
  double m2_tol = 1e-8;
  int m2_max_iter = 50;
  LinearSolverKind solver = LinearSolverKind::Direct;
  GmresOptions gmres;
  MotionDirection direction = MotionDirection::Vertical;
  double n_min = kDefaultNormalThreshold;

  void validate() const;
};

class FixedPointError : public std::runtime_error {
 public:
  FixedPointError(int iterations, double residual);
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

struct StepResult {
  State state;
  MeshVelocity mesh_velocity;
  Mesh old_mesh;
  int fixed_point_iterations = 0;
  double fixed_point_residual = 0.0;
  int linear_iterations = 0;
  double linear_residual = 0.0;
  bool trace_fell_back = false;
};

/// Saddle-point system on Omega^{n+1}. Unknowns: free velocity dofs, then
/// pressure dofs, then the zero-mean multiplier.
struct MomentumSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  int velocity_free = 0;
  int pressure_count = 0;
};

MomentumSystem assemble_momentum_system(const State& state, const Mesh& next_mesh,
                                        const MeshVelocity& w, const PhysicalParams& params,
                                        const SchemeConfig& scheme);

/// Wall tangent at a contact oriented so that m . t = cos(theta) with theta
/// measured in fluid 1 and m the outward conormal of the interface.
Vec2 contact_wall_tangent(const Mesh& mesh, const ContactNode& contact);
/// Outward conormal of the interface at a contact (end tangent of its chain).
Vec2 contact_conormal(const Mesh& mesh, const ContactNode& contact);

/// -gamma int_Sigma t . d_s v + gamma cos(theta_s) t_wall . v at contacts, in
/// the full velocity numbering.
std::vector<double> surface_tension_load(const Mesh& mesh, const FunctionSpace& velocity,
                                         const PhysicalParams& params);

/// One time step. `previous` is the state before `state` (used by M3 only).
StepResult step(const State& state, const State* previous, const PhysicalParams& params,
                const SchemeConfig& scheme);

struct ContactState {
  int node = -1;
  WallTag wall = WallTag::Bottom;
  Vec2 position;
  double angle = 0.0;
  Vec2 velocity;
  double slip = 0.0;
};

std::vector<ContactState> measure_contact_state(const State& state, const PhysicalParams& params);

/// Velocity and pressure solve on a fixed mesh with the given mesh velocity
/// (exposed for tests and benchmarks).
State solve_on_mesh(const State& state, const Mesh& next_mesh, const MeshVelocity& w,
                    const PhysicalParams& params, const SchemeConfig& scheme,
                    int* iterations = nullptr, double* residual = nullptr);

}  // namespace ale2fluid
