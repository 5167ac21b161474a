#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ale2fluid/solver.hpp"

namespace ale2fluid {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Energies of one state: K = 1/2 int rho |u|^2, W = int rho g x2,
/// P_v = int eta/2 |grad u + grad u^T|^2 and the interface length.
struct EnergyTerms {
  double K = 0.0;
  double W = 0.0;
  double Pv = 0.0;
  double sigma = 0.0;
};

EnergyTerms energy_terms(const State& state, const PhysicalParams& params);

/// int_{Omega^n} rho / (2 dt) |u^{n+1} - u^n|^2 with both fields on the old mesh.
double euler_dissipation(const State& old_state, const State& new_state,
                         const PhysicalParams& params);
/// beta (u - u_b, u) over the walls.
double friction_power(const State& state, const PhysicalParams& params);
/// gamma cos(theta_s) sum over contacts of t_wall . u.
double contact_power(const State& state, const PhysicalParams& params);
/// -dt/2 int_Sigma delta_rho g w^2 n_2 on the given mesh.
double gravity_spurious(const Mesh& mesh, const std::vector<double>& w, MotionDirection direction,
                        double dt, const PhysicalParams& params);
/// int_Sigma t . d_s (w e_dir) on the given mesh.
double surface_divergence(const Mesh& mesh, const std::vector<double>& w,
                          MotionDirection direction);

struct EnergyReport {
  int step = 0;
  double time = 0.0;
  double K = 0.0;
  double W = 0.0;
  double Pv = 0.0;
  double sigma = 0.0;
  double euler = kMissing;
  double balance = kMissing;
  double eps_g = kMissing;
  double eps_gamma = kMissing;
  double friction_power = 0.0;
  double contact_power = 0.0;
};

/// Builds reports from consecutive steps. M1 uses the time-shifted balance
/// (W and |Sigma| at n+2), so its reports trail the simulation by one step;
/// M2 and M3 use the unshifted form and report immediately.
class EnergyRecorder {
 public:
  EnergyRecorder(const State& initial, PhysicalParams params, SchemeConfig scheme);

  /// Report of the initial state (no balance).
  const EnergyReport& initial() const { return initial_; }
  /// Feed the step that produced `result.state` from `before`. Returns the
  /// reports completed by it (zero or one).
  std::vector<EnergyReport> push(const State& before, const StepResult& result);
  /// Flushes a pending report with missing shifted terms.
  std::vector<EnergyReport> finish();

 private:
  struct Pending {
    EnergyReport report;
    double K_prev = 0.0;
  };
  PhysicalParams params_;
  SchemeConfig scheme_;
  EnergyReport initial_;
  EnergyTerms last_;
  int steps_ = 0;
  std::optional<Pending> pending_;
};

struct GclVolumeResult {
  double lhs = 0.0;        // int_{n+1} phi - int_n phi o A
  double rhs_old = 0.0;    // dt int_n phi o A div_y w
  double rhs_new = 0.0;    // dt int_{n+1} phi div_x w
  double residual_old = 0.0;
  double residual_new = 0.0;
  double dt = 0.0;
};

/// Volume GCL for a nodal mesh velocity (any components) moving the mesh by
/// dt * w. Quadrature with `points_1d` points per direction.
GclVolumeResult gcl_volume_check(const Mesh& mesh, const std::vector<Vec2>& w, double dt,
                                 const std::function<double(const Vec2&)>& phi, int region = 0,
                                 int points_1d = 8);

struct GclGravityResult {
  double flux_old = 0.0;     // int_{Sigma^n} g x2 drho w n2
  double flux_new = 0.0;     // int_{Sigma^{n+1}} g x2 drho w n2
  double dW = 0.0;           // (W^{n+1} - W^n) / dt
  double quad_old = 0.0;     // dt/2 int_{Sigma^n} drho g w^2 n2
  double quad_new = 0.0;     // dt/2 int_{Sigma^{n+1}} drho g w^2 n2
  double residual_old = 0.0; // flux_old + dW + quad_old
  double residual_new = 0.0; // flux_new + dW - quad_new
  double scale = 0.0;        // largest term magnitude
  double dt = 0.0;
};

/// Potential-energy GCL for a vertical mesh velocity given per node.
GclGravityResult gcl_gravity_check(const Mesh& mesh, const std::vector<double>& w, double dt,
                                   const PhysicalParams& params);

class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(const std::string& what, double min_factor)
      : std::runtime_error(what), min_factor_(min_factor) {}
  double min_factor() const { return min_factor_; }

 private:
  double min_factor_;
};

struct GclSurfaceResult {
  double gap_old = 0.0;  // >= 0
  double gap_new = 0.0;  // <= 0
  double min_factor = 0.0;  // min over Sigma of 1 +/- dt tr(grad_Sigma w)
  double dt = 0.0;
};

/// Surface GCL gaps for a single-component mesh velocity given per node.
/// Throws HypothesisError when 1 + dt tr(grad_Sigma w) < 0 on Sigma^n or
/// 1 - dt tr(grad_Sigma w) < 0 on Sigma^{n+1}.
GclSurfaceResult gcl_surface_gap(const Mesh& mesh, const std::vector<double>& w,
                                 MotionDirection direction, double dt,
                                 const std::function<double(const Vec2&)>& phi);

struct BalanceSummary {
  double min_balance = kMissing;
  double max_balance = kMissing;
  double integral = 0.0;     // sum of dt * balance over the window
  double integral_abs = 0.0;
  int count = 0;
};

/// Balance statistics over reports with time in (t0, t1]; missing values skipped.
BalanceSummary summarize_balance(const std::vector<EnergyReport>& reports, double dt, double t0,
                                 double t1);

}  // namespace ale2fluid
