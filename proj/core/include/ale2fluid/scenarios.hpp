#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ale2fluid/energy.hpp"
#include "ale2fluid/solver.hpp"

namespace ale2fluid {

enum class ScenarioKind { GravityRelaxation, CouetteGnbc, GclSuite };

std::string to_string(ScenarioKind k);
ScenarioKind parse_scenario(const std::string& s);

enum class InitialVelocity { Rest, Vortex };

struct RunConfig {
  ScenarioKind scenario = ScenarioKind::GravityRelaxation;
  int nx = 40;  // cells along x
  int ny = 20;  // cells along y
  PhysicalParams params;
  SchemeConfig scheme;
  double end_time = 3.0;
  std::string output_dir;
  int snapshot_every = 0;   // mesh snapshots, 0 = first and last only
  int interface_every = 0;  // interface polylines, 0 = first and last only
  std::string csv_path;     // relative to output_dir unless absolute

  // Gravity relaxation: domain (-half_width, half_width) x (0, height),
  // interface x2 = interface_height + interface_slope * x1.
  double half_width = 2.0;
  double height = 2.0;
  double interface_height = 1.0;
  double interface_slope = 0.2;
  InitialVelocity initial_velocity = InitialVelocity::Rest;
  double vortex_amplitude = 1.0;

  // Couette: channel (0, 4L) x (0, H), walls moving at +V (top) and -V (bottom).
  double couette_height = 13.6;
  double couette_length = 27.2;
  double couette_speed = 0.25;

  // GCL suite.
  int gcl_trials = 20;
  unsigned gcl_seed = 12345;
  double gcl_dt = 0.01;
  std::vector<double> gcl_dt_sweep{0.02, 0.01, 0.005, 0.0025};

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Defaults of one scenario.
RunConfig default_config(ScenarioKind kind);
/// `key = value` lines, `#` comments. The scenario key selects the defaults
/// wherever it appears.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Resolved configuration in the parse_config format.
std::string format_config(const RunConfig& config);

Mesh build_scenario_mesh(const RunConfig& config);
State initial_state(const RunConfig& config, const Mesh& mesh);

struct CouetteSample {
  double cl_x = 0.0;
  double cl_slip = 0.0;
  double far_u = 0.0;
  double theta_top = 0.0;
  double theta_bottom = 0.0;
  std::vector<ContactState> contacts;
};

CouetteSample sample_couette(const State& state, const RunConfig& config);

struct RunRecord {
  std::vector<EnergyReport> reports;  // step 0 first
  std::vector<CouetteSample> couette; // per step, Couette only
  std::vector<double> area1;          // per step
  std::vector<double> area2;
  std::vector<double> interface_deviation;  // max |x - rest position| over interface nodes
  State final_state;
  int steps = 0;
  int max_fixed_point_iterations = 0;
  bool m3_fell_back = false;
  bool completed = false;
  std::string failure;  // solver error text when not completed
};

/// Steps a gravity or Couette scenario to end_time. Artifacts are written
/// when output_dir is set. Solver errors end the run and are recorded.
RunRecord run_simulation(const RunConfig& config, std::ostream* log = nullptr);

struct GclSuiteReport {
  struct Row {
    std::string check;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    bool control = false;  // negative control or hypothesis case: never fails the suite
    std::string note;
  };
  std::vector<Row> rows;
  bool passed() const;
};

/// Conservation-identity checks on the gravity mesh of `config`. Independent trials run on up
/// to `threads` threads.
GclSuiteReport run_gcl_suite(const RunConfig& config, int threads = 1);
void write_gcl_report(std::ostream& out, const GclSuiteReport& report);

/// Thread cap from ALE2FLUID_THREADS, else the hardware concurrency.
int thread_cap();

/// Rows of the energy CSV.
std::string csv_header(ScenarioKind kind);
std::string csv_row(const EnergyReport& r, const CouetteSample* couette);
void write_interface(std::ostream& out, const Mesh& mesh);

}  // namespace ale2fluid
