#include "ale2fluid/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace ale2fluid {

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::GravityRelaxation: return "gravity_relaxation";
    case ScenarioKind::CouetteGnbc: return "couette_gnbc";
    case ScenarioKind::GclSuite: return "gcl_suite";
  }
  return "?";
}

ScenarioKind parse_scenario(const std::string& s) {
  if (s == "gravity_relaxation") return ScenarioKind::GravityRelaxation;
  if (s == "couette_gnbc") return ScenarioKind::CouetteGnbc;
  if (s == "gcl_suite") return ScenarioKind::GclSuite;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

void RunConfig::validate() const {
  params.validate();
  scheme.validate();
  if (nx < 2 || ny < 2) throw std::invalid_argument("nx and ny must be at least 2");
  if (!(end_time > 0.0)) throw std::invalid_argument("end_time must be positive");
  if (snapshot_every < 0 || interface_every < 0) {
    throw std::invalid_argument("output intervals must be nonnegative");
  }
  if (!(half_width > 0.0 && height > 0.0)) throw std::invalid_argument("domain must be nonempty");
  if (!(couette_height > 0.0 && couette_length > 0.0)) {
    throw std::invalid_argument("Couette channel must be nonempty");
  }
  if (scenario == ScenarioKind::CouetteGnbc && nx % 4 != 0) {
    throw std::invalid_argument("Couette nx must be a multiple of 4");
  }
  if (gcl_trials < 1) throw std::invalid_argument("gcl_trials must be positive");
  if (!(gcl_dt > 0.0)) throw std::invalid_argument("gcl_dt must be positive");
  for (double d : gcl_dt_sweep) {
    if (!(d > 0.0)) throw std::invalid_argument("gcl_dt_sweep entries must be positive");
  }
}

RunConfig default_config(ScenarioKind kind) {
  RunConfig c;
  c.scenario = kind;
  if (kind == ScenarioKind::CouetteGnbc) {
    c.nx = 64;
    c.ny = 8;
    c.params.rho1 = c.params.rho2 = 0.81;
    c.params.eta1 = c.params.eta2 = 1.95;
    c.params.gamma = 5.5;
    c.params.beta1 = c.params.beta2 = 1.5;
    c.params.theta_s = M_PI / 2.0;
    c.params.g = 0.0;
    c.params.wall_speed[static_cast<int>(WallTag::Top)] = c.couette_speed;
    c.params.wall_speed[static_cast<int>(WallTag::Bottom)] = -c.couette_speed;
    c.scheme.dt = 0.5;
    c.scheme.direction = MotionDirection::Horizontal;
    c.end_time = 160.0;
  } else {
    c.params.rho1 = 1.0;
    c.params.rho2 = 0.91;
    c.params.eta1 = 0.01;
    c.params.eta2 = 0.0091;
    c.params.g = 100.0;
    c.params.gamma = 0.0;
    c.scheme.dt = 0.025;
    c.scheme.direction = MotionDirection::Vertical;
    c.end_time = 3.0;
  }
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

int to_int(const std::string& v) {
  std::size_t pos = 0;
  const int x = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scenario", [](RunConfig& c, const std::string& v) { c.scenario = parse_scenario(v); }},
      {"nx", [](RunConfig& c, const std::string& v) { c.nx = to_int(v); }},
      {"ny", [](RunConfig& c, const std::string& v) { c.ny = to_int(v); }},
      {"rho1", [](RunConfig& c, const std::string& v) { c.params.rho1 = to_double(v); }},
      {"rho2", [](RunConfig& c, const std::string& v) { c.params.rho2 = to_double(v); }},
      {"eta1", [](RunConfig& c, const std::string& v) { c.params.eta1 = to_double(v); }},
      {"eta2", [](RunConfig& c, const std::string& v) { c.params.eta2 = to_double(v); }},
      {"gamma", [](RunConfig& c, const std::string& v) { c.params.gamma = to_double(v); }},
      {"beta1", [](RunConfig& c, const std::string& v) { c.params.beta1 = to_double(v); }},
      {"beta2", [](RunConfig& c, const std::string& v) { c.params.beta2 = to_double(v); }},
      {"theta_s", [](RunConfig& c, const std::string& v) { c.params.theta_s = to_double(v); }},
      {"cos_theta_s",
       [](RunConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x > -1.0 && x < 1.0)) throw std::invalid_argument("must lie in (-1, 1)");
         c.params.theta_s = std::acos(x);
       }},
      {"g", [](RunConfig& c, const std::string& v) { c.params.g = to_double(v); }},
      {"scheme",
       [](RunConfig& c, const std::string& v) { c.scheme.scheme = parse_motion_scheme(v); }},
      {"gravity_domain",
       [](RunConfig& c, const std::string& v) {
         c.scheme.gravity_domain = parse_gravity_domain(v);
       }},
      {"dt", [](RunConfig& c, const std::string& v) { c.scheme.dt = to_double(v); }},
      {"m2_relaxation",
       [](RunConfig& c, const std::string& v) { c.scheme.m2_relaxation = to_double(v); }},
      {"m2_tol", [](RunConfig& c, const std::string& v) { c.scheme.m2_tol = to_double(v); }},
      {"m2_max_iter", [](RunConfig& c, const std::string& v) { c.scheme.m2_max_iter = to_int(v); }},
      {"linear_solver",
       [](RunConfig& c, const std::string& v) { c.scheme.solver = parse_linear_solver(v); }},
      {"gmres_tol", [](RunConfig& c, const std::string& v) { c.scheme.gmres.tol = to_double(v); }},
      {"gmres_restart",
       [](RunConfig& c, const std::string& v) { c.scheme.gmres.restart = to_int(v); }},
      {"gmres_max_iter",
       [](RunConfig& c, const std::string& v) { c.scheme.gmres.max_iter = to_int(v); }},
      {"n_min", [](RunConfig& c, const std::string& v) { c.scheme.n_min = to_double(v); }},
      {"end_time", [](RunConfig& c, const std::string& v) { c.end_time = to_double(v); }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"snapshot_every", [](RunConfig& c, const std::string& v) { c.snapshot_every = to_int(v); }},
      {"interface_every",
       [](RunConfig& c, const std::string& v) { c.interface_every = to_int(v); }},
      {"csv_path", [](RunConfig& c, const std::string& v) { c.csv_path = v; }},
      {"half_width", [](RunConfig& c, const std::string& v) { c.half_width = to_double(v); }},
      {"height", [](RunConfig& c, const std::string& v) { c.height = to_double(v); }},
      {"interface_height",
       [](RunConfig& c, const std::string& v) { c.interface_height = to_double(v); }},
      {"interface_slope",
       [](RunConfig& c, const std::string& v) { c.interface_slope = to_double(v); }},
      {"initial_velocity",
       [](RunConfig& c, const std::string& v) {
         if (v == "rest") {
           c.initial_velocity = InitialVelocity::Rest;
         } else if (v == "vortex") {
           c.initial_velocity = InitialVelocity::Vortex;
         } else {
           throw std::invalid_argument("expected rest or vortex");
         }
       }},
      {"vortex_amplitude",
       [](RunConfig& c, const std::string& v) { c.vortex_amplitude = to_double(v); }},
      {"couette_height",
       [](RunConfig& c, const std::string& v) { c.couette_height = to_double(v); }},
      {"couette_length",
       [](RunConfig& c, const std::string& v) { c.couette_length = to_double(v); }},
      {"couette_speed",
       [](RunConfig& c, const std::string& v) {
         c.couette_speed = to_double(v);
         c.params.wall_speed[static_cast<int>(WallTag::Top)] = c.couette_speed;
         c.params.wall_speed[static_cast<int>(WallTag::Bottom)] = -c.couette_speed;
       }},
      {"gcl_trials", [](RunConfig& c, const std::string& v) { c.gcl_trials = to_int(v); }},
      {"gcl_seed",
       [](RunConfig& c, const std::string& v) {
         c.gcl_seed = static_cast<unsigned>(std::stoul(v));
       }},
      {"gcl_dt", [](RunConfig& c, const std::string& v) { c.gcl_dt = to_double(v); }},
      {"gcl_dt_sweep", [](RunConfig& c, const std::string& v) { c.gcl_dt_sweep = to_list(v); }},
  };
  return table;
}

struct Line {
  int number;
  std::string key;
  std::string value;
};

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> out;
  std::stringstream ss(text);
  std::string raw;
  int number = 0;
  while (std::getline(ss, raw)) {
    ++number;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    Line l{number, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (l.key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    out.push_back(std::move(l));
  }
  return out;
}

std::string where(const Line& l) {
  return "line " + std::to_string(l.number) + ", key '" + l.key + "'";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  const auto lines = tokenize(text);
  ScenarioKind kind = ScenarioKind::GravityRelaxation;
  for (const Line& l : lines) {
    if (l.key != "scenario") continue;
    try {
      kind = parse_scenario(l.value);
    } catch (const std::exception& e) {
      throw ConfigError(where(l) + ": " + e.what());
    }
  }
  RunConfig c = default_config(kind);
  for (const Line& l : lines) {
    const auto it = setters().find(l.key);
    if (it == setters().end()) throw ConfigError(where(l) + ": unknown key");
    try {
      it->second(c, l.value);
    } catch (const std::exception& e) {
      throw ConfigError(where(l) + ": invalid value '" + l.value + "': " + e.what());
    }
    try {
      c.validate();
    } catch (const std::exception& e) {
      throw ConfigError(where(l) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "scenario = " << to_string(c.scenario) << "\n";
  o << "nx = " << c.nx << "\nny = " << c.ny << "\n";
  const PhysicalParams& p = c.params;
  o << "rho1 = " << p.rho1 << "\nrho2 = " << p.rho2 << "\neta1 = " << p.eta1
    << "\neta2 = " << p.eta2 << "\ngamma = " << p.gamma << "\nbeta1 = " << p.beta1
    << "\nbeta2 = " << p.beta2 << "\ntheta_s = " << p.theta_s << "\ng = " << p.g << "\n";
  const SchemeConfig& s = c.scheme;
  o << "scheme = " << to_string(s.scheme) << "\ngravity_domain = " << to_string(s.gravity_domain)
    << "\ndt = " << s.dt << "\nm2_relaxation = " << s.m2_relaxation << "\nm2_tol = " << s.m2_tol
    << "\nm2_max_iter = " << s.m2_max_iter << "\nlinear_solver = " << to_string(s.solver)
    << "\ngmres_tol = " << s.gmres.tol << "\ngmres_restart = " << s.gmres.restart
    << "\ngmres_max_iter = " << s.gmres.max_iter << "\nn_min = " << s.n_min << "\n";
  o << "end_time = " << c.end_time << "\n";
  if (!c.output_dir.empty()) o << "output_dir = " << c.output_dir << "\n";
  o << "snapshot_every = " << c.snapshot_every << "\ninterface_every = " << c.interface_every
    << "\n";
  if (!c.csv_path.empty()) o << "csv_path = " << c.csv_path << "\n";
  if (c.scenario == ScenarioKind::CouetteGnbc) {
    o << "couette_height = " << c.couette_height << "\ncouette_length = " << c.couette_length
      << "\ncouette_speed = " << c.couette_speed << "\n";
  } else {
    o << "half_width = " << c.half_width << "\nheight = " << c.height
      << "\ninterface_height = " << c.interface_height
      << "\ninterface_slope = " << c.interface_slope << "\ninitial_velocity = "
      << (c.initial_velocity == InitialVelocity::Rest ? "rest" : "vortex")
      << "\nvortex_amplitude = " << c.vortex_amplitude << "\n";
  }
  if (c.scenario == ScenarioKind::GclSuite) {
    o << "gcl_trials = " << c.gcl_trials << "\ngcl_seed = " << c.gcl_seed
      << "\ngcl_dt = " << c.gcl_dt << "\ngcl_dt_sweep = ";
    for (std::size_t i = 0; i < c.gcl_dt_sweep.size(); ++i) {
      o << (i ? "," : "") << c.gcl_dt_sweep[i];
    }
    o << "\n";
  }
  return o.str();
}

Mesh build_scenario_mesh(const RunConfig& c) {
  if (c.scenario == ScenarioKind::CouetteGnbc) {
    const double L = c.couette_length;
    StructuredMeshSpec spec;
    spec.domain = {0.0, 4.0 * L, 0.0, c.couette_height};
    spec.direction = MotionDirection::Horizontal;
    spec.cross_cells = c.ny;
    spec.band_cells = {c.nx / 4, c.nx / 2, c.nx / 4};
    spec.interfaces = {[L](double) { return L; }, [L](double) { return 3.0 * L; }};
    spec.band_region = {1, 2, 1};
    spec.periodic = true;
    return build_structured_mesh(spec);
  }
  const double h0 = c.interface_height;
  const double slope = c.interface_slope;
  return build_structured_mesh({-c.half_width, c.half_width, 0.0, c.height}, c.nx, c.ny,
                               [=](double x) { return h0 + slope * x; },
                               MotionDirection::Vertical);
}

State initial_state(const RunConfig& c, const Mesh& mesh) {
  State s = State::zero(mesh, std::make_shared<const Spaces>(build_spaces(mesh)));
  if (c.initial_velocity == InitialVelocity::Vortex && c.scenario != ScenarioKind::CouetteGnbc) {
    // Stream function A sin(a (x + w)) sin(b y): tangent to every wall.
    const double a = M_PI / (2.0 * c.half_width);
    const double b = M_PI / c.height;
    const double A = c.vortex_amplitude;
    const double x0 = c.half_width;
    s.velocity = interpolate_velocity(s.spaces->velocity, mesh, [=](const Vec2& x) {
      return Vec2{A * b * std::sin(a * (x.x + x0)) * std::cos(b * x.y),
                  -A * a * std::cos(a * (x.x + x0)) * std::sin(b * x.y)};
    });
  }
  return s;
}

CouetteSample sample_couette(const State& state, const RunConfig& config) {
  CouetteSample s;
  s.contacts = measure_contact_state(state, config.params);
  const auto& topo = state.mesh.topology();
  for (std::size_t i = 0; i < s.contacts.size(); ++i) {
    const ContactNode& cn = topo.contacts[i];
    if (cn.chain != 0) continue;
    if (cn.wall == WallTag::Top) {
      s.cl_x = s.contacts[i].position.x;
      s.cl_slip = s.contacts[i].slip;
      s.theta_top = s.contacts[i].angle;
    } else if (cn.wall == WallTag::Bottom) {
      s.theta_bottom = s.contacts[i].angle;
    }
  }
  // Far point: top-wall node on the periodic seam, the middle of the fluid 1 band.
  const FunctionSpace& vs = state.spaces->velocity;
  const int far = (topo.nodes_y - 1) * topo.nodes_x;
  s.far_u = state.velocity[vs.node_dof(far, 0)];
  return s;
}

std::string csv_header(ScenarioKind kind) {
  std::string h = "step,time,K,W,Pv,sigma,euler_diss,balance,eps_g,eps_gamma,friction_power,"
                  "contact_power";
  if (kind == ScenarioKind::CouetteGnbc) h += ",cl_x,cl_slip,far_u,theta_top,theta_bottom";
  return h;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string csv_row(const EnergyReport& r, const CouetteSample* c) {
  std::string s = std::to_string(r.step);
  for (double v : {r.time, r.K, r.W, r.Pv, r.sigma, r.euler, r.balance, r.eps_g, r.eps_gamma,
                   r.friction_power, r.contact_power}) {
    s += "," + num(v);
  }
  if (c) {
    for (double v : {c->cl_x, c->cl_slip, c->far_u, c->theta_top, c->theta_bottom}) {
      s += "," + num(v);
    }
  }
  return s;
}

void write_interface(std::ostream& out, const Mesh& mesh) {
  const auto& topo = mesh.topology();
  char buf[64];
  for (int ch = 0; ch < topo.num_chains(); ++ch) {
    if (ch > 0) out << "\n";
    const auto [b, e] = topo.chain_ranges[ch];
    for (int i = b; i < e; ++i) {
      const auto& nodes = topo.interface_edges[i].nodes;
      for (int k = (i == b ? 0 : 1); k < 3; ++k) {
        const Vec2& x = mesh.node(nodes[k]);
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", x.x, x.y);
        out << buf;
      }
    }
  }
}

namespace {

namespace fs = std::filesystem;

class Artifacts {
 public:
  explicit Artifacts(const RunConfig& c) : config_(c) {
    if (c.output_dir.empty()) return;
    dir_ = c.output_dir;
    fs::create_directories(dir_);
    {
      std::ofstream cfg(dir_ / "config.resolved");
      if (!cfg) throw std::runtime_error("cannot write to output directory " + dir_.string());
      cfg << format_config(c);
    }
    fs::path csv = c.csv_path.empty() ? fs::path("energy.csv") : fs::path(c.csv_path);
    if (csv.is_relative()) csv = dir_ / csv;
    csv_.open(csv);
    if (!csv_) throw std::runtime_error("cannot write " + csv.string());
    if (c.scenario == ScenarioKind::CouetteGnbc) {
      csv_ << "# far_u: top wall, periodic seam x = 0 (middle of the fluid 1 band); "
              "cl_*: chain 0 top contact\n";
    }
    csv_ << csv_header(c.scenario) << "\n" << std::flush;
  }

  bool enabled() const { return !dir_.empty(); }

  void row(const EnergyReport& r, const CouetteSample* c) {
    if (enabled()) csv_ << csv_row(r, c) << "\n" << std::flush;
  }

  void snapshot(int step, const Mesh& mesh, bool force) {
    if (!enabled()) return;
    if (force || (config_.snapshot_every > 0 && step % config_.snapshot_every == 0)) {
      std::ofstream m(dir_ / ("mesh_" + std::to_string(step) + ".txt"));
      write_mesh(m, mesh);
    }
    if (force || (config_.interface_every > 0 && step % config_.interface_every == 0)) {
      std::ofstream f(dir_ / ("interface_" + std::to_string(step) + ".txt"));
      write_interface(f, mesh);
    }
  }

  void summary(const std::string& text) {
    if (!enabled()) return;
    std::ofstream s(dir_ / "summary.txt");
    s << text;
  }

 private:
  const RunConfig& config_;
  fs::path dir_;
  std::ofstream csv_;
};

double deviation(const RunConfig& c, const Mesh& mesh, const Mesh& initial) {
  double dev = 0.0;
  for (int n : mesh.topology().interface_nodes()) {
    const double d = c.scenario == ScenarioKind::CouetteGnbc
                         ? std::abs(mesh.node(n).x - initial.node(n).x)
                         : std::abs(mesh.node(n).y - c.interface_height);
    dev = std::max(dev, d);
  }
  return dev;
}

}  // namespace

RunRecord run_simulation(const RunConfig& config, std::ostream* log) {
  config.validate();
  if (config.scenario == ScenarioKind::GclSuite) {
    throw std::invalid_argument("gcl_suite is not a time-stepping scenario");
  }
  Artifacts out(config);
  const bool couette = config.scenario == ScenarioKind::CouetteGnbc;
  const Mesh mesh0 = build_scenario_mesh(config);
  State state = initial_state(config, mesh0);
  EnergyRecorder recorder(state, config.params, config.scheme);
  RunRecord rec;
  std::vector<CouetteSample> samples;
  auto record_step = [&](const State& s) {
    if (couette) samples.push_back(sample_couette(s, config));
    rec.area1.push_back(region_area(s.mesh, 1));
    rec.area2.push_back(region_area(s.mesh, 2));
    rec.interface_deviation.push_back(deviation(config, s.mesh, mesh0));
  };
  auto emit = [&](const EnergyReport& r) {
    rec.reports.push_back(r);
    out.row(r, couette ? &samples[r.step] : nullptr);
  };
  record_step(state);
  emit(recorder.initial());
  out.snapshot(0, state.mesh, true);

  const int steps = static_cast<int>(std::llround(config.end_time / config.scheme.dt));
  std::optional<State> previous;
  for (int n = 1; n <= steps; ++n) {
    StepResult r;
    try {
      r = step(state, previous ? &*previous : nullptr, config.params, config.scheme);
    } catch (const std::exception& e) {
      rec.failure = "step " + std::to_string(n) + ": " + e.what();
      if (log) *log << "run stopped at " << rec.failure << "\n";
      break;
    }
    rec.max_fixed_point_iterations = std::max(rec.max_fixed_point_iterations,
                                              r.fixed_point_iterations);
    if (r.trace_fell_back) {
      rec.m3_fell_back = true;
      if (log) *log << "step " << n << ": M3 has no previous velocity, used the M1 trace\n";
    }
    record_step(r.state);
    for (const auto& e : recorder.push(state, r)) emit(e);
    previous = std::move(state);
    state = std::move(r.state);
    rec.steps = n;
    out.snapshot(n, state.mesh, n == steps);
    if (log && (n % 20 == 0 || n == steps)) {
      const EnergyReport& last = rec.reports.back();
      *log << "step " << n << " t=" << state.time << " K=" << last.K << " Pv=" << last.Pv
           << " sigma=" << last.sigma << "\n";
    }
  }
  for (const auto& e : recorder.finish()) emit(e);
  if (rec.failure.empty() || rec.steps > 0) out.snapshot(rec.steps, state.mesh, true);
  rec.completed = rec.failure.empty();
  rec.final_state = state;
  if (couette) rec.couette = std::move(samples);

  std::ostringstream sum;
  double max_abs_balance = 0.0, min_eps_g = std::numeric_limits<double>::infinity();
  for (const auto& r : rec.reports) {
    if (std::isfinite(r.balance)) max_abs_balance = std::max(max_abs_balance, std::abs(r.balance));
    if (std::isfinite(r.eps_g)) min_eps_g = std::min(min_eps_g, r.eps_g);
  }
  double drift1 = 0.0, drift2 = 0.0;
  for (std::size_t i = 0; i < rec.area1.size(); ++i) {
    drift1 = std::max(drift1, std::abs(rec.area1[i] - rec.area1[0]) / rec.area1[0]);
    drift2 = std::max(drift2, std::abs(rec.area2[i] - rec.area2[0]) / rec.area2[0]);
  }
  sum << "scenario " << to_string(config.scenario) << "\n"
      << "steps " << rec.steps << "\n"
      << "completed " << (rec.completed ? "yes" : "no") << "\n";
  if (!rec.failure.empty()) sum << "failure " << rec.failure << "\n";
  sum << "max_abs_balance " << max_abs_balance << "\n"
      << "min_eps_g " << min_eps_g << "\n"
      << "area_drift_fluid1 " << drift1 << "\n"
      << "area_drift_fluid2 " << drift2 << "\n"
      << "final_interface_deviation " << rec.interface_deviation.back() << "\n"
      << "tangled "
      << (rec.failure.find("tangled") != std::string::npos ? "yes" : "no") << "\n";
  if (config.scheme.scheme == MotionScheme::M2) {
    sum << "max_fixed_point_iterations " << rec.max_fixed_point_iterations << "\n";
  }
  out.summary(sum.str());
  if (log) *log << sum.str();
  return rec;
}

int thread_cap() {
  if (const char* env = std::getenv("ALE2FLUID_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("ALE2FLUID_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

bool GclSuiteReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.control || r.passed; });
}

namespace {

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex m;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double fitted_order(const std::vector<double>& dt, const std::vector<double>& value) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(dt.size());
  for (std::size_t i = 0; i < dt.size(); ++i) {
    const double x = std::log(dt[i]);
    const double y = std::log(std::abs(value[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Zero on the walls normal to vertical motion.
std::vector<double> motion_wall_mask(const Mesh& mesh) {
  std::vector<double> mask(mesh.num_nodes(), 1.0);
  for (const WallEdge& e : mesh.topology().wall_edges) {
    if (e.tag == WallTag::Bottom || e.tag == WallTag::Top) {
      for (int n : e.nodes) mask[n] = 0.0;
    }
  }
  return mask;
}

}  // namespace

GclSuiteReport run_gcl_suite(const RunConfig& config, int threads) {
  config.validate();
  RunConfig gc = config;
  gc.scenario = ScenarioKind::GravityRelaxation;
  const Mesh mesh = build_scenario_mesh(gc);
  const double area = region_area(mesh, 0);
  const double dt = config.gcl_dt;
  GclSuiteReport rep;

  // Volume identities with random single-component w.
  const std::vector<std::pair<std::string, std::function<double(const Vec2&)>>> phis = {
      {"1", [](const Vec2&) { return 1.0; }},
      {"x2", [](const Vec2& x) { return x.y; }},
      {"x1*x2", [](const Vec2& x) { return x.x * x.y; }}};
  const auto mask = motion_wall_mask(mesh);
  const int trials = config.gcl_trials;
  std::vector<std::array<double, 3>> vol_old(trials), vol_new(trials);
  parallel_for(trials, threads, [&](int t) {
    std::mt19937 rng(config.gcl_seed + static_cast<unsigned>(t));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec2> w(mesh.num_nodes());
    for (int n = 0; n < mesh.num_nodes(); ++n) w[n] = {0.0, mask[n] * u(rng)};
    for (int k = 0; k < 3; ++k) {
      const auto r = gcl_volume_check(mesh, w, dt, phis[k].second);
      vol_old[t][k] = std::abs(r.residual_old) / area;
      vol_new[t][k] = std::abs(r.residual_new) / area;
    }
  });
  for (int k = 0; k < 3; ++k) {
    double mo = 0.0, mn = 0.0;
    for (int t = 0; t < trials; ++t) {
      mo = std::max(mo, vol_old[t][k]);
      mn = std::max(mn, vol_new[t][k]);
    }
    rep.rows.push_back({"volume residual (old-domain form), phi=" + phis[k].first, mo, 1e-9,
                        mo <= 1e-9, false, "max over trials / area"});
    rep.rows.push_back({"volume residual (new-domain form), phi=" + phis[k].first, mn, 1e-9,
                        mn <= 1e-9, false, "max over trials / area"});
  }

  // Negative control: two-component w breaks the identity at order dt^2.
  {
    std::mt19937 rng(config.gcl_seed + 7919u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec2> w(mesh.num_nodes());
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      const Vec2 x = mesh.node(n);
      w[n] = {std::sin(M_PI * x.y / gc.height) * std::cos(x.x), mask[n] * (0.5 + 0.5 * u(rng))};
      if (std::abs(std::abs(x.x) - gc.half_width) < 1e-12) w[n].x = 0.0;
    }
    std::vector<double> dts, res;
    for (double d : config.gcl_dt_sweep) {
      dts.push_back(d);
      res.push_back(gcl_volume_check(mesh, w, d, phis[2].second).residual_old);
    }
    const double order = fitted_order(dts, res);
    rep.rows.push_back({"two-component w (control), phi=x1*x2: volume residual order", order, 2.0,
                        std::abs(order - 2.0) < 0.2, true,
                        "hypothesis violated on purpose; residual at largest dt " +
                            num(std::abs(res.front()))});
  }

  // Gravity identities with random traces.
  const NodalNormals normals = discrete_normals(mesh);
  const PhysicalParams& p = config.params;
  std::vector<std::array<double, 2>> grav(trials);
  parallel_for(trials, threads, [&](int t) {
    std::mt19937 rng(config.gcl_seed + 1000u + static_cast<unsigned>(t));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> trace(normals.size());
    for (double& v : trace) v = u(rng);
    const MeshVelocity mv =
        solve_mesh_velocity(mesh, normals.nodes, trace, MotionDirection::Vertical);
    const auto r = gcl_gravity_check(mesh, mv.w, dt, p);
    grav[t] = {std::abs(r.residual_old) / r.scale, std::abs(r.residual_new) / r.scale};
  });
  double go = 0.0, gn = 0.0;
  for (const auto& g : grav) {
    go = std::max(go, g[0]);
    gn = std::max(gn, g[1]);
  }
  rep.rows.push_back({"gravity residual on Sigma^n (relative)", go, 1e-9, go <= 1e-9, false,
                      "max over trials"});
  rep.rows.push_back({"gravity residual on Sigma^{n+1} (relative)", gn, 1e-9, gn <= 1e-9, false,
                      "max over trials"});

  // Surface gaps for a fixed smooth trace.
  {
    std::vector<double> trace(normals.size());
    for (int i = 0; i < normals.size(); ++i) {
      trace[i] = 0.5 * std::sin(M_PI * mesh.node(normals.nodes[i]).x / (2.0 * gc.half_width));
    }
    const MeshVelocity mv =
        solve_mesh_velocity(mesh, normals.nodes, trace, MotionDirection::Vertical);
    std::vector<double> dts, g1, g2;
    for (double d : config.gcl_dt_sweep) {
      try {
        const auto r = gcl_surface_gap(mesh, mv.w, MotionDirection::Vertical, d,
                                       [](const Vec2&) { return 1.0; });
        dts.push_back(d);
        g1.push_back(r.gap_old);
        g2.push_back(r.gap_new);
        rep.rows.push_back({"surface gap1 at dt=" + num(d), r.gap_old, -1e-12,
                            r.gap_old >= -1e-12, false, "must be >= -1e-12"});
        rep.rows.push_back({"surface gap2 at dt=" + num(d), r.gap_new, 1e-12, r.gap_new <= 1e-12,
                            false, "must be <= 1e-12"});
      } catch (const HypothesisError& e) {
        rep.rows.push_back({"surface hypothesis at dt=" + num(d), e.min_factor(), 0.0, false, true,
                            std::string("warning: ") + e.what()});
      } catch (const MeshTangledError& e) {
        rep.rows.push_back({"surface hypothesis at dt=" + num(d), 0.0, 0.0, false, true,
                            std::string("warning: ") + e.what()});
      }
    }
    if (dts.size() >= 2) {
      const double o1 = fitted_order(dts, g1);
      const double o2 = fitted_order(dts, g2);
      rep.rows.push_back({"surface gap1 order", o1, 1.9, o1 >= 1.9, false, "log-log slope"});
      rep.rows.push_back({"surface gap2 order", o2, 1.9, o2 >= 1.9, false, "log-log slope"});
    } else {
      rep.rows.push_back({"surface gap order", 0.0, 1.9, false, false,
                          "fewer than two admissible time steps"});
    }
  }
  return rep;
}

void write_gcl_report(std::ostream& out, const GclSuiteReport& report) {
  for (const auto& r : report.rows) {
    out << (r.control ? "CONTROL" : (r.passed ? "PASS   " : "FAIL   ")) << "  " << r.check
        << "  value=" << num(r.value) << "  tol=" << num(r.tolerance);
    if (!r.note.empty()) out << "  (" << r.note << ")";
    out << "\n";
  }
  out << (report.passed() ? "gcl suite passed" : "gcl suite FAILED") << "\n";
}

}  // namespace ale2fluid
