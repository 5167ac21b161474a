// One PASS/FAIL line per acceptance criterion. Run artifacts go to
// ./acceptance_runs/<name>.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "ale2fluid/scenarios.hpp"

using namespace ale2fluid;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream line;
  line << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << o.detail << "; " << s
       << " s, budget " << budget_s << " s]";
  if (s > budget_s) line << " (over time budget)";
  std::cout << line.str() << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

RunConfig gravity() {
  RunConfig c = default_config(ScenarioKind::GravityRelaxation);
  c.interface_every = 20;
  return c;
}

RunConfig couette() {
  RunConfig c = default_config(ScenarioKind::CouetteGnbc);
  c.interface_every = 40;
  return c;
}

RunRecord run(RunConfig c, const std::string& name) {
  c.output_dir = "acceptance_runs/" + name;
  return run_simulation(c);
}

double initial_k(const RunRecord& r) { return r.reports.front().K; }

double max_balance(const RunRecord& r, int first_step = 1) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& e : r.reports) {
    if (e.step >= first_step && std::isfinite(e.balance)) m = std::max(m, e.balance);
  }
  return m;
}

// Largest area drift relative to the initial area, per 100 steps.
double drift_per_100(const std::vector<double>& area) {
  double d = 0.0;
  for (std::size_t i = 1; i < area.size(); ++i) {
    const double per = std::abs(area[i] - area[0]) / area[0] / std::max(1.0, i / 100.0);
    d = std::max(d, per);
  }
  return d;
}

double pv_at(const RunRecord& r, double t) {
  for (const auto& e : r.reports) {
    if (e.time >= t - 1e-9) return e.Pv;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double first_pv(const RunRecord& r) {
  for (const auto& e : r.reports) {
    if (e.step > 0) return e.Pv;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double max_pv(const RunRecord& r) {
  double m = 0.0;
  for (const auto& e : r.reports) m = std::max(m, e.Pv);
  return m;
}

}  // namespace

int main() {
  std::cout.precision(4);
  GclSuiteReport gcl;
  double gcl_seconds = 0.0;
  auto rows = [&](const std::string& prefix) {
    Outcome o{true, ""};
    double worst = 0.0;
    int n = 0;
    for (const auto& r : gcl.rows) {
      if (r.control || r.check.rfind(prefix, 0) != 0) continue;
      ++n;
      o.pass = o.pass && r.passed;
      if (!r.passed) o.detail += r.check + "=" + fmt(r.value) + " ";
      if (r.check.find("order") == std::string::npos) worst = std::max(worst, std::abs(r.value));
    }
    if (n == 0) return Outcome{false, "no rows"};
    o.detail += std::to_string(n) + " checks, largest |value| " + fmt(worst) + ", suite " +
                fmt(gcl_seconds) + " s";
    return o;
  };
  criterion("GCL volume identity", 10, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    gcl = run_gcl_suite(default_config(ScenarioKind::GclSuite), thread_cap());
    gcl_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rows("volume residual");
  });
  criterion("gravity GCL identities", 10, [&] { return rows("gravity residual"); });
  criterion("surface GCL gaps and order", 30, [&] {
    Outcome o = rows("surface gap");
    for (const auto& r : gcl.rows) {
      if (r.check.find("order") != std::string::npos) o.detail += ", " + r.check + " " + fmt(r.value);
    }
    return o;
  });

  criterion("energy identity without gravity or tension (M1, 50 steps)", 120, [] {
    RunConfig c = gravity();
    c.params.g = 0.0;
    c.initial_velocity = InitialVelocity::Vortex;
    c.vortex_amplitude = 0.25;  // amplitude 1 tangles the mesh near step 40
    c.end_time = 50 * c.scheme.dt;
    const RunRecord r = run(c, "energy_identity");
    double m = 0.0;
    int n = 0;
    for (const auto& e : r.reports) {
      if (!std::isfinite(e.balance)) continue;
      m = std::max(m, std::abs(e.balance));
      ++n;
    }
    const double tol = 1e-8 * (initial_k(r) + 1.0);
    return Outcome{r.completed && n >= 49 && m <= tol,
                   "max |balance| " + fmt(m) + " over " + std::to_string(n) + " steps, tol " +
                       fmt(tol) + (r.completed ? "" : ", " + r.failure)};
  });

  RunRecord m1;
  criterion("M1 next: gravity spurious power is nonnegative", 600, [&] {
    m1 = run(gravity(), "gravity_m1_next");
    double lo = std::numeric_limits<double>::infinity();
    int above = 0, n = 0;
    for (const auto& e : m1.reports) {
      if (!std::isfinite(e.eps_g)) continue;
      lo = std::min(lo, e.eps_g);
      ++n;
      if (std::isfinite(e.balance) && e.balance > e.euler) ++above;
    }
    return Outcome{m1.completed && n > 0 && lo >= -1e-12,
                   "min eps_g " + fmt(lo) + " over " + std::to_string(n) +
                       " steps; balance > euler_diss at " + std::to_string(above) + " steps"};
  });

  criterion("M2: balance nonpositive", 1800, [] {
    RunConfig c = gravity();
    c.scheme.scheme = MotionScheme::M2;
    const RunRecord r = run(c, "gravity_m2_next");
    const double m = max_balance(r);
    const double tol = 1e-8 * (initial_k(r) + 1.0);
    return Outcome{r.completed && m <= tol,
                   "max balance " + fmt(m) + ", tol " + fmt(tol) + ", fixed-point iterations <= " +
                       std::to_string(r.max_fixed_point_iterations) +
                       (r.completed ? "" : ", " + r.failure)};
  });

  criterion("instability with gravity on the previous domain", 600, [] {
    RunConfig c = gravity();
    c.scheme.dt = 0.1;
    c.scheme.gravity_domain = GravityDomain::Prev;
    const RunRecord prev = run(c, "gravity_m1_prev_dt0.1");
    c.scheme.gravity_domain = GravityDomain::Next;
    const RunRecord next = run(c, "gravity_m1_next_dt0.1");
    const double growth = max_pv(prev) / first_pv(prev);
    const double bound = max_pv(next) / pv_at(next, 0.5);
    return Outcome{growth > 10.0 && next.completed && bound < 3.0,
                   "prev: max Pv / first Pv = " + fmt(growth) +
                       (prev.completed ? "" : " (stopped: " + prev.failure + ")") +
                       "; next: max Pv / Pv(0.5) = " + fmt(bound)};
  });

  criterion("M3: next is stable, half has smaller integrated |balance|", 900, [] {
    RunConfig c = gravity();
    c.scheme.scheme = MotionScheme::M3;
    const RunRecord next = run(c, "gravity_m3_next");
    c.scheme.gravity_domain = GravityDomain::Half;
    const RunRecord half = run(c, "gravity_m3_half");
    // Step 1 has no previous velocity and uses the explicit trace by design,
    // so the per-step bound applies from step 2 on.
    const double tol = 1e-8 * (initial_k(next) + 1.0);
    const double m = max_balance(next, 2);
    const auto sn = summarize_balance(next.reports, c.scheme.dt, 0.0, c.end_time);
    const auto sh = summarize_balance(half.reports, c.scheme.dt, 0.0, c.end_time);
    return Outcome{next.completed && half.completed && next.m3_fell_back && m <= tol &&
                       sh.integral_abs < sn.integral_abs,
                   "next max balance over steps >= 2 " + fmt(m) + " (tol " + fmt(tol) +
                       "), fallback step 1 balance " + fmt(next.reports[1].balance) +
                       "; integral |balance| next " + fmt(sn.integral_abs) + ", half " +
                       fmt(sh.integral_abs)};
  });

  RunRecord cs;
  criterion("Couette steady contact line (symmetric, t = 160)", 1800, [&] {
    cs = run(couette(), "couette_symmetric");
    if (cs.couette.size() < 2) return Outcome{false, "no samples"};
    // Speed of the contact point itself: fluid velocity along the wall at the
    // contact node, and the rate of change of its abscissa.
    const CouetteSample& s = cs.couette.back();
    const CouetteSample& before = cs.couette[cs.couette.size() - 2];
    const double wall_u = s.cl_slip + couette().couette_speed;
    const double drift = (s.cl_x - before.cl_x) / couette().scheme.dt;
    const double speed = std::max(std::abs(wall_u), std::abs(drift));
    return Outcome{cs.completed && speed < 0.01 && std::abs(s.far_u - 0.21) <= 0.02,
                   "contact-point speed " + fmt(speed) + " (u " + fmt(wall_u) + ", dx/dt " +
                       fmt(drift) + ", slip to wall " + fmt(s.cl_slip) + "), far-wall speed " +
                       fmt(s.far_u) + (cs.completed ? "" : ", " + cs.failure)};
  });

  criterion("surface-tension spurious power ordered in gamma", 2700, [] {
    std::vector<double> integrals, peaks;
    double lo = std::numeric_limits<double>::infinity();
    bool completed = true;
    for (double gamma : {5.5, 11.0, 55.0}) {
      RunConfig c = couette();
      c.params.gamma = gamma;
      c.scheme.dt = 0.05;  // explicit tension at dt = 0.5 is unstable for gamma >= 11
      c.end_time = 20.0;
      const RunRecord r = run(c, "couette_gamma_" + fmt(gamma));
      completed = completed && r.completed;
      const auto s = summarize_balance(r.reports, c.scheme.dt, 0.0, 20.0);
      lo = std::min(lo, s.min_balance);
      integrals.push_back(s.integral);
      double peak = 0.0;
      for (const auto& e : r.reports) {
        if (std::isfinite(e.balance)) peak = std::max(peak, e.balance);
      }
      peaks.push_back(peak);
    }
    const bool up = integrals[0] < integrals[1] && integrals[1] < integrals[2];
    const bool down = integrals[0] > integrals[1] && integrals[1] > integrals[2];
    return Outcome{completed && lo >= -1e-8 && (up || down),
                   "min balance " + fmt(lo) + ", integrals " + fmt(integrals[0]) + ", " +
                       fmt(integrals[1]) + ", " + fmt(integrals[2]) + " (peaks " + fmt(peaks[0]) +
                       ", " + fmt(peaks[1]) + ", " + fmt(peaks[2]) + ")"};
  });

  criterion("mass conservation in both scenarios", 1, [&] {
    const double g = std::max(drift_per_100(m1.area1), drift_per_100(m1.area2));
    const double c = std::max(drift_per_100(cs.area1), drift_per_100(cs.area2));
    if (m1.area1.empty() || cs.area1.empty()) return Outcome{false, "runs missing"};
    return Outcome{g <= 1e-6 && c <= 1e-6,
                   "relative drift per 100 steps: gravity " + fmt(g) + ", Couette " + fmt(c)};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
