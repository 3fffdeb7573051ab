#include "landing/landing_problems.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace landing {

using quad::Control;
using quad::Costate;
using quad::QuadParams;
using quad::State;
using quad::Vec12;

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kDegenerateTol = 1e-6;
constexpr int kQuadraturePoints = 201;

void check_initial_state(const State& x0) {
  if (!x0.finite()) throw InvalidStateError("initial state has non-finite components");
  if (!(std::abs(std::cos(x0.eta[1])) >= quad::kMinCosPitch))
    throw InvalidStateError("initial pitch is at the Euler-angle singularity");
}

void augmented_rhs(const QuadParams& params, bvp::ConstVecRef y, bvp::VecRef dy) {
  const State x = State::from_vector(y.head<12>());
  const Costate lam = Costate::from_vector(y.segment<12>(12));
  const double tf = y[kTerminalTimeIndex];
  const Control u = quad::optimal_control(lam.lam_v, lam.lam_w, params);
  dy.head<12>() = tf * quad::dynamics_rhs(x, u, params);
  dy.segment<12>(12) = tf * quad::costate_rhs(x, lam, u, params);
  dy[kTerminalTimeIndex] = 0.0;
}

// Rows 12..23: p, v, w, roll, pitch and yaw costate at tau = 1.
void terminal_conditions(bvp::ConstVecRef yb, bvp::VecRef r) {
  r.segment<3>(12) = yb.segment<3>(0);
  r.segment<3>(15) = yb.segment<3>(3);
  r.segment<3>(18) = yb.segment<3>(9);
  r[21] = yb[6];
  r[22] = yb[7];
  r[23] = yb[12 + 8];
}

double hamiltonian_at(const Eigen::VectorXd& y, const QuadParams& params) {
  const State x = State::from_vector(y.head<12>());
  const Costate lam = Costate::from_vector(y.segment<12>(12));
  return quad::hamiltonian(x, lam, quad::optimal_control(lam.lam_v, lam.lam_w, params), params);
}

bvp::BvpProblem landing_system(const State& x0, const QuadParams& params, bvp::BcFn last_row) {
  check_initial_state(x0);
  params.validate();
  const Vec12 start = x0.to_vector();
  bvp::BvpProblem p;
  p.dim = kAugmentedDim;
  p.rhs = [params](double, bvp::ConstVecRef y, bvp::VecRef dy) { augmented_rhs(params, y, dy); };
  p.bc = [start, last_row = std::move(last_row)](bvp::ConstVecRef ya, bvp::ConstVecRef yb, bvp::VecRef r) {
    r.head<12>() = ya.head<12>() - start;
    terminal_conditions(yb, r);
    last_row(ya, yb, r);
  };
  return p;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Finishes a free-time stage: wraps the path, verifies and classifies.
void finish_free(LandingOutcome& out, bvp::BvpSolution path, const LandingOptions& options) {
  out.free_report = path.report();
  if (!path.report().converged) {
    out.failure = FailureStage::free;
    out.message = bvp::to_string(path.report().status) + ": " + path.report().message;
    return;
  }
  LandingSolution sol = make_landing_solution(std::move(path), TimeMode::free, options.params);
  out.failure = accepted(sol, options.solver.rel_tol) ? FailureStage::none : FailureStage::verification;
  if (out.failure == FailureStage::verification) out.message = "solution failed extremal verification";
  out.solution = std::move(sol);
}

bool is_degenerate(const State& x0) { return x0.to_vector().cwiseAbs().maxCoeff() <= kDegenerateTol; }

LandingOutcome reject(FailureStage stage, std::string message) {
  LandingOutcome out;
  out.failure = stage;
  out.message = std::move(message);
  return out;
}

}  // namespace

bvp::SolverOptions default_landing_solver_options() {
  bvp::SolverOptions o;
  o.rel_tol = 1e-3;
  o.newton_tol = 1e-9;
  return o;
}

bvp::BvpProblem build_fixed_time(const State& x0, double tf, const QuadParams& params) {
  if (!(tf > 0.0) || !std::isfinite(tf)) throw std::invalid_argument("fixed terminal time must be positive");
  return landing_system(x0, params, [tf](bvp::ConstVecRef ya, bvp::ConstVecRef, bvp::VecRef r) {
    r[kTerminalTimeIndex] = ya[kTerminalTimeIndex] - tf;
  });
}

bvp::BvpProblem build_free_time(const State& x0, const QuadParams& params) {
  if (is_degenerate(x0)) throw DegenerateInputError("initial state coincides with the terminal state");
  return landing_system(x0, params, [params](bvp::ConstVecRef, bvp::ConstVecRef yb, bvp::VecRef r) {
    r[kTerminalTimeIndex] = hamiltonian_at(yb, params);
  });
}

bvp::InitialGuess zero_guess(double tf, int nodes) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kAugmentedDim);
  v[kTerminalTimeIndex] = tf;
  return bvp::InitialGuess::constant(v, nodes);
}

State LandingSolution::state(double tau) const { return State::from_vector(path.value(tau).head<12>()); }

Costate LandingSolution::costate(double tau) const { return Costate::from_vector(path.value(tau).segment<12>(12)); }

Control LandingSolution::control(double tau, const QuadParams& params) const {
  const Costate lam = costate(tau);
  return quad::optimal_control(lam.lam_v, lam.lam_w, params);
}

LandingSolution make_landing_solution(bvp::BvpSolution path, TimeMode mode, const QuadParams& params) {
  LandingSolution s;
  s.t_f = path.values()(kTerminalTimeIndex, path.mesh().size() - 1);
  s.path = std::move(path);
  s.mode = mode;
  s.cost = path_cost(s, params);
  s.pmp = verify_pmp(s, params);
  return s;
}

double path_cost(const LandingSolution& solution, const QuadParams& params) {
  const int n = kQuadraturePoints;
  const double h = 1.0 / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * quad::running_cost(solution.control(i * h, params), params);
  }
  return solution.t_f * acc * h / 3.0;
}

PmpDiagnostics verify_pmp(const LandingSolution& solution, const QuadParams& params) {
  PmpDiagnostics d;
  const Eigen::VectorXd y0 = solution.path.value(0.0);
  double hmin = std::numeric_limits<double>::infinity(), hmax = -hmin;
  for (int i = 0; i < kQuadraturePoints; ++i) {
    const double tau = static_cast<double>(i) / (kQuadraturePoints - 1);
    const Eigen::VectorXd y = solution.path.value(tau);
    const State x = State::from_vector(y.head<12>());
    const Costate lam = Costate::from_vector(y.segment<12>(12));
    const Control u = quad::optimal_control(lam.lam_v, lam.lam_w, params);
    const double h = quad::hamiltonian(x, lam, u, params);
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
    d.max_abs_hamiltonian = std::max(d.max_abs_hamiltonian, std::abs(h));
    d.lam_p_drift = std::max(d.lam_p_drift, (y.segment<3>(12) - y0.segment<3>(12)).cwiseAbs().maxCoeff());
    d.max_control_gradient =
        std::max(d.max_control_gradient, quad::hamiltonian_control_gradient(lam, u, params).cwiseAbs().maxCoeff());
  }
  d.hamiltonian_variation = hmax - hmin;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(kAugmentedDim);
  terminal_conditions(solution.path.value(1.0), r);
  d.terminal_residual = r.cwiseAbs().maxCoeff();
  return d;
}

bool accepted(const LandingSolution& s, double rel_tol) {
  const PmpDiagnostics& d = s.pmp;
  if (!s.report().converged || !(s.t_f > 0.0)) return false;
  if (s.mode == TimeMode::free && !(d.max_abs_hamiltonian <= 10.0 * rel_tol)) return false;
  return d.lam_p_drift <= 10.0 * rel_tol && d.max_control_gradient <= 1e-8 && d.terminal_residual <= rel_tol;
}

std::string to_string(FailureStage s) {
  switch (s) {
    case FailureStage::none: return "none";
    case FailureStage::invalid_input: return "invalid_input";
    case FailureStage::degenerate: return "degenerate";
    case FailureStage::fixed: return "fixed";
    case FailureStage::free: return "free";
    case FailureStage::verification: return "verification";
  }
  return "unknown";
}

bool LandingOutcome::fixed_stage_succeeded() const {
  return !fixed_reports.empty() && failure != FailureStage::fixed &&
         std::all_of(fixed_reports.begin(), fixed_reports.end(), [](const auto& r) { return r.converged; });
}

MarchingSchedule make_marching_schedule(const State& x0, int steps) {
  if (steps < 1) throw std::invalid_argument("marching needs at least one step");
  MarchingSchedule s;
  s.steps = steps;
  const Vec12 end = x0.to_vector();
  for (int k = 1; k <= steps; ++k)
    s.waypoints.push_back(k == steps ? x0 : State::from_vector(end * (static_cast<double>(k) / steps)));
  return s;
}

LandingOutcome solve_zero_init(const State& x0, double tf_guess, const LandingOptions& options) {
  const auto t0 = Clock::now();
  if (!(tf_guess > 0.0)) return reject(FailureStage::invalid_input, "terminal time guess must be positive");
  bvp::BvpProblem problem;
  try {
    problem = build_free_time(x0, options.params);
  } catch (const DegenerateInputError& e) {
    return reject(FailureStage::degenerate, e.what());
  } catch (const std::invalid_argument& e) {
    return reject(FailureStage::invalid_input, e.what());
  }
  LandingOutcome out;
  finish_free(out, bvp::solve(problem, zero_guess(tf_guess, options.solver.default_initial_nodes), options.solver),
              options);
  out.wall_time = seconds_since(t0);
  return out;
}

LandingOutcome solve_warm_fixed(const State& x0, double tf_guess, const LandingOptions& options) {
  return solve_space_marching(x0, tf_guess, 1, options);
}

namespace {

// Fixed-time solve at `to` from a guess solved at `from`. A failed step is
// split in half, recursively, up to options.max_step_bisections levels.
bvp::BvpSolution march_to(const Vec12& from, const Vec12& to, double tf, const bvp::InitialGuess& guess, int depth,
                          LandingOutcome& out, const LandingOptions& options) {
  bvp::BvpSolution direct =
      bvp::solve(build_fixed_time(State::from_vector(to), tf, options.params), guess, options.solver);
  if (direct.report().converged || depth >= options.max_step_bisections) return direct;
  ++out.bisections;
  const Vec12 mid = 0.5 * (from + to);
  bvp::BvpSolution half = march_to(from, mid, tf, guess, depth + 1, out, options);
  if (!half.report().converged) return direct;
  bvp::BvpSolution rest = march_to(mid, to, tf, half.as_guess(), depth + 1, out, options);
  return rest.report().converged ? rest : direct;
}

}  // namespace

LandingOutcome solve_space_marching(const State& x0, double tf_guess, int steps, const LandingOptions& options) {
  const auto t0 = Clock::now();
  if (!(tf_guess > 0.0)) return reject(FailureStage::invalid_input, "terminal time guess must be positive");
  if (steps < 1) return reject(FailureStage::invalid_input, "marching needs at least one step");
  if (options.max_step_bisections < 0) return reject(FailureStage::invalid_input, "negative bisection depth");
  try {
    check_initial_state(x0);
    options.params.validate();
  } catch (const std::invalid_argument& e) {
    return reject(FailureStage::invalid_input, e.what());
  }
  if (is_degenerate(x0)) return reject(FailureStage::degenerate, "initial state coincides with the terminal state");

  LandingOutcome out;
  const MarchingSchedule schedule = make_marching_schedule(x0, steps);
  bvp::InitialGuess guess = zero_guess(tf_guess, options.solver.default_initial_nodes);
  Vec12 previous = Vec12::Zero();
  for (int k = 0; k < steps; ++k) {
    const State& target = schedule.waypoints[static_cast<std::size_t>(k)];
    bvp::BvpSolution step = march_to(previous, target.to_vector(), tf_guess, guess, 0, out, options);
    out.fixed_reports.push_back(step.report());
    if (!step.report().converged) {
      out.failure = FailureStage::fixed;
      out.failed_step = k + 1;
      out.message = bvp::to_string(step.report().status) + ": " + step.report().message;
      out.wall_time = seconds_since(t0);
      return out;
    }
    guess = step.as_guess();
    previous = target.to_vector();
  }
  finish_free(out, bvp::solve(build_free_time(x0, options.params), guess, options.solver), options);
  out.wall_time = seconds_since(t0);
  return out;
}

ShootingCheck shoot_forward(const LandingSolution& solution, const QuadParams& params, int steps) {
  const double tf = solution.t_f;
  const double h = tf / steps;
  auto f = [&](double t, const Vec12& x) {
    const double tau = std::clamp(t / tf, 0.0, 1.0);
    return quad::dynamics_rhs(State::from_vector(x), solution.control(tau, params), params);
  };
  Vec12 x = solution.state(0.0).to_vector();
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const Vec12 k1 = f(t, x);
    const Vec12 k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Vec12 k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Vec12 k4 = f(t + h, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  ShootingCheck c;
  c.terminal_state = State::from_vector(x);
  c.terminal_position_error = c.terminal_state.p.norm();
  c.terminal_velocity_error = c.terminal_state.v.norm();
  return c;
}

void write_trajectory_csv(std::ostream& out, const LandingSolution& solution, const QuadParams& params) {
  out << "tau,t,x,y,z,vx,vy,vz,phi,theta,psi,wp,wq,wr,lp1,lp2,lp3,lv1,lv2,lv3,leta1,leta2,leta3,lw1,lw2,lw3,"
         "T,taux,tauy,tauz\n";
  out << std::setprecision(17);
  for (int i = 0; i <= 100; ++i) {
    const double tau = i / 100.0;
    const Eigen::VectorXd y = solution.path.value(tau);
    const Control u = solution.control(tau, params);
    out << tau << ',' << tau * solution.t_f;
    for (int c = 0; c < 24; ++c) out << ',' << y[c];
    out << ',' << u.thrust << ',' << u.torque[0] << ',' << u.torque[1] << ',' << u.torque[2] << '\n';
  }
}

}  // namespace landing
