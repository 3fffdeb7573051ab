#ifndef LANDING_LANDING_PROBLEMS_HPP
#define LANDING_LANDING_PROBLEMS_HPP

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "landing/bvp.hpp"
#include "landing/quad_model.hpp"

namespace landing {

/// State (12) + costate (12) + terminal time carried as a constant state.
inline constexpr int kAugmentedDim = 25;
inline constexpr int kTerminalTimeIndex = 24;

class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TimeMode { fixed, free };

/// Landing solves use a looser residual tolerance than the generic solver.
bvp::SolverOptions default_landing_solver_options();

struct LandingOptions {
  quad::QuadParams params;
  bvp::SolverOptions solver = default_landing_solver_options();
  /// A marching step whose fixed-time solve fails is retried through its
  /// midpoint, recursively, at most this many levels deep. 0 disables it.
  int max_step_bisections = 4;
};

/// Terminal-time-rescaled TPBVP with t_f pinned by x25(0) = tf.
bvp::BvpProblem build_fixed_time(const quad::State& x0, double tf, const quad::QuadParams& params);
/// Same system with the pin replaced by H(x(1), lambda(1), u*(1)) = 0.
/// Throws DegenerateInputError when x0 is (numerically) the terminal state.
bvp::BvpProblem build_free_time(const quad::State& x0, const quad::QuadParams& params);

/// Zero path with x25 = tf on a uniform mesh.
bvp::InitialGuess zero_guess(double tf, int nodes);

struct PmpDiagnostics {
  double max_abs_hamiltonian = 0.0;
  double hamiltonian_variation = 0.0;
  double lam_p_drift = 0.0;
  double terminal_residual = 0.0;
  double max_control_gradient = 0.0;
};

struct LandingSolution {
  bvp::BvpSolution path;
  TimeMode mode = TimeMode::free;
  double t_f = 0.0;
  double cost = 0.0;
  PmpDiagnostics pmp;

  const bvp::SolveReport& report() const { return path.report(); }
  quad::State state(double tau) const;
  quad::Costate costate(double tau) const;
  quad::Control control(double tau, const quad::QuadParams& params) const;
};

/// Wraps a converged path, filling t_f, cost and diagnostics.
LandingSolution make_landing_solution(bvp::BvpSolution path, TimeMode mode, const quad::QuadParams& params);

/// t_f * integral of L over tau, composite Simpson on 201 points.
double path_cost(const LandingSolution& solution, const quad::QuadParams& params);

PmpDiagnostics verify_pmp(const LandingSolution& solution, const quad::QuadParams& params);

/// converged, t_f > 0 and the diagnostic thresholds (free-time |H| and
/// lambda_p drift within 10 rel_tol, control gradient within 1e-8, terminal
/// conditions within rel_tol).
bool accepted(const LandingSolution& solution, double rel_tol);

enum class FailureStage { none, invalid_input, degenerate, fixed, free, verification };

std::string to_string(FailureStage s);

struct LandingOutcome {
  FailureStage failure = FailureStage::invalid_input;
  /// Marching step (1-based) that failed when failure == fixed.
  int failed_step = 0;
  /// One report per marching waypoint reached.
  std::vector<bvp::SolveReport> fixed_reports;
  /// Marching steps that were split because the direct solve failed.
  int bisections = 0;
  std::optional<bvp::SolveReport> free_report;
  std::optional<LandingSolution> solution;
  double wall_time = 0.0;
  std::string message;

  bool accepted() const { return failure == FailureStage::none; }
  /// Every fixed-time stage converged (vacuously false for zero init).
  bool fixed_stage_succeeded() const;
};

/// Waypoints evenly spaced on the segment from the origin to x0; the last
/// one is x0 itself.
struct MarchingSchedule {
  int steps = 0;
  std::vector<quad::State> waypoints;
};

MarchingSchedule make_marching_schedule(const quad::State& x0, int steps);

/// Free-time solve from a zero path with x25 = tf_guess.
LandingOutcome solve_zero_init(const quad::State& x0, double tf_guess, const LandingOptions& options = {});

/// Fixed-time solve with t_f = tf_guess from zero, then the free-time solve
/// warm-started from it.
LandingOutcome solve_warm_fixed(const quad::State& x0, double tf_guess, const LandingOptions& options = {});

/// Fixed-time solves along the marching schedule, each warm-started from the
/// previous one, then the free-time solve.
LandingOutcome solve_space_marching(const quad::State& x0, double tf_guess, int steps,
                                    const LandingOptions& options = {});

struct ShootingCheck {
  double terminal_position_error = 0.0;
  double terminal_velocity_error = 0.0;
  quad::State terminal_state;
};

/// RK4 integration of the open-loop dynamics from x(0) under the control
/// extracted from the solution's costates.
ShootingCheck shoot_forward(const LandingSolution& solution, const quad::QuadParams& params, int steps = 2000);

/// 101 uniform tau samples: tau, t, state, costate, control.
void write_trajectory_csv(std::ostream& out, const LandingSolution& solution, const quad::QuadParams& params);

}  // namespace landing

#endif  // LANDING_LANDING_PROBLEMS_HPP
