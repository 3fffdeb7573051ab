#ifndef LANDING_BVP_HPP
#define LANDING_BVP_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Two-point boundary value solver on [0, 1] using three-stage Lobatto IIIa
// collocation (the Simpson/Hermite-cubic scheme), damped Newton on the global
// collocation system, residual control of the C1 cubic interpolant and
// adaptive mesh refinement.
namespace landing::bvp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVecRef = Eigen::Ref<const Vector>;
using VecRef = Eigen::Ref<Vector>;

/// dy/dtau = rhs(tau, y). Exceptions thrown by rhs are treated as evaluation
/// failures of the current iterate.
using RhsFn = std::function<void(double tau, ConstVecRef y, VecRef dydtau)>;
/// Residuals of the two-point conditions; must write exactly dim entries.
using BcFn = std::function<void(ConstVecRef ya, ConstVecRef yb, VecRef residual)>;

struct BvpProblem {
  int dim = 0;
  RhsFn rhs;
  BcFn bc;
};

class MeshCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Strictly increasing nodes from 0 to 1.
class Mesh {
 public:
  Mesh() = default;
  explicit Mesh(std::vector<double> nodes);
  static Mesh uniform(int node_count);

  int size() const { return static_cast<int>(nodes_.size()); }
  int intervals() const { return size() - 1; }
  double operator[](int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  double width(int i) const { return (*this)[i + 1] - (*this)[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  /// Interval index containing tau (the last interval owns tau = 1).
  int locate(double tau) const;

 private:
  std::vector<double> nodes_;
};

struct SolverOptions {
  double rel_tol = 1e-6;
  int max_nodes = 5000;
  int max_newton_iters = 40;
  /// Step reduction factor and number of reductions in the damped Newton
  /// line search.
  double damping_factor = 0.5;
  int max_halvings = 8;
  /// Scaled infinity-norm of the collocation equations that ends a Newton
  /// solve on a fixed mesh.
  double newton_tol = 1e-10;
  int default_initial_nodes = 10;
};

enum class SolveStatus { converged, newton_failed, mesh_cap_exceeded, rhs_error, singular_jacobian };

std::string to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::newton_failed;
  bool converged = false;
  double final_residual = 0.0;
  int node_count = 0;
  int newton_iterations = 0;
  int mesh_refinements = 0;
  double wall_time = 0.0;
  std::string message;
};

struct InitialGuess {
  Mesh mesh;
  Matrix values;  // dim x nodes

  /// Same value at every node of a uniform mesh.
  static InitialGuess constant(const Vector& value, int nodes);
};

/// Nodal values with nodal slopes; the interpolant is the piecewise cubic
/// Hermite polynomial through them.
class BvpSolution {
 public:
  BvpSolution() = default;
  BvpSolution(Mesh mesh, Matrix values, Matrix slopes, SolveReport report = {});

  const Mesh& mesh() const { return mesh_; }
  const Matrix& values() const { return values_; }
  const Matrix& slopes() const { return slopes_; }
  const SolveReport& report() const { return report_; }
  SolveReport& report() { return report_; }
  int dim() const { return static_cast<int>(values_.rows()); }

  Vector value(double tau) const;
  Vector derivative(double tau) const;

  InitialGuess as_guess() const { return {mesh_, values_}; }

 private:
  Mesh mesh_;
  Matrix values_;
  Matrix slopes_;
  SolveReport report_;
};

BvpSolution solve(const BvpProblem& problem, const InitialGuess& guess, const SolverOptions& options = {});

/// Newton solve on the guess mesh only, no residual control. Used by the
/// solver internally and by convergence studies.
BvpSolution solve_on_mesh(const BvpProblem& problem, const InitialGuess& guess, const SolverOptions& options = {});

/// Per-interval RMS of the scaled defect S'(tau) - f(tau, S(tau)), by
/// 5-point Lobatto quadrature. Components are scaled by 1 + |S|.
std::vector<double> estimate_residual(const BvpProblem& problem, const BvpSolution& solution);

/// Residual in (tol, 100 tol) adds the midpoint, from 100 tol up adds the two
/// third-points. Throws MeshCapExceeded when the result exceeds max_nodes.
Mesh refine_mesh(const Mesh& mesh, std::span<const double> residuals, double rel_tol, int max_nodes);

/// Throws std::out_of_range unless 0 <= tau <= 1.
Vector interpolate(const BvpSolution& solution, double tau);

}  // namespace landing::bvp

#endif  // LANDING_BVP_HPP
