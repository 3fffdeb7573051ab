#include "landing/bvp.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

namespace landing::bvp {

namespace {

using Clock = std::chrono::steady_clock;

// 5-point Lobatto rule on [-1, 1]; the endpoint defects vanish because the
// interpolant slopes equal f at the nodes, so only interior points are used.
const double kLobattoInner = std::sqrt(3.0 / 7.0);
constexpr double kLobattoWeightInner = 49.0 / 90.0;
constexpr double kLobattoWeightMid = 32.0 / 45.0;

double scaled_max(const Matrix& delta, const Matrix& y) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < delta.cols(); ++j)
    for (Eigen::Index c = 0; c < delta.rows(); ++c) m = std::max(m, std::abs(delta(c, j)) / (1.0 + std::abs(y(c, j))));
  return m;
}

// Cubic Hermite basis at local coordinate s in [0, 1].
inline void hermite_basis(double s, double& h00, double& h10, double& h01, double& h11) {
  const double s2 = s * s, s3 = s2 * s;
  h00 = 2 * s3 - 3 * s2 + 1;
  h10 = s3 - 2 * s2 + s;
  h01 = -2 * s3 + 3 * s2;
  h11 = s3 - s2;
}

inline void hermite_basis_derivative(double s, double& d00, double& d10, double& d01, double& d11) {
  const double s2 = s * s;
  d00 = 6 * s2 - 6 * s;
  d10 = 3 * s2 - 4 * s + 1;
  d01 = -6 * s2 + 6 * s;
  d11 = 3 * s2 - 2 * s;
}

// Value of the Hermite cubic on interval i at tau.
Vector hermite_value(const Mesh& mesh, const Matrix& y, const Matrix& f, int i, double tau) {
  const double h = mesh.width(i);
  const double s = (tau - mesh[i]) / h;
  double h00, h10, h01, h11;
  hermite_basis(s, h00, h10, h01, h11);
  return h00 * y.col(i) + h * h10 * f.col(i) + h01 * y.col(i + 1) + h * h11 * f.col(i + 1);
}

Vector hermite_derivative(const Mesh& mesh, const Matrix& y, const Matrix& f, int i, double tau) {
  const double h = mesh.width(i);
  const double s = (tau - mesh[i]) / h;
  double d00, d10, d01, d11;
  hermite_basis_derivative(s, d00, d10, d01, d11);
  return (d00 * y.col(i) + d01 * y.col(i + 1)) / h + d10 * f.col(i) + d11 * f.col(i + 1);
}

// Solver for the Newton system of the collocation equations. With separated
// boundary conditions (each row depends on only one endpoint) the system is
// staircase-banded and is eliminated block by block with Householder QR;
// coupled conditions fall back to a general sparse LU.
class BlockSolver {
 public:
  bool factor(const Matrix& ba, const Matrix& bb, const std::vector<Matrix>& left, const std::vector<Matrix>& right) {
    n_ = static_cast<int>(ba.cols());
    nodes_ = static_cast<int>(left.size()) + 1;
    top_.clear();
    bottom_.clear();
    separated_ = true;
    for (int r = 0; r < n_; ++r) {
      const bool on_a = (ba.row(r).array() != 0.0).any();
      const bool on_b = (bb.row(r).array() != 0.0).any();
      if (on_a && on_b) separated_ = false;
      if (!on_a && !on_b) return false;
      (on_b ? bottom_ : top_).push_back(r);
    }
    if (!separated_) return factor_sparse(ba, bb, left, right);

    const int p = static_cast<int>(top_.size());
    const int q = static_cast<int>(bottom_.size());
    qr_.assign(static_cast<std::size_t>(nodes_ - 1), Eigen::HouseholderQR<Matrix>());
    couple_.assign(static_cast<std::size_t>(nodes_ - 1), Matrix());

    Matrix carry(p, n_);
    for (int k = 0; k < p; ++k) carry.row(k) = ba.row(top_[static_cast<std::size_t>(k)]);

    Matrix work(p + n_, 2 * n_);
    for (int i = 0; i + 1 < nodes_; ++i) {
      work.setZero();
      work.topLeftCorner(p, n_) = carry;
      work.bottomLeftCorner(n_, n_) = left[static_cast<std::size_t>(i)];
      work.bottomRightCorner(n_, n_) = right[static_cast<std::size_t>(i)];
      auto& qr = qr_[static_cast<std::size_t>(i)];
      qr.compute(work.leftCols(n_));
      const double scale = std::max(1.0, work.leftCols(n_).cwiseAbs().maxCoeff());
      const auto diag = qr.matrixQR().diagonal();
      for (int k = 0; k < n_; ++k)
        if (!(std::abs(diag[k]) > 1e-13 * scale)) return false;
      Matrix rest = work.rightCols(n_);
      rest.applyOnTheLeft(qr.householderQ().adjoint());
      couple_[static_cast<std::size_t>(i)] = rest.topRows(n_);
      carry = rest.bottomRows(p);
    }
    Matrix last(n_, n_);
    last.topRows(p) = carry;
    for (int k = 0; k < q; ++k) last.row(p + k) = bb.row(bottom_[static_cast<std::size_t>(k)]);
    last_.compute(last);
    return last_.isInvertible();
  }

  /// Solves J delta = (rhs_bc; rhs_phi), delta laid out dim x nodes.
  void solve(const Vector& rhs_bc, const Matrix& rhs_phi, Matrix& delta) const {
    delta.resize(n_, nodes_);
    if (!separated_) {
      Vector b(static_cast<Eigen::Index>(n_) * nodes_);
      b.head(n_) = rhs_bc;
      b.tail(static_cast<Eigen::Index>(n_) * (nodes_ - 1)) = rhs_phi.reshaped();
      const Vector x = sparse_->solve(b);
      delta = x.reshaped(n_, nodes_);
      return;
    }
    const int p = static_cast<int>(top_.size());
    const int q = static_cast<int>(bottom_.size());
    Vector carry(p);
    for (int k = 0; k < p; ++k) carry[k] = rhs_bc[top_[static_cast<std::size_t>(k)]];
    Matrix tops(n_, nodes_ - 1);
    Vector z(p + n_);
    for (int i = 0; i + 1 < nodes_; ++i) {
      z.head(p) = carry;
      z.tail(n_) = rhs_phi.col(i);
      z.applyOnTheLeft(qr_[static_cast<std::size_t>(i)].householderQ().adjoint());
      tops.col(i) = z.head(n_);
      carry = z.tail(p);
    }
    Vector last(n_);
    last.head(p) = carry;
    for (int k = 0; k < q; ++k) last[p + k] = rhs_bc[bottom_[static_cast<std::size_t>(k)]];
    delta.col(nodes_ - 1) = last_.solve(last);
    for (int i = nodes_ - 2; i >= 0; --i) {
      const auto& qr = qr_[static_cast<std::size_t>(i)];
      const Vector b = tops.col(i) - couple_[static_cast<std::size_t>(i)] * delta.col(i + 1);
      delta.col(i) = qr.matrixQR().topLeftCorner(n_, n_).triangularView<Eigen::Upper>().solve(b);
    }
  }

 private:
  bool factor_sparse(const Matrix& ba, const Matrix& bb, const std::vector<Matrix>& left,
                     const std::vector<Matrix>& right) {
    using Triplet = Eigen::Triplet<double>;
    const Eigen::Index total = static_cast<Eigen::Index>(n_) * nodes_;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(2 * n_ * n_ * nodes_));
    const int lastcol = n_ * (nodes_ - 1);
    for (int r = 0; r < n_; ++r)
      for (int c = 0; c < n_; ++c) {
        if (ba(r, c) != 0.0) trip.emplace_back(r, c, ba(r, c));
        if (bb(r, c) != 0.0) trip.emplace_back(r, lastcol + c, bb(r, c));
      }
    for (int i = 0; i + 1 < nodes_; ++i) {
      const int row0 = n_ * (i + 1);
      for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) {
          trip.emplace_back(row0 + r, n_ * i + c, left[static_cast<std::size_t>(i)](r, c));
          trip.emplace_back(row0 + r, n_ * (i + 1) + c, right[static_cast<std::size_t>(i)](r, c));
        }
    }
    Eigen::SparseMatrix<double> a(total, total);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    sparse_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    sparse_->compute(a);
    return sparse_->info() == Eigen::Success;
  }

  int n_ = 0;
  int nodes_ = 0;
  bool separated_ = true;
  std::vector<int> top_, bottom_;
  std::vector<Eigen::HouseholderQR<Matrix>> qr_;
  std::vector<Matrix> couple_;
  Eigen::FullPivLU<Matrix> last_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> sparse_;
};

// Collocation equations on one mesh:
//   y_mid = (y_i + y_{i+1})/2 - h/8 (f_{i+1} - f_i)
//   phi_i = y_{i+1} - y_i - h/6 (f_i + 4 f_mid + f_{i+1})
class Collocation {
 public:
  Collocation(const BvpProblem& problem, const Mesh& mesh)
      : problem_(problem), mesh_(mesh), n_(problem.dim), nodes_(mesh.size()) {}

  struct Eval {
    Matrix f, ymid, fmid, phi;
    Vector bc;
  };

  // Throws whatever rhs/bc throw.
  void evaluate(const Matrix& y, Eval& e) const {
    e.f.resize(n_, nodes_);
    e.ymid.resize(n_, nodes_ - 1);
    e.fmid.resize(n_, nodes_ - 1);
    e.phi.resize(n_, nodes_ - 1);
    e.bc.resize(n_);
    for (int i = 0; i < nodes_; ++i) problem_.rhs(mesh_[i], y.col(i), e.f.col(i));
    for (int i = 0; i + 1 < nodes_; ++i) {
      const double h = mesh_.width(i);
      e.ymid.col(i) = 0.5 * (y.col(i) + y.col(i + 1)) - (h / 8.0) * (e.f.col(i + 1) - e.f.col(i));
      problem_.rhs(mesh_[i] + 0.5 * h, e.ymid.col(i), e.fmid.col(i));
      e.phi.col(i) = y.col(i + 1) - y.col(i) - (h / 6.0) * (e.f.col(i) + 4.0 * e.fmid.col(i) + e.f.col(i + 1));
    }
    problem_.bc(y.col(0), y.col(nodes_ - 1), e.bc);
    if (!e.f.allFinite() || !e.fmid.allFinite() || !e.bc.allFinite())
      throw std::runtime_error("non-finite right-hand side or boundary residual");
  }

  double residual_norm(const Matrix& y, const Eval& e) const {
    double m = e.bc.cwiseAbs().maxCoeff();
    for (int i = 0; i + 1 < nodes_; ++i)
      for (int c = 0; c < n_; ++c) {
        const double s = 1.0 + std::max(std::abs(y(c, i)), std::abs(y(c, i + 1)));
        m = std::max(m, std::abs(e.phi(c, i)) / s);
      }
    return m;
  }

  // Forward-difference Jacobians of rhs at nodes and midpoints, combined by
  // the chain rule into the two blocks of each interval.
  void jacobian(const Matrix& y, const Eval& e, Matrix& ba, Matrix& bb, std::vector<Matrix>& left,
                std::vector<Matrix>& right) const {
    std::vector<Matrix> jn(static_cast<std::size_t>(nodes_));
    for (int i = 0; i < nodes_; ++i) jn[static_cast<std::size_t>(i)] = rhs_jacobian(mesh_[i], y.col(i), e.f.col(i));
    left.resize(static_cast<std::size_t>(nodes_ - 1));
    right.resize(static_cast<std::size_t>(nodes_ - 1));
    const Matrix eye = Matrix::Identity(n_, n_);
    for (int i = 0; i + 1 < nodes_; ++i) {
      const double h = mesh_.width(i);
      const Matrix jm = rhs_jacobian(mesh_[i] + 0.5 * h, e.ymid.col(i), e.fmid.col(i));
      const Matrix& ji = jn[static_cast<std::size_t>(i)];
      const Matrix& jj = jn[static_cast<std::size_t>(i + 1)];
      left[static_cast<std::size_t>(i)] = -eye - (h / 6.0) * (ji + 4.0 * jm * (0.5 * eye + (h / 8.0) * ji));
      right[static_cast<std::size_t>(i)] = eye - (h / 6.0) * (jj + 4.0 * jm * (0.5 * eye - (h / 8.0) * jj));
    }
    bc_jacobian(y.col(0), y.col(nodes_ - 1), e.bc, ba, bb);
  }

 private:
  static double fd_step(double v) { return std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(v)); }

  Matrix rhs_jacobian(double tau, const Vector& y, const Vector& f0) const {
    Matrix jac(n_, n_);
    Vector yp = y;
    Vector fp(n_);
    for (int k = 0; k < n_; ++k) {
      const double step = fd_step(y[k]);
      yp[k] = y[k] + step;
      const double actual = yp[k] - y[k];
      problem_.rhs(tau, yp, fp);
      jac.col(k) = (fp - f0) / actual;
      yp[k] = y[k];
    }
    return jac;
  }

  void bc_jacobian(const Vector& ya, const Vector& yb, const Vector& g0, Matrix& ba, Matrix& bb) const {
    ba.resize(n_, n_);
    bb.resize(n_, n_);
    Vector gp(n_);
    Vector pa = ya, pb = yb;
    for (int k = 0; k < n_; ++k) {
      const double step = fd_step(ya[k]);
      pa[k] = ya[k] + step;
      problem_.bc(pa, yb, gp);
      ba.col(k) = (gp - g0) / (pa[k] - ya[k]);
      pa[k] = ya[k];
    }
    for (int k = 0; k < n_; ++k) {
      const double step = fd_step(yb[k]);
      pb[k] = yb[k] + step;
      problem_.bc(ya, pb, gp);
      bb.col(k) = (gp - g0) / (pb[k] - yb[k]);
      pb[k] = yb[k];
    }
  }

  const BvpProblem& problem_;
  const Mesh& mesh_;
  int n_;
  int nodes_;
};

struct NewtonOutcome {
  SolveStatus status = SolveStatus::newton_failed;
  int iterations = 0;
  std::string message;
  Matrix f;  // slopes at the final iterate
};

NewtonOutcome newton(const BvpProblem& problem, const Mesh& mesh, Matrix& y, const SolverOptions& opt) {
  NewtonOutcome out;
  Collocation col(problem, mesh);
  Collocation::Eval cur, trial;
  try {
    col.evaluate(y, cur);
  } catch (const std::exception& ex) {
    out.status = SolveStatus::rhs_error;
    out.message = ex.what();
    return out;
  }

  Matrix ba, bb;
  std::vector<Matrix> left, right;
  BlockSolver lin;
  Matrix delta, dbar, yt;
  for (int it = 0; it <= opt.max_newton_iters; ++it) {
    if (col.residual_norm(y, cur) <= opt.newton_tol) {
      out.status = SolveStatus::converged;
      out.f = cur.f;
      return out;
    }
    if (it == opt.max_newton_iters) break;
    try {
      col.jacobian(y, cur, ba, bb, left, right);
    } catch (const std::exception& ex) {
      out.status = SolveStatus::rhs_error;
      out.message = ex.what();
      return out;
    }
    if (!lin.factor(ba, bb, left, right)) {
      out.status = SolveStatus::singular_jacobian;
      out.message = "singular collocation Jacobian";
      return out;
    }
    lin.solve(-cur.bc, -cur.phi, delta);
    if (!delta.allFinite()) {
      out.status = SolveStatus::singular_jacobian;
      out.message = "non-finite Newton step";
      return out;
    }
    const double dnorm = scaled_max(delta, y);
    ++out.iterations;

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, alpha *= opt.damping_factor) {
      yt = y + alpha * delta;
      try {
        col.evaluate(yt, trial);
      } catch (const std::exception&) {
        continue;
      }
      if (col.residual_norm(yt, trial) <= opt.newton_tol) {
        accepted = true;
        break;
      }
      // Natural monotonicity test with the frozen Jacobian.
      lin.solve(-trial.bc, -trial.phi, dbar);
      if (dbar.allFinite() && scaled_max(dbar, yt) <= (1.0 - 0.5 * alpha) * dnorm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.message = "damped Newton step rejected after maximum step reductions";
      return out;
    }
    y.swap(yt);
    std::swap(cur, trial);
    if (alpha == 1.0 && dnorm <= opt.newton_tol) {
      out.status = SolveStatus::converged;
      out.f = cur.f;
      return out;
    }
  }
  out.message = "Newton iteration limit reached";
  return out;
}

void validate_guess(const BvpProblem& problem, const InitialGuess& guess) {
  if (problem.dim <= 0 || !problem.rhs || !problem.bc) throw std::invalid_argument("incomplete BVP definition");
  if (guess.mesh.size() < 2) throw std::invalid_argument("initial mesh needs at least two nodes");
  if (guess.values.rows() != problem.dim || guess.values.cols() != guess.mesh.size())
    throw std::invalid_argument("initial guess shape does not match dim x nodes");
}

Matrix resample(const BvpSolution& sol, const Mesh& target) {
  Matrix out(sol.dim(), target.size());
  for (int i = 0; i < target.size(); ++i) out.col(i) = sol.value(target[i]);
  return out;
}


}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::newton_failed: return "newton_failed";
    case SolveStatus::mesh_cap_exceeded: return "mesh_cap_exceeded";
    case SolveStatus::rhs_error: return "rhs_error";
    case SolveStatus::singular_jacobian: return "singular_jacobian";
  }
  return "unknown";
}

Mesh::Mesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw std::invalid_argument("mesh needs at least two nodes");
  if (nodes_.front() != 0.0 || nodes_.back() != 1.0) throw std::invalid_argument("mesh must span [0, 1]");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("mesh nodes must be strictly increasing");
}

Mesh Mesh::uniform(int node_count) {
  if (node_count < 2) throw std::invalid_argument("mesh needs at least two nodes");
  std::vector<double> x(static_cast<std::size_t>(node_count));
  for (int i = 0; i < node_count; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(i) / (node_count - 1);
  x.back() = 1.0;
  return Mesh(std::move(x));
}

int Mesh::locate(double tau) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau);
  int i = static_cast<int>(it - nodes_.begin()) - 1;
  return std::clamp(i, 0, intervals() - 1);
}

InitialGuess InitialGuess::constant(const Vector& value, int nodes) {
  InitialGuess g{Mesh::uniform(nodes), Matrix(value.size(), nodes)};
  g.values.colwise() = value;
  return g;
}

BvpSolution::BvpSolution(Mesh mesh, Matrix values, Matrix slopes, SolveReport report)
    : mesh_(std::move(mesh)), values_(std::move(values)), slopes_(std::move(slopes)), report_(std::move(report)) {}

Vector BvpSolution::value(double tau) const {
  const int i = mesh_.locate(tau);
  if (tau == mesh_[i]) return values_.col(i);
  if (tau == mesh_[i + 1]) return values_.col(i + 1);
  return hermite_value(mesh_, values_, slopes_, i, tau);
}

Vector BvpSolution::derivative(double tau) const {
  return hermite_derivative(mesh_, values_, slopes_, mesh_.locate(tau), tau);
}

Vector interpolate(const BvpSolution& solution, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::out_of_range("interpolation point outside [0, 1]");
  return solution.value(tau);
}

std::vector<double> estimate_residual(const BvpProblem& problem, const BvpSolution& solution) {
  const Mesh& mesh = solution.mesh();
  std::vector<double> res(static_cast<std::size_t>(mesh.intervals()));
  Vector f(problem.dim);
  const double offsets[3] = {-kLobattoInner, 0.0, kLobattoInner};
  const double weights[3] = {kLobattoWeightInner, kLobattoWeightMid, kLobattoWeightInner};
  for (int i = 0; i < mesh.intervals(); ++i) {
    const double h = mesh.width(i);
    const double mid = mesh[i] + 0.5 * h;
    double acc = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double tau = mid + 0.5 * h * offsets[q];
      const Vector s = hermite_value(mesh, solution.values(), solution.slopes(), i, tau);
      const Vector ds = hermite_derivative(mesh, solution.values(), solution.slopes(), i, tau);
      problem.rhs(tau, s, f);
      const double d = ((ds - f).array().abs() / (1.0 + s.array().abs())).maxCoeff();
      acc += weights[q] * d * d;
    }
    // Mean over the interval: the Lobatto weights sum to 2 on [-1, 1].
    res[static_cast<std::size_t>(i)] = std::sqrt(0.5 * acc);
  }
  return res;
}

Mesh refine_mesh(const Mesh& mesh, std::span<const double> residuals, double rel_tol, int max_nodes) {
  if (static_cast<int>(residuals.size()) != mesh.intervals())
    throw std::invalid_argument("one residual per mesh interval required");
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(mesh.size()) * 2);
  for (int i = 0; i < mesh.intervals(); ++i) {
    const double a = mesh[i], h = mesh.width(i);
    const double r = residuals[static_cast<std::size_t>(i)];
    x.push_back(a);
    if (r >= 100.0 * rel_tol) {
      x.push_back(a + h / 3.0);
      x.push_back(a + 2.0 * h / 3.0);
    } else if (r > rel_tol) {
      x.push_back(a + 0.5 * h);
    }
  }
  x.push_back(1.0);
  if (static_cast<int>(x.size()) > max_nodes)
    throw MeshCapExceeded("refined mesh needs " + std::to_string(x.size()) + " nodes, cap is " +
                          std::to_string(max_nodes));
  return Mesh(std::move(x));
}

BvpSolution solve_on_mesh(const BvpProblem& problem, const InitialGuess& guess, const SolverOptions& options) {
  validate_guess(problem, guess);
  const auto start = Clock::now();
  Matrix y = guess.values;
  NewtonOutcome nt = newton(problem, guess.mesh, y, options);
  SolveReport rep;
  rep.status = nt.status;
  rep.converged = nt.status == SolveStatus::converged;
  rep.newton_iterations = nt.iterations;
  rep.node_count = guess.mesh.size();
  rep.message = nt.message;
  if (!rep.converged) nt.f = Matrix::Zero(y.rows(), y.cols());
  rep.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return BvpSolution(guess.mesh, std::move(y), std::move(nt.f), rep);
}

BvpSolution solve(const BvpProblem& problem, const InitialGuess& guess, const SolverOptions& options) {
  validate_guess(problem, guess);
  if (!(options.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (options.max_nodes < guess.mesh.size()) throw std::invalid_argument("max_nodes below initial node count");

  const auto start = Clock::now();
  SolveReport rep;
  Mesh mesh = guess.mesh;
  Matrix y = guess.values;
  Vector bc(problem.dim);
  while (true) {
    NewtonOutcome nt = newton(problem, mesh, y, options);
    rep.newton_iterations += nt.iterations;
    rep.node_count = mesh.size();
    if (nt.status != SolveStatus::converged) {
      rep.status = nt.status;
      rep.message = nt.message;
      rep.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      return BvpSolution(mesh, std::move(y), Matrix::Zero(problem.dim, mesh.size()), rep);
    }
    BvpSolution current(mesh, y, std::move(nt.f));
    std::vector<double> res;
    try {
      res = estimate_residual(problem, current);
      problem.bc(y.col(0), y.col(mesh.size() - 1), bc);
    } catch (const std::exception& ex) {
      rep.status = SolveStatus::rhs_error;
      rep.message = ex.what();
      rep.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      current.report() = rep;
      return current;
    }
    const double worst = *std::max_element(res.begin(), res.end());
    rep.final_residual = std::max(worst, bc.cwiseAbs().maxCoeff());
    if (rep.final_residual <= options.rel_tol) {
      rep.status = SolveStatus::converged;
      rep.converged = true;
      rep.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      current.report() = rep;
      return current;
    }
    try {
      mesh = refine_mesh(mesh, res, options.rel_tol, options.max_nodes);
    } catch (const MeshCapExceeded& ex) {
      rep.status = SolveStatus::mesh_cap_exceeded;
      rep.message = ex.what();
      rep.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
      current.report() = rep;
      return current;
    }
    ++rep.mesh_refinements;
    y = resample(current, mesh);
  }
}

}  // namespace landing::bvp
