#include "doctest.h"
#include "landing/bvp.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace landing::bvp;
using namespace oracles;

TEST_CASE("mesh construction") {
  CHECK_THROWS_AS(Mesh({0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Mesh({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Mesh({0.1, 1.0}), std::invalid_argument);
  const Mesh m = Mesh::uniform(5);
  CHECK(m.size() == 5);
  CHECK(m[2] == 0.5);
  CHECK(m.locate(1.0) == 3);
  CHECK(m.locate(0.0) == 0);
}

TEST_CASE("constant solution") {
  const BvpProblem p{1, [](double, ConstVecRef, VecRef f) { f[0] = 0.0; },
                     [](ConstVecRef ya, ConstVecRef, VecRef r) { r[0] = ya[0] - 3.0; }};
  for (int nodes : {2, 7, 10}) {
    const auto sol = solve(p, InitialGuess::constant(Vector::Zero(1), nodes));
    REQUIRE(sol.report().converged);
    for (int i = 0; i < sol.mesh().size(); ++i) CHECK(sol.values()(0, i) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(interpolate(sol, 0.37)[0] == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("linear harmonic problem against the analytic solution") {
  const auto sol = solve(harmonic_problem(), InitialGuess::constant(Vector::Zero(2), 10));
  REQUIRE(sol.report().converged);
  CHECK(sol.report().final_residual <= 1e-6);
  CHECK(std::abs(interpolate(sol, 0.5)[0] - sin_exact(0.5)) < 1e-6);
  CHECK(std::abs(interpolate(sol, 0.25)[0] - sin_exact(0.25)) < 1e-6);
  CHECK(std::abs(sin_exact(0.5) - 0.569747) < 1e-6);
}

TEST_CASE("nonlinear problem against the shooting oracle") {
  const std::vector<double> oracle = ShootingOracle::solve();
  REQUIRE(oracle.size() == 11);
  const auto sol = solve(exp_problem(), InitialGuess::constant(Vector::Zero(2), 10));
  REQUIRE(sol.report().converged);
  for (int k = 0; k <= 10; ++k) CHECK(std::abs(interpolate(sol, k / 10.0)[0] - oracle[static_cast<std::size_t>(k)]) < 1e-5);
}

TEST_CASE("fourth-order convergence on uniform meshes") {
  std::vector<double> logh, loge;
  for (int nodes : {8, 16, 32}) {
    SolverOptions opt;
    opt.rel_tol = 1.0;  // no refinement
    const auto sol = solve(harmonic_problem(), InitialGuess::constant(Vector::Zero(2), nodes), opt);
    REQUIRE(sol.report().converged);
    REQUIRE(sol.mesh().size() == nodes);
    double err = 0.0;
    for (int i = 0; i < nodes; ++i) err = std::max(err, std::abs(sol.values()(0, i) - sin_exact(sol.mesh()[i])));
    logh.push_back(std::log(1.0 / (nodes - 1)));
    loge.push_back(std::log(err));
  }
  const double mx = (logh[0] + logh[1] + logh[2]) / 3, my = (loge[0] + loge[1] + loge[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 3; ++k) {
    sxy += (logh[k] - mx) * (loge[k] - my);
    sxx += (logh[k] - mx) * (logh[k] - mx);
  }
  const double slope = sxy / sxx;
  MESSAGE("observed order " << slope);
  CHECK(std::abs(slope - 4.0) <= 0.5);
}

TEST_CASE("residual estimate") {
  SUBCASE("linear solution is represented exactly") {
    const BvpProblem p{1, [](double, ConstVecRef, VecRef f) { f[0] = 1.0; },
                       [](ConstVecRef ya, ConstVecRef, VecRef r) { r[0] = ya[0]; }};
    const auto sol = solve(p, InitialGuess::constant(Vector::Zero(1), 6));
    for (double r : estimate_residual(p, sol)) CHECK(r < 1e-14);
  }
  SUBCASE("under-resolved oscillation leaves a positive defect everywhere") {
    const BvpProblem p{1, [](double t, ConstVecRef, VecRef f) { f[0] = std::cos(20.0 * t); },
                       [](ConstVecRef ya, ConstVecRef, VecRef r) { r[0] = ya[0]; }};
    SolverOptions opt;
    opt.rel_tol = 1e3;
    const auto sol = solve(p, InitialGuess::constant(Vector::Zero(1), 5), opt);
    REQUIRE(sol.mesh().size() == 5);
    for (double r : estimate_residual(p, sol)) CHECK(r > 0.0);
  }
  SUBCASE("splitting an interval never increases its residual") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ua(2.0, 15.0), ub(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double a = ua(gen), b = ub(gen);
      const BvpProblem p{1, [a, b](double t, ConstVecRef y, VecRef f) { f[0] = std::cos(a * t) + b * y[0]; },
                         [](ConstVecRef ya, ConstVecRef, VecRef r) { r[0] = ya[0] - 1.0; }};
      SolverOptions opt;
      opt.rel_tol = 1e3;
      const auto coarse = solve(p, InitialGuess::constant(Vector::Zero(1), 7), opt);
      const auto parent = estimate_residual(p, coarse);
      const int k = static_cast<int>(gen() % 6);
      std::vector<double> nodes = coarse.mesh().nodes();
      nodes.insert(nodes.begin() + k + 1, 0.5 * (nodes[k] + nodes[k + 1]));
      const auto fine = solve(p, InitialGuess{Mesh(nodes), Matrix::Zero(1, 8)}, opt);
      const auto child = estimate_residual(p, fine);
      CHECK(child[k] <= parent[k]);
      CHECK(child[k + 1] <= parent[k]);
    }
  }
}

TEST_CASE("mesh refinement rule") {
  const Mesh m = Mesh::uniform(5);
  const double tol = 1e-3;
  std::vector<double> low(4, 1e-4);
  CHECK(refine_mesh(m, low, tol, 100).nodes() == m.nodes());

  std::vector<double> one = low;
  one[1] = 2e-3;
  const Mesh r1 = refine_mesh(m, one, tol, 100);
  CHECK(r1.size() == 6);
  CHECK(r1[2] == doctest::Approx(0.375));

  std::vector<double> severe = low;
  severe[2] = 100.0 * tol;
  const Mesh r2 = refine_mesh(m, severe, tol, 100);
  REQUIRE(r2.size() == 7);
  CHECK(r2[3] == doctest::Approx(0.5 + 0.25 / 3));
  CHECK(r2[4] == doctest::Approx(0.5 + 0.5 / 3));

  CHECK_THROWS_AS(refine_mesh(m, severe, tol, 6), MeshCapExceeded);
  CHECK_THROWS_AS(refine_mesh(m, std::vector<double>(3, 0.0), tol, 100), std::invalid_argument);
}

TEST_CASE("interpolation") {
  const auto sol = solve(harmonic_problem(), InitialGuess::constant(Vector::Zero(2), 10));
  for (int i = 0; i < sol.mesh().size(); ++i) CHECK(interpolate(sol, sol.mesh()[i]) == sol.values().col(i));
  CHECK_THROWS_AS(interpolate(sol, -1e-9), std::out_of_range);
  CHECK_THROWS_AS(interpolate(sol, 1.0 + 1e-9), std::out_of_range);
  // C1 across an interior node.
  const double t = sol.mesh()[3];
  CHECK((sol.derivative(t - 1e-12) - sol.derivative(t + 1e-12)).norm() < 1e-8);
}

TEST_CASE("success flag soundness and determinism") {
  const BvpProblem p = exp_problem();
  const auto a = solve(p, InitialGuess::constant(Vector::Zero(2), 4));
  const auto b = solve(p, InitialGuess::constant(Vector::Zero(2), 4));
  REQUIRE(a.report().converged);
  for (double r : estimate_residual(p, a)) CHECK(r <= 1e-6);
  CHECK(a.report().final_residual <= 1e-6);
  CHECK(a.report().final_residual == b.report().final_residual);
  CHECK(a.report().node_count == b.report().node_count);
  CHECK(a.report().newton_iterations == b.report().newton_iterations);
  CHECK(a.values() == b.values());
}

TEST_CASE("coupled boundary conditions use the general sparse path") {
  const double w = 2.0 * M_PI;
  const BvpProblem p{1, [w](double t, ConstVecRef y, VecRef f) { f[0] = -y[0] + std::cos(w * t); },
                     [](ConstVecRef ya, ConstVecRef yb, VecRef r) { r[0] = ya[0] - yb[0]; }};
  const auto sol = solve(p, InitialGuess::constant(Vector::Zero(1), 10));
  REQUIRE(sol.report().converged);
  const double A = 1.0 / (1.0 + w * w), B = w / (1.0 + w * w);
  for (double t : {0.0, 0.3, 0.77, 1.0}) CHECK(std::abs(interpolate(sol, t)[0] - (A * std::cos(w * t) + B * std::sin(w * t))) < 1e-6);
}

TEST_CASE("failure reporting") {
  SUBCASE("rhs error at the initial guess") {
    const BvpProblem p{1, [](double, ConstVecRef, VecRef) { throw std::runtime_error("boom"); },
                       [](ConstVecRef ya, ConstVecRef, VecRef r) { r[0] = ya[0]; }};
    const auto sol = solve(p, InitialGuess::constant(Vector::Zero(1), 5));
    CHECK_FALSE(sol.report().converged);
    CHECK(sol.report().status == SolveStatus::rhs_error);
    CHECK(sol.report().message == "boom");
  }
  SUBCASE("mesh cap") {
    const BvpProblem p{1, [](double t, ConstVecRef, VecRef f) { f[0] = std::cos(200.0 * t); },
                       [](ConstVecRef ya, ConstVecRef, VecRef r) { r[0] = ya[0]; }};
    SolverOptions opt;
    opt.max_nodes = 40;
    const auto sol = solve(p, InitialGuess::constant(Vector::Zero(1), 10), opt);
    CHECK(sol.report().status == SolveStatus::mesh_cap_exceeded);
    CHECK_FALSE(sol.report().converged);
  }
  SUBCASE("Newton failure on a problem without a solution") {
    // y'' + 5 exp(y) = 0, y(0) = y(1) = 0 has no solution (fold near 3.51).
    const BvpProblem p{2, [](double, ConstVecRef y, VecRef f) { f << y[1], -5.0 * std::exp(y[0]); },
                       [](ConstVecRef ya, ConstVecRef yb, VecRef r) { r << ya[0], yb[0]; }};
    const auto sol = solve(p, InitialGuess::constant(Vector::Zero(2), 10));
    CHECK_FALSE(sol.report().converged);
    CHECK(sol.report().status != SolveStatus::converged);
  }
  SUBCASE("bad guess shape") {
    CHECK_THROWS_AS(solve(harmonic_problem(), InitialGuess{Mesh::uniform(3), Matrix::Zero(1, 3)}),
                    std::invalid_argument);
  }
}
