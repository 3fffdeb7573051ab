#include "doctest.h"
#include "landing/quad_model.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace landing::quad;

namespace {

constexpr double kPi = std::numbers::pi;

struct Rng {
  std::mt19937_64 gen{20240601};
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  Vec3 vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  State state() {
    State x;
    x.p = vec3(-20, 20);
    x.v = vec3(-3, 3);
    x.eta = {uniform(-1.2, 1.2), uniform(-1.2, 1.2), uniform(-kPi, kPi)};
    x.w = vec3(-1, 1);
    return x;
  }
  Costate costate() { return Costate::from_vector(Vec12::NullaryExpr([&] { return uniform(-3, 3); })); }
  Control control() { return Control{uniform(0, 40), vec3(-2, 2)}; }
};

}  // namespace

TEST_CASE("rotation matrix closed form") {
  CHECK(rotation_matrix(Vec3::Zero()).isIdentity(0.0));

  Mat3 yaw90;
  yaw90 << 0, 1, 0, -1, 0, 0, 0, 0, 1;
  CHECK((rotation_matrix({0, 0, kPi / 2}) - yaw90).cwiseAbs().maxCoeff() < 1e-15);

  const double h = std::sqrt(2.0) / 2;
  Mat3 roll45;
  roll45 << 1, 0, 0, 0, h, h, 0, -h, h;
  CHECK((rotation_matrix({kPi / 4, 0, 0}) - roll45).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rotation matrix is orthonormal with unit determinant") {
  Rng rng;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 eta{rng.uniform(-kPi, kPi), rng.uniform(-kPi / 2 + 0.01, kPi / 2 - 0.01), rng.uniform(-kPi, kPi)};
    const Mat3 r = rotation_matrix(eta);
    CHECK((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("kinematic matrix") {
  CHECK(kinematic_matrix(Vec3::Zero()).isIdentity(0.0));

  Mat3 roll90;
  roll90 << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((kinematic_matrix({kPi / 2, 0, 0}) - roll90).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(kinematic_matrix({0, kPi / 2 - 1e-12, 0}), SingularAttitudeError);
  CHECK_THROWS_AS(dynamics_rhs(State{.eta = {0, kPi / 2, 0}}, Control{}, QuadParams{}), SingularAttitudeError);
}

TEST_CASE("skew matrix reproduces the negative cross product") {
  CHECK(skew(Vec3::Zero()).isZero(0.0));
  Mat3 ex;
  ex << 0, 0, 0, 0, 0, 1, 0, -1, 0;
  CHECK(skew({1, 0, 0}) == ex);

  Rng rng;
  for (int k = 0; k < 200; ++k) {
    const Vec3 w = rng.vec3(-5, 5), v = rng.vec3(-5, 5);
    CHECK((skew(w) * v + w.cross(v)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("dynamics right-hand side") {
  const QuadParams params;
  const Control hover = Control::from_vector(params.reference_control());

  CHECK(dynamics_rhs(State{}, hover, params).cwiseAbs().maxCoeff() < 1e-13);

  Vec12 freefall = Vec12::Zero();
  freefall[5] = -9.81;
  CHECK(dynamics_rhs(State{}, Control{}, params) == freefall);

  State moving;
  moving.v = {1, 2, 3};
  const Vec12 dx = dynamics_rhs(moving, hover, params);
  CHECK(dx.head<3>() == Vec3(1, 2, 3));
}

TEST_CASE("optimal control closed form") {
  QuadParams params;
  Control u = optimal_control(Vec3::Zero(), Vec3::Zero(), params);
  CHECK(u.thrust == doctest::Approx(19.62));
  CHECK(u.torque.isZero(0.0));

  u = optimal_control({0, 0, 4}, Vec3::Zero(), params);
  CHECK(u.thrust == doctest::Approx(18.62));
  CHECK(u.torque.isZero(0.0));

  u = optimal_control(Vec3::Zero(), {0, 0, 2.4832}, params);
  CHECK(u.thrust == doctest::Approx(19.62));
  CHECK(u.torque[2] == doctest::Approx(-0.5));
}

TEST_CASE("optimal control zeroes the control gradient and minimizes H") {
  QuadParams params;
  params.control_weight.diagonal() << 1.0, 2.0, 0.5, 3.0;
  Rng rng;
  for (int k = 0; k < 50; ++k) {
    const State x = rng.state();
    const Costate lam = rng.costate();
    const Control us = optimal_control(lam.lam_v, lam.lam_w, params);

    CHECK(hamiltonian_control_gradient(lam, us, params).cwiseAbs().maxCoeff() < 1e-10);
    // Central differences of H in u.
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-4;
      Vec4 up = us.to_vector(), um = us.to_vector();
      up[j] += h;
      um[j] -= h;
      const double d = (hamiltonian(x, lam, Control::from_vector(up), params) -
                        hamiltonian(x, lam, Control::from_vector(um), params)) /
                       (2 * h);
      CHECK(std::abs(d) < 1e-6);
    }
    const double hs = hamiltonian(x, lam, us, params);
    for (int t = 0; t < 100; ++t) {
      const Vec4 du{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      CHECK(hamiltonian(x, lam, Control::from_vector(us.to_vector() + du), params) >= hs);
    }
  }
}

TEST_CASE("hamiltonian and running cost values") {
  const QuadParams params;
  const Control hover = Control::from_vector(params.reference_control());
  CHECK(hamiltonian(State{}, Costate{}, hover, params) == doctest::Approx(1.0));
  CHECK(hamiltonian(State{}, Costate{}, Control::from_vector(params.reference_control() + Vec4(1, 0, 0, 0)),
                    params) == doctest::Approx(2.0));
  CHECK(running_cost(hover, params) == 1.0);
  CHECK(running_cost(Control::from_vector(params.reference_control() + Vec4(0, 1, 0, 0)), params) == 2.0);
  CHECK(running_cost(Control{}, params) == doctest::Approx(385.9444));
}

TEST_CASE("costate right-hand side") {
  const QuadParams params;
  const Control hover = Control::from_vector(params.reference_control());
  Costate lam;
  lam.lam_p = {1, 0, 0};
  const Vec12 dl = costate_rhs(State{}, lam, hover, params);
  CHECK(dl.segment<3>(3) == Vec3(-1, 0, 0));

  SUBCASE("matches minus the finite-difference state gradient of H") {
    Rng rng;
    for (int k = 0; k < 200; ++k) {
      const State x = rng.state();
      const Costate c = rng.costate();
      const Control u = rng.control();
      const Vec12 analytic = costate_rhs(x, c, u, params);
      CHECK(analytic.head<3>().isZero(0.0));
      const Vec12 xv = x.to_vector();
      for (int j = 0; j < 12; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(xv[j]));
        Vec12 xp = xv, xm = xv;
        xp[j] += h;
        xm[j] -= h;
        const double fd = -(hamiltonian(State::from_vector(xp), c, u, params) -
                            hamiltonian(State::from_vector(xm), c, u, params)) /
                          (xp[j] - xm[j]);
        CHECK(std::abs(fd - analytic[j]) <= 1e-6 * std::max(1.0, std::abs(analytic[j])));
      }
    }
  }
}

TEST_CASE("rotor thrust mixing") {
  const QuadParams params;
  const Mat4 e = mixing_matrix(params);
  const Vec4 u = e * Vec4::Ones();
  CHECK(u == Vec4(4, 0, 0, 0));
  CHECK((rotor_thrusts(Control::from_vector(u), params).forces - Vec4::Ones()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rotor_thrusts(Control{}, params).forces.isZero(0.0));
  const Vec4 f = rotor_thrusts(Control::from_vector(params.reference_control()), params).forces;
  CHECK((f - Vec4::Constant(4.905)).cwiseAbs().maxCoeff() < 1e-12);

  Rng rng;
  for (int k = 0; k < 100; ++k) {
    const Vec4 forces{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)};
    const Vec4 back = rotor_thrusts(Control::from_vector(e * forces), params).forces;
    CHECK((back - forces).cwiseAbs().maxCoeff() < 1e-12);
  }

  QuadParams flat = params;
  flat.arm_length = 0.0;
  CHECK_THROWS_AS(rotor_thrusts(Control{}, flat), GeometryError);
  CHECK_THROWS_AS(flat.validate(), GeometryError);
}

TEST_CASE("parameter validation") {
  QuadParams p;
  CHECK_NOTHROW(p.validate());
  p.mass = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = QuadParams{};
  p.control_weight(0, 0) = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
