#include "landing/quad_model.hpp"

#include <cmath>
#include <sstream>

namespace landing::quad {

namespace {

std::string pitch_message(double pitch) {
  std::ostringstream os;
  os << "singular attitude: pitch " << pitch << " rad puts |cos(theta)| below " << kMinCosPitch;
  return os.str();
}

struct Trig {
  double sphi, cphi, sth, cth, spsi, cpsi;
  explicit Trig(const Vec3& eta)
      : sphi(std::sin(eta[0])),
        cphi(std::cos(eta[0])),
        sth(std::sin(eta[1])),
        cth(std::cos(eta[1])),
        spsi(std::sin(eta[2])),
        cpsi(std::cos(eta[2])) {}
};

Mat3 rotation_from(const Trig& t) {
  Mat3 r;
  r << t.cth * t.cpsi, t.cth * t.spsi, -t.sth,
      t.sth * t.cpsi * t.sphi - t.spsi * t.cphi, t.sth * t.spsi * t.sphi + t.cpsi * t.cphi, t.cth * t.sphi,
      t.sth * t.cpsi * t.cphi + t.spsi * t.sphi, t.sth * t.spsi * t.cphi - t.cpsi * t.sphi, t.cth * t.cphi;
  return r;
}

void check_pitch(const Trig& t, double pitch) {
  if (!(std::abs(t.cth) >= kMinCosPitch)) throw SingularAttitudeError(pitch);
}

Mat3 kinematic_from(const Trig& t) {
  const double tan_th = t.sth / t.cth;
  const double sec_th = 1.0 / t.cth;
  Mat3 k;
  k << 1.0, t.sphi * tan_th, t.cphi * tan_th,
      0.0, t.cphi, -t.sphi,
      0.0, t.sphi * sec_th, t.cphi * sec_th;
  return k;
}

}  // namespace

SingularAttitudeError::SingularAttitudeError(double pitch)
    : std::runtime_error(pitch_message(pitch)), pitch_(pitch) {}

void QuadParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  if (!(gravity > 0.0)) throw std::invalid_argument("gravity must be positive");
  if (!(inertia.array() > 0.0).all()) throw std::invalid_argument("inertia entries must be positive");
  if (!control_weight.isApprox(control_weight.transpose(), 1e-12))
    throw std::invalid_argument("control weight must be symmetric");
  Eigen::LLT<Mat4> llt(control_weight);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("control weight must be positive definite");
  if (arm_length == 0.0 || moment_coeff == 0.0 || !std::isfinite(arm_length) || !std::isfinite(moment_coeff))
    throw GeometryError("rotor geometry requires nonzero finite arm length and moment coefficient");
}

State State::from_vector(const Vec12& x) {
  State s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.eta = x.segment<3>(6);
  s.w = x.segment<3>(9);
  return s;
}

Vec12 State::to_vector() const {
  Vec12 x;
  x << p, v, eta, w;
  return x;
}

bool State::finite() const { return to_vector().allFinite(); }

Costate Costate::from_vector(const Vec12& lam) {
  Costate c;
  c.lam_p = lam.segment<3>(0);
  c.lam_v = lam.segment<3>(3);
  c.lam_eta = lam.segment<3>(6);
  c.lam_w = lam.segment<3>(9);
  return c;
}

Vec12 Costate::to_vector() const {
  Vec12 lam;
  lam << lam_p, lam_v, lam_eta, lam_w;
  return lam;
}

Control Control::from_vector(const Vec4& u) { return Control{u[0], u.tail<3>()}; }

Vec4 Control::to_vector() const { return {thrust, torque[0], torque[1], torque[2]}; }

Mat3 rotation_matrix(const Vec3& eta) { return rotation_from(Trig(eta)); }

Mat3 kinematic_matrix(const Vec3& eta) {
  const Trig t(eta);
  check_pitch(t, eta[1]);
  return kinematic_from(t);
}

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, w[2], -w[1],
      -w[2], 0.0, w[0],
      w[1], -w[0], 0.0;
  return s;
}

Mat4 mixing_matrix(const QuadParams& params) {
  const double l = params.arm_length;
  const double c = params.moment_coeff;
  Mat4 e;
  e << 1.0, 1.0, 1.0, 1.0,
      0.0, l, 0.0, -l,
      -l, 0.0, l, 0.0,
      c, -c, c, -c;
  return e;
}

Vec12 dynamics_rhs(const State& x, const Control& u, const QuadParams& params) {
  const Trig t(x.eta);
  check_pitch(t, x.eta[1]);
  const Mat3 r = rotation_from(t);
  const Vec3& j = params.inertia;

  Vec12 dx;
  dx.segment<3>(0) = r.transpose() * x.v;
  // S(w) v = v x w; the gravity term is R(eta) (0, 0, g).
  dx.segment<3>(3) = x.v.cross(x.w) - params.gravity * r.col(2);
  dx[5] += u.thrust / params.mass;
  dx.segment<3>(6) = kinematic_from(t) * x.w;
  const Vec3 jw = j.cwiseProduct(x.w);
  dx.segment<3>(9) = (jw.cross(x.w) + u.torque).cwiseQuotient(j);
  return dx;
}

Control optimal_control(const Vec3& lam_v, const Vec3& lam_w, const QuadParams& params) {
  Vec4 g;
  g << lam_v[2] / params.mass, lam_w.cwiseQuotient(params.inertia);
  const Mat4 sym = params.control_weight + params.control_weight.transpose();
  const Vec4 u = params.reference_control() - sym.llt().solve(g);
  return Control::from_vector(u);
}

double running_cost(const Control& u, const QuadParams& params) {
  const Vec4 du = u.to_vector() - params.reference_control();
  return 1.0 + du.dot(params.control_weight * du);
}

double hamiltonian(const State& x, const Costate& lam, const Control& u, const QuadParams& params) {
  return running_cost(u, params) + lam.to_vector().dot(dynamics_rhs(x, u, params));
}

Vec4 hamiltonian_control_gradient(const Costate& lam, const Control& u, const QuadParams& params) {
  const Vec4 du = u.to_vector() - params.reference_control();
  Vec4 g;
  g << lam.lam_v[2] / params.mass, lam.lam_w.cwiseQuotient(params.inertia);
  return (params.control_weight + params.control_weight.transpose()) * du + g;
}

Vec12 costate_rhs(const State& x, const Costate& lam, const Control& /*u*/, const QuadParams& params) {
  const Trig t(x.eta);
  check_pitch(t, x.eta[1]);
  const Mat3 r = rotation_from(t);
  const Mat3 k = kinematic_from(t);
  const double g = params.gravity;

  // Partial derivatives of R with respect to roll, pitch and yaw.
  Mat3 dr_phi;
  dr_phi.row(0).setZero();
  dr_phi.row(1) = r.row(2);
  dr_phi.row(2) = -r.row(1);

  Mat3 dr_theta;
  dr_theta << -t.sth * t.cpsi, -t.sth * t.spsi, -t.cth,
      t.cth * t.cpsi * t.sphi, t.cth * t.spsi * t.sphi, -t.sth * t.sphi,
      t.cth * t.cpsi * t.cphi, t.cth * t.spsi * t.cphi, -t.sth * t.cphi;

  Mat3 dr_psi;
  dr_psi << -t.cth * t.spsi, t.cth * t.cpsi, 0.0,
      -t.sth * t.spsi * t.sphi - t.cpsi * t.cphi, t.sth * t.cpsi * t.sphi - t.spsi * t.cphi, 0.0,
      -t.sth * t.spsi * t.cphi + t.cpsi * t.sphi, t.sth * t.cpsi * t.cphi + t.spsi * t.sphi, 0.0;

  // K has no yaw dependence.
  const double tan_th = t.sth / t.cth;
  const double sec_th = 1.0 / t.cth;
  const double sec2 = sec_th * sec_th;
  Mat3 dk_phi;
  dk_phi << 0.0, t.cphi * tan_th, -t.sphi * tan_th,
      0.0, -t.sphi, -t.cphi,
      0.0, t.cphi * sec_th, -t.sphi * sec_th;
  Mat3 dk_theta;
  dk_theta << 0.0, t.sphi * sec2, t.cphi * sec2,
      0.0, 0.0, 0.0,
      0.0, t.sphi * tan_th * sec_th, t.cphi * tan_th * sec_th;

  const auto angle_term = [&](const Mat3& dr, const Mat3* dk) {
    double v = x.v.dot(dr * lam.lam_p) - g * lam.lam_v.dot(dr.col(2));
    if (dk) v += lam.lam_eta.dot(*dk * x.w);
    return -v;
  };

  const Vec3& j = params.inertia;
  const Vec3 a = lam.lam_w.cwiseQuotient(j);
  const Vec3 jw = j.cwiseProduct(x.w);

  Vec12 dlam;
  dlam.segment<3>(0).setZero();
  dlam.segment<3>(3) = -r * lam.lam_p - skew(x.w).transpose() * lam.lam_v;
  dlam[6] = angle_term(dr_phi, &dk_phi);
  dlam[7] = angle_term(dr_theta, &dk_theta);
  dlam[8] = angle_term(dr_psi, nullptr);
  dlam.segment<3>(9) =
      -(lam.lam_v.cross(x.v) + k.transpose() * lam.lam_eta + a.cross(jw) - j.cwiseProduct(a.cross(x.w)));
  return dlam;
}

RotorThrusts rotor_thrusts(const Control& u, const QuadParams& params) {
  if (params.arm_length == 0.0 || params.moment_coeff == 0.0)
    throw GeometryError("mixing matrix is singular: arm length and moment coefficient must be nonzero");
  return RotorThrusts{mixing_matrix(params).partialPivLu().solve(u.to_vector())};
}

}  // namespace landing::quad
