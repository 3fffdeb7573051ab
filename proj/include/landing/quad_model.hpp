#ifndef LANDING_QUAD_MODEL_HPP
#define LANDING_QUAD_MODEL_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace landing::quad {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

/// Raised when |cos(pitch)| drops below the kinematic-matrix floor.
class SingularAttitudeError : public std::runtime_error {
 public:
  explicit SingularAttitudeError(double pitch);
  double pitch() const { return pitch_; }

 private:
  double pitch_;
};

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kMinCosPitch = 1e-8;

/// Physical constants, cost weights and rotor geometry of the vehicle.
/// Defaults follow the benchmark airframe (m = 2 kg, Jz = 2 Jx = 2 Jy).
struct QuadParams {
  double mass = 2.0;
  double gravity = 9.81;
  Vec3 inertia{1.2416, 1.2416, 2.4832};
  Mat4 control_weight = Mat4::Identity();
  double arm_length = 0.2;
  double moment_coeff = 0.1;

  /// Control that balances gravity at level attitude: (m g, 0, 0, 0).
  Vec4 reference_control() const { return {mass * gravity, 0.0, 0.0, 0.0}; }

  /// Throws std::invalid_argument (or GeometryError for l, c) on violation.
  void validate() const;
};

/// Position (Earth frame), body-frame velocity, Euler angles (roll, pitch,
/// yaw) and body angular rates.
struct State {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 eta = Vec3::Zero();
  Vec3 w = Vec3::Zero();

  static State from_vector(const Vec12& x);
  Vec12 to_vector() const;
  bool finite() const;
};

struct Costate {
  Vec3 lam_p = Vec3::Zero();
  Vec3 lam_v = Vec3::Zero();
  Vec3 lam_eta = Vec3::Zero();
  Vec3 lam_w = Vec3::Zero();

  static Costate from_vector(const Vec12& lam);
  Vec12 to_vector() const;
};

/// Collective thrust and body torques, u = (T, tau_x, tau_y, tau_z).
struct Control {
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();

  static Control from_vector(const Vec4& u);
  Vec4 to_vector() const;
};

struct RotorThrusts {
  Vec4 forces = Vec4::Zero();
};

// Frame and attitude matrices.
Mat3 rotation_matrix(const Vec3& eta);
Mat3 kinematic_matrix(const Vec3& eta);
Mat3 skew(const Vec3& w);
/// Rotor mixing matrix E with u = E F.
Mat4 mixing_matrix(const QuadParams& params);

/// Time derivative of the 12-dim state under control u.
Vec12 dynamics_rhs(const State& x, const Control& u, const QuadParams& params);

/// Unconstrained minimizer of the Hamiltonian over u for the given costates.
Control optimal_control(const Vec3& lam_v, const Vec3& lam_w, const QuadParams& params);

double running_cost(const Control& u, const QuadParams& params);

double hamiltonian(const State& x, const Costate& lam, const Control& u, const QuadParams& params);

/// Gradient of the Hamiltonian with respect to u.
Vec4 hamiltonian_control_gradient(const Costate& lam, const Control& u, const QuadParams& params);

/// -dH/dx in closed form. The lam_p block is identically zero.
Vec12 costate_rhs(const State& x, const Costate& lam, const Control& u, const QuadParams& params);

/// F = E^{-1} u.
RotorThrusts rotor_thrusts(const Control& u, const QuadParams& params);

}  // namespace landing::quad

#endif  // LANDING_QUAD_MODEL_HPP
