#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace etfc {

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::fmod(a + pi, 2.0 * pi);
  if (a <= 0.0) a += 2.0 * pi;
  return a - pi;
}

struct UnicyclePose {
  double px = 0.0;    // m
  double py = 0.0;    // m
  double theta = 0.0; // rad, kept in (-pi, pi]
};

enum class PlantModel { kSingleIntegrator, kUnicycle };

struct PlantConfig {
  PlantModel model = PlantModel::kSingleIntegrator;
  double dt = 0.05;   // s
  double ell = 0.05;  // m, handle-point offset (unicycle)
  double v_max = std::numeric_limits<double>::infinity();  // flag threshold (m/s)

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("plant: dt must be positive");
    if (model == PlantModel::kUnicycle && !(ell > 0.0))
      throw std::invalid_argument("plant: ell must be positive");
  }
};

// Exact step of the constant-input single integrator.
inline Eigen::MatrixXd si_step(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& u_held,
                               double dt) {
  return pos + dt * u_held;
}

// Handle point a fixed distance ell ahead of the unicycle.
inline Eigen::RowVector2d ell_point(const UnicyclePose& pose, double ell) {
  return {pose.px + ell * std::cos(pose.theta), pose.py + ell * std::sin(pose.theta)};
}

struct UniCommand {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};

// Near-identity diffeomorphism: the single-integrator command of the handle
// point mapped to unicycle inputs.
inline UniCommand si_to_uni(const Eigen::RowVector2d& si_vel, const UnicyclePose& pose,
                            double ell) {
  if (!(ell > 0.0)) throw std::invalid_argument("si_to_uni: ell must be positive");
  const double ct = std::cos(pose.theta);
  const double st = std::sin(pose.theta);
  return {ct * si_vel(0) + st * si_vel(1), (-st * si_vel(0) + ct * si_vel(1)) / ell};
}

// Exact constant-(v, omega) arc. Inputs are piecewise constant by
// construction, so this is the exact flow and no integrator error enters the
// triggering comparison.
inline UnicyclePose uni_step(const UnicyclePose& pose, double v, double omega, double dt) {
  UnicyclePose next = pose;
  if (std::abs(omega) < 1e-9) {
    next.px += v * std::cos(pose.theta) * dt;
    next.py += v * std::sin(pose.theta) * dt;
    next.theta = wrap_angle(pose.theta + omega * dt);
  } else {
    const double t1 = pose.theta + omega * dt;
    next.px += (v / omega) * (std::sin(t1) - std::sin(pose.theta));
    next.py += (v / omega) * (-std::cos(t1) + std::cos(pose.theta));
    next.theta = wrap_angle(t1);
  }
  return next;
}

// Actuator-limit flag: true when any command norm exceeds the bound.
// Commands are never clipped; runs are only marked.
inline bool exceeds_velocity_bound(const Eigen::MatrixXd& u, double v_max) {
  return (u.rowwise().norm().array() > v_max).any();
}

}  // namespace etfc
