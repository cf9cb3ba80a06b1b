#include "deskew/ego_motion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deskew {

namespace {

constexpr double kOmegaEpsilon = 1e-6;  // rad/s, straight-line switch

// Nearest measurement by timestamp; `measurements` is sorted.
const KinematicMeasurement& nearest_measurement(
    const std::vector<KinematicMeasurement>& measurements, double t) {
  auto it = std::lower_bound(
      measurements.begin(), measurements.end(), t,
      [](const KinematicMeasurement& m, double ts) { return m.timestamp < ts; });
  if (it == measurements.begin()) return *it;
  if (it == measurements.end()) return measurements.back();
  const auto prev = std::prev(it);
  return (t - prev->timestamp) <= (it->timestamp - t) ? *prev : *it;
}

struct MaskedMeasurement {
  Eigen::Vector3d v;
  Eigen::Vector3d w;
};

MaskedMeasurement apply_mask(const KinematicMeasurement& m,
                             const NoiseConfig& noise) {
  MaskedMeasurement out{m.v, m.w};
  if (noise.use_vx_only) {
    out.v.y() = 0.0;
    out.v.z() = 0.0;
  }
  return out;
}

Eigen::Matrix3d masked_cov_v(const NoiseConfig& noise) {
  if (!noise.use_vx_only) return noise.cov_v;
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  c(0, 0) = noise.cov_v(0, 0);
  return c;
}

}  // namespace

GaussianState assemble_augmented_state(const GaussianState& pose,
                                       const KinematicMeasurement& meas,
                                       const NoiseConfig& noise,
                                       double t_origin, double t_target) {
  if (pose.dim() != 6) {
    throw std::invalid_argument("augmented state: pose must be 6-dimensional");
  }
  const MaskedMeasurement m = apply_mask(meas, noise);

  GaussianState aug;
  aug.mean.resize(kAugmentedDim);
  aug.mean.segment<6>(0) = pose.mean;
  aug.mean.segment<3>(6) = m.v;
  aug.mean.segment<3>(9) = m.w;
  aug.mean[12] = t_origin;
  aug.mean[13] = t_target;

  aug.cov = Eigen::MatrixXd::Zero(kAugmentedDim, kAugmentedDim);
  aug.cov.block<6, 6>(0, 0) = pose.cov;
  aug.cov.block<3, 3>(6, 6) = masked_cov_v(noise);
  aug.cov.block<3, 3>(9, 9) = noise.cov_w;
  aug.cov(12, 12) = noise.sigma_t * noise.sigma_t;
  aug.cov(13, 13) = noise.sigma_t * noise.sigma_t;
  return aug;
}

Pose6D ctrv_step(const Pose6D& start, const Eigen::Vector3d& v,
                 const Eigen::Vector3d& w, double dt) {
  Pose6D p = start;
  const double psi = start.yaw;
  const double omega = w.z();

  if (std::abs(omega) < kOmegaEpsilon) {
    p.x += (v.x() * std::cos(psi) - v.y() * std::sin(psi)) * dt;
    p.y += (v.x() * std::sin(psi) + v.y() * std::cos(psi)) * dt;
  } else {
    const double ds = std::sin(psi + omega * dt) - std::sin(psi);
    const double dc = std::cos(psi + omega * dt) - std::cos(psi);
    p.x += (v.x() * ds + v.y() * dc) / omega;
    p.y += (-v.x() * dc + v.y() * ds) / omega;
  }
  p.yaw += omega * dt;
  p.z += v.z() * dt;
  p.roll += w.x() * dt;
  p.pitch += w.y() * dt;
  return p;
}

Vector6d kinematic_model(const Eigen::Matrix<double, kAugmentedDim, 1>& aug) {
  const Pose6D start = Pose6D::from_vector(aug.segment<6>(0));
  const Eigen::Vector3d v = aug.segment<3>(6);
  const Eigen::Vector3d w = aug.segment<3>(9);
  const double dt = aug[13] - aug[12];
  return ctrv_step(start, v, w, dt).vector();
}

namespace {

// One chain step: augment, decompose, propagate, recover.
GaussianState propagate_step(const GaussianState& pose,
                             const KinematicMeasurement& meas,
                             const NoiseConfig& noise, const UtParams& params,
                             double t_origin, double t_target) {
  const GaussianState aug =
      assemble_augmented_state(pose, meas, noise, t_origin, t_target);
  const SigmaPoints sp = ut_decompose(aug, params);

  SigmaPoints propagated;
  propagated.points.resize(6, sp.count());
  propagated.wm = sp.wm;
  propagated.wc = sp.wc;
  for (int j = 0; j < sp.count(); ++j) {
    propagated.points.col(j) = kinematic_model(sp.points.col(j));
  }

  GaussianState next = ut_recover(propagated);
  for (int k = 3; k < 6; ++k) next.mean[k] = wrap_angle(next.mean[k]);
  return next;
}

}  // namespace

std::vector<EgoPoseEstimate> estimate_ego_motion(
    const std::vector<double>& scan_timestamps,
    const std::vector<KinematicMeasurement>& measurements, double t_ref,
    const NoiseConfig& noise, const UtParams& params) {
  const int n = static_cast<int>(scan_timestamps.size());
  if (n == 0) {
    throw std::invalid_argument("estimate_ego_motion: no packet timestamps");
  }
  if (measurements.empty()) {
    throw std::invalid_argument("estimate_ego_motion: no measurements");
  }
  for (int i = 1; i < n; ++i) {
    if (!(scan_timestamps[i] > scan_timestamps[i - 1])) {
      throw std::invalid_argument(
          "estimate_ego_motion: packet timestamps not strictly increasing");
    }
  }
  for (std::size_t i = 1; i < measurements.size(); ++i) {
    if (!(measurements[i].timestamp > measurements[i - 1].timestamp)) {
      throw std::invalid_argument(
          "estimate_ego_motion: measurement timestamps not strictly "
          "increasing");
    }
  }

  const GaussianState ref_state{
      Eigen::VectorXd::Zero(6),
      noise.ref_pose_var * Eigen::MatrixXd::Identity(6, 6)};

  std::vector<EgoPoseEstimate> estimates(n);

  // Backward chain: packets strictly before t_ref, nearest first.
  int first_at_or_after = n;
  for (int i = 0; i < n; ++i) {
    if (scan_timestamps[i] >= t_ref) {
      first_at_or_after = i;
      break;
    }
  }
  if (first_at_or_after > 0) {
    GaussianState state = ref_state;
    double t_star = t_ref;
    for (int i = first_at_or_after - 1; i >= 0; --i) {
      const double t_i = scan_timestamps[i];
      state = propagate_step(state, nearest_measurement(measurements, t_i),
                             noise, params, t_star, t_i);
      estimates[i] = EgoPoseEstimate{i, state};
      t_star = t_i;
    }
  }

  // Forward chain: packets at or after t_ref, earliest first.
  if (first_at_or_after < n) {
    GaussianState state = ref_state;
    double t_star = t_ref;
    for (int i = first_at_or_after; i < n; ++i) {
      const double t_i = scan_timestamps[i];
      state = propagate_step(state, nearest_measurement(measurements, t_i),
                             noise, params, t_star, t_i);
      estimates[i] = EgoPoseEstimate{i, state};
      t_star = t_i;
    }
  }

  return estimates;
}

}  // namespace deskew
