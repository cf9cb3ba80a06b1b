#include "deskew/simulation.hpp"

#include <cmath>
#include <stdexcept>

namespace deskew {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
// Minimum gap enforced between recorded timestamps after jitter; sensor
// drivers emit monotonic stamps even when the underlying clock jitters.
constexpr double kMinTimestampGap = 1e-9;

void clamp_monotonic(std::vector<double>& times) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1] + kMinTimestampGap) {
      times[i] = times[i - 1] + kMinTimestampGap;
    }
  }
}

}  // namespace

SensorRig default_sensor_rig() {
  SensorRig rig;
  rig.intrinsics.fx = 1100.0;
  rig.intrinsics.fy = 1100.0;
  rig.intrinsics.cx = 960.0;
  rig.intrinsics.cy = 604.0;
  rig.intrinsics.skew = 0.0;
  rig.intrinsics.k1 = -0.0118;
  rig.intrinsics.k2 = 0.0041;
  rig.intrinsics.k3 = -0.0013;
  rig.intrinsics.k4 = 0.0002;
  rig.intrinsics.width = 1920;
  rig.intrinsics.height = 1208;

  // Lidar on the roof, axes aligned with the vehicle.
  rig.t_veh_ld = HomTransform::Identity();
  rig.t_veh_ld(2, 3) = 1.8;

  // Front camera at (1.25, 0, 1.30) in the vehicle frame, optical axis
  // along vehicle +x (camera x right, y down, z forward).
  HomTransform t_cam_veh = HomTransform::Identity();
  Eigen::Matrix3d r;
  r << 0.0, -1.0, 0.0,
       0.0, 0.0, -1.0,
       1.0, 0.0, 0.0;
  const Eigen::Vector3d cam_pos(1.25, 0.0, 1.30);
  t_cam_veh.block<3, 3>(0, 0) = r;
  t_cam_veh.block<3, 1>(0, 3) = -r * cam_pos;
  rig.t_cam_ld = t_cam_veh * rig.t_veh_ld;
  return rig;
}

void SimConfig::validate() const {
  if (!(v_min <= v_max) || !(w_min_deg <= w_max_deg) ||
      !(elevation_min_deg <= elevation_max_deg) || !(range_min <= range_max)) {
    throw std::invalid_argument("sim config: ranges must be ordered");
  }
  if (noise_v_std < 0.0 || noise_w_std_deg < 0.0 || jitter_std < 0.0) {
    throw std::invalid_argument("sim config: std-devs must be >= 0");
  }
  if (packets_per_scan < 1 || runs < 1 || measurement_rate_hz < 1 ||
      !(scan_period > 0.0)) {
    throw std::invalid_argument("sim config: invalid counts or period");
  }
  if (range_min <= 0.0) {
    throw std::invalid_argument("sim config: range must be positive");
  }
  rig.intrinsics.validate();
  if (!is_rigid_transform(rig.t_cam_ld) || !is_rigid_transform(rig.t_veh_ld)) {
    throw std::invalid_argument("sim config: rig transforms not rigid");
  }
  ut.validate();
}

NoiseConfig SimConfig::estimator_noise() const {
  NoiseConfig noise;
  noise.cov_v =
      noise_v_std * noise_v_std * Eigen::Matrix3d::Identity();
  const double w_std = noise_w_std_deg * kDegToRad;
  noise.cov_w = w_std * w_std * Eigen::Matrix3d::Identity();
  noise.sigma_t = jitter_std;
  noise.use_vx_only = false;
  return noise;
}

Pose6D sim_vehicle_pose(double v_x, double w_yaw, double t) {
  return ctrv_step(Pose6D{}, Eigen::Vector3d(v_x, 0.0, 0.0),
                   Eigen::Vector3d(0.0, 0.0, w_yaw), t);
}

Pose6D sim_delta_pose(double v_x, double w_yaw, double t_ref, double t) {
  const Pose6D a = sim_vehicle_pose(v_x, w_yaw, t_ref);
  const Pose6D b = sim_vehicle_pose(v_x, w_yaw, t);
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  const double dx = b.x - a.x, dy = b.y - a.y;
  Pose6D rel;
  rel.x = c * dx + s * dy;
  rel.y = -s * dx + c * dy;
  rel.yaw = wrap_angle(b.yaw - a.yaw);
  return rel;
}

Episode generate_episode(const SimConfig& cfg, SplitMix64& rng) {
  cfg.validate();
  const int p = cfg.packets_per_scan;
  const double dt = cfg.scan_period / p;
  const double az_step =
      (cfg.clockwise ? -1.0 : 1.0) * 2.0 * M_PI / p;

  Episode ep;
  ep.v_x = rng.uniform(cfg.v_min, cfg.v_max);
  ep.w_yaw = rng.uniform(cfg.w_min_deg, cfg.w_max_deg) * kDegToRad;

  // One return per packet.
  std::vector<double> elevation(p), range(p);
  for (int i = 0; i < p; ++i) {
    elevation[i] =
        rng.uniform(cfg.elevation_min_deg, cfg.elevation_max_deg) * kDegToRad;
    range[i] = rng.uniform(cfg.range_min, cfg.range_max);
  }

  std::vector<double> recorded(p);
  for (int i = 0; i < p; ++i) {
    recorded[i] = i * dt + rng.normal(0.0, cfg.jitter_std);
  }
  clamp_monotonic(recorded);

  const double t_image_true = cfg.scan_period;
  ep.t_ref_2d = t_image_true + rng.normal(0.0, cfg.jitter_std);

  // 100 Hz odometry stream covering the revolution.
  const int samples = static_cast<int>(
      std::llround(cfg.scan_period * cfg.measurement_rate_hz));
  std::vector<double> meas_times(samples + 1);
  ep.measurements.resize(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    meas_times[k] = static_cast<double>(k) / cfg.measurement_rate_hz +
                    rng.normal(0.0, cfg.jitter_std);
  }
  clamp_monotonic(meas_times);
  const double w_std = cfg.noise_w_std_deg * kDegToRad;
  for (int k = 0; k <= samples; ++k) {
    KinematicMeasurement& m = ep.measurements[k];
    m.timestamp = meas_times[k];
    m.v = Eigen::Vector3d(ep.v_x + rng.normal(0.0, cfg.noise_v_std),
                          rng.normal(0.0, cfg.noise_v_std),
                          rng.normal(0.0, cfg.noise_v_std));
    m.w = Eigen::Vector3d(rng.normal(0.0, w_std), rng.normal(0.0, w_std),
                          ep.w_yaw + rng.normal(0.0, w_std));
  }

  // Geometry: points observed in the lidar frame at firing time, frozen in
  // the world frame, then re-expressed at the true reference times.
  const HomTransform& t_veh_ld = cfg.rig.t_veh_ld;
  const double t_last_true = (p - 1) * dt;
  const HomTransform world_to_ref3 =
      invert_rigid(pose_to_transform(sim_vehicle_pose(ep.v_x, ep.w_yaw,
                                                      t_last_true)) *
                   t_veh_ld);
  const HomTransform world_to_ref2 =
      invert_rigid(pose_to_transform(sim_vehicle_pose(ep.v_x, ep.w_yaw,
                                                      t_image_true)) *
                   t_veh_ld);

  ep.scan.packets.resize(p);
  ep.truth_3d.resize(p);
  ep.truth_3d_image.resize(p);
  ep.truth_pixels.resize(p);
  for (int i = 0; i < p; ++i) {
    const double az = i * az_step;
    const LidarPoint observed =
        make_lidar_point(range[i] * std::cos(elevation[i]) * std::cos(az),
                         range[i] * std::cos(elevation[i]) * std::sin(az),
                         range[i] * std::sin(elevation[i]));
    LidarPacket& packet = ep.scan.packets[i];
    packet.timestamp = recorded[i];
    packet.points = {observed};

    const HomTransform ld_to_world =
        pose_to_transform(sim_vehicle_pose(ep.v_x, ep.w_yaw, i * dt)) *
        t_veh_ld;
    const LidarPoint world = ld_to_world * observed;
    ep.truth_3d[i] = (world_to_ref3 * world).head<3>();
    ep.truth_3d_image[i] = (world_to_ref2 * world).head<3>();

    const LidarPoint in_cam =
        cfg.rig.t_cam_ld * make_lidar_point(ep.truth_3d_image[i].x(),
                                            ep.truth_3d_image[i].y(),
                                            ep.truth_3d_image[i].z());
    ep.truth_pixels[i] = project_point(in_cam.head<3>(), cfg.rig.intrinsics);
  }
  ep.t_ref_3d = ep.scan.packets.back().timestamp;
  return ep;
}

EpisodeEvaluation evaluate_episode(const SimConfig& cfg, const Episode& ep) {
  const NoiseConfig noise = cfg.estimator_noise();
  std::vector<double> times(ep.scan.packets.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    times[i] = ep.scan.packets[i].timestamp;
  }

  EpisodeEvaluation ev;

  // 3D branch: correct to the last packet's timestamp.
  const auto ego3 = estimate_ego_motion(times, ep.measurements, ep.t_ref_3d,
                                        noise, cfg.ut);
  CorrectionResult corr3 =
      correct_scan(ep.scan, ego3, cfg.rig.t_veh_ld, cfg.ut);
  ev.nees_3d.reserve(corr3.points.size());
  for (const CorrectedPoint& cp : corr3.points) {
    const GaussianState g{cp.mean, cp.cov};
    ev.nees_3d.push_back(nees(g, ep.truth_3d[cp.packet_index]));
  }
  ev.corrected_3d = std::move(corr3.points);

  // 2D branch: correct to the image timestamp, then project.
  const auto ego2 = estimate_ego_motion(times, ep.measurements, ep.t_ref_2d,
                                        noise, cfg.ut);
  const CorrectionResult corr2 = correct_scan(
      ep.scan, ego2, cfg.rig.t_veh_ld, cfg.ut, CorrectionOptions{false});
  ev.projection_2d =
      project_omega(corr2.omega, cfg.rig.t_cam_ld, cfg.rig.intrinsics);
  ev.dropped_2d = ev.projection_2d.dropped_behind_camera;
  for (const ProjectedPoint& pp : ev.projection_2d.points) {
    if (!pp.in_frame) continue;
    const auto& truth = ep.truth_pixels[pp.packet_index];
    if (!truth) continue;
    const GaussianState g{pp.mean, pp.cov};
    ev.nees_2d.push_back(nees(g, *truth));
  }
  return ev;
}

MonteCarloOutput run_monte_carlo(const SimConfig& cfg) {
  cfg.validate();
  const int runs = cfg.runs;

  std::vector<std::vector<double>> eps3(runs), eps2(runs);
  std::vector<int> dropped(runs, 0);
  MonteCarloOutput out;

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < runs; ++r) {
    SplitMix64 rng = SplitMix64::stream(cfg.seed, static_cast<std::uint64_t>(r));
    Episode ep = generate_episode(cfg, rng);
    EpisodeEvaluation ev = evaluate_episode(cfg, ep);
    eps3[r] = std::move(ev.nees_3d);
    eps2[r] = std::move(ev.nees_2d);
    dropped[r] = ev.dropped_2d;
    if (r == 0) {
      out.episode0 = std::move(ep);
      out.eval0 = std::move(ev);
    }
  }

  std::vector<double> all3, all2;
  std::int64_t dropped_total = 0;
  for (int r = 0; r < runs; ++r) {
    all3.insert(all3.end(), eps3[r].begin(), eps3[r].end());
    all2.insert(all2.end(), eps2[r].begin(), eps2[r].end());
    dropped_total += dropped[r];
  }

  out.report.runs = runs;
  out.report.seed = cfg.seed;
  out.report.nees_3d = summarize_nees(all3, 3);
  out.report.nees_2d = summarize_nees(all2, 2);
  out.report.dropped_2d = dropped_total;
  return out;
}

}  // namespace deskew
