// Compares the packet-parallel kernels against the serial per-point
// reference on a synthetic scan, and times the Monte Carlo driver for
// 1..max threads.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "deskew/camera.hpp"
#include "deskew/motion_correction.hpp"
#include "deskew/rng.hpp"
#include "deskew/simulation.hpp"

using namespace deskew;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Workload {
  LidarScan scan;
  std::vector<EgoPoseEstimate> ego;
  HomTransform t_veh_ld{HomTransform::Identity()};
};

Workload make_workload(int packets, int points_per_packet) {
  Workload w;
  SplitMix64 rng(7);
  w.scan.packets.resize(packets);
  w.ego.resize(packets);
  for (int i = 0; i < packets; ++i) {
    LidarPacket& pk = w.scan.packets[i];
    pk.timestamp = 0.1 * i / packets;
    pk.points.reserve(points_per_packet);
    for (int j = 0; j < points_per_packet; ++j) {
      pk.points.push_back(make_lidar_point(rng.uniform(-50.0, 50.0),
                                           rng.uniform(-50.0, 50.0),
                                           rng.uniform(-2.0, 4.0)));
    }
    Pose6D pose;
    pose.x = rng.uniform(-0.5, 0.5);
    pose.y = rng.uniform(-0.5, 0.5);
    pose.yaw = rng.uniform(-0.1, 0.1);
    GaussianState g;
    g.mean = pose.vector();
    Eigen::VectorXd d(6);
    d << 1e-4, 1e-4, 1e-6, 1e-8, 1e-8, 1e-5;
    g.cov = d.asDiagonal();
    w.ego[i] = EgoPoseEstimate{i, g};
  }
  w.t_veh_ld(2, 3) = 1.8;
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  const int packets = 76;
  const int points = argc > 1 ? std::atoi(argv[1]) : 400;
  const int max_threads = omp_get_max_threads();
  const UtParams ut;
  const Workload w = make_workload(packets, points);
  const SensorRig rig = default_sensor_rig();

  std::printf("workload: %d packets x %d points, max %d threads\n\n", packets,
              points, max_threads);

  auto t0 = std::chrono::steady_clock::now();
  const auto naive = reference::correct_scan_naive(w.scan, w.ego, w.t_veh_ld,
                                                   ut);
  const double t_naive = seconds_since(t0);
  std::printf("%-32s %8.1f ms\n", "correct (serial reference)", t_naive * 1e3);

  CorrectionResult shared;
  for (int threads = 1; threads <= max_threads; threads *= 2) {
    omp_set_num_threads(threads);
    t0 = std::chrono::steady_clock::now();
    shared = correct_scan(w.scan, w.ego, w.t_veh_ld, ut);
    const double t = seconds_since(t0);
    std::printf("correct (shared sigma, %2d thr)   %8.1f ms  %5.2fx\n",
                threads, t * 1e3, t_naive / t);
  }

  double max_diff = 0.0;
  for (std::size_t i = 0; i < naive.size(); ++i) {
    max_diff = std::max(max_diff,
                        (naive[i].mean - shared.points[i].mean).norm());
  }
  std::printf("max |serial - parallel| mean      %.3e m\n\n", max_diff);

  for (int threads = 1; threads <= max_threads; threads *= 2) {
    omp_set_num_threads(threads);
    t0 = std::chrono::steady_clock::now();
    const auto proj = project_omega(shared.omega, rig.t_cam_ld,
                                    rig.intrinsics);
    const double t = seconds_since(t0);
    std::printf("project (%2d thr)                 %8.1f ms  (%zu px)\n",
                threads, t * 1e3, proj.points.size());
  }
  std::printf("\n");

  SimConfig cfg;
  cfg.runs = 50;
  cfg.seed = 42;
  double t_one = 0.0;
  for (int threads = 1; threads <= max_threads; threads *= 2) {
    omp_set_num_threads(threads);
    t0 = std::chrono::steady_clock::now();
    const auto mc = run_monte_carlo(cfg);
    const double t = seconds_since(t0);
    if (threads == 1) t_one = t;
    std::printf("simulate 50 runs (%2d thr)        %8.1f ms  %5.2fx  "
                "rate3d=%.4f\n",
                threads, t * 1e3, t_one / t, mc.report.nees_3d.rate);
  }
  return 0;
}
