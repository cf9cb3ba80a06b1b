#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "deskew/camera.hpp"
#include "deskew/consistency.hpp"
#include "deskew/ego_motion.hpp"
#include "deskew/errors.hpp"
#include "deskew/io.hpp"
#include "deskew/motion_correction.hpp"
#include "deskew/simulation.hpp"

namespace {

using namespace deskew;

double resolve_t_ref(const std::string& arg, const LidarScan& scan) {
  if (arg == "last-packet") {
    return scan.packets.back().timestamp;
  }
  std::string value = arg;
  if (arg.rfind("image:", 0) == 0) {
    value = arg.substr(6);
  }
  try {
    std::size_t pos = 0;
    const double t = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return t;
  } catch (const std::exception&) {
    throw ConfigError("--t-ref: expected <seconds>, last-packet or "
                      "image:<ts>, got '" +
                      arg + "'");
  }
}

std::vector<double> packet_timestamps(const LidarScan& scan) {
  std::vector<double> out(scan.packets.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = scan.packets[i].timestamp;
  }
  return out;
}

std::vector<AugmentedPoint> to_augmented(
    const std::vector<CorrectedPoint>& corrected) {
  std::vector<AugmentedPoint> out(corrected.size());
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    out[i].packet_index = corrected[i].packet_index;
    out[i].timestamp = corrected[i].timestamp;
    out[i].xyz = corrected[i].mean;
    out[i].cov3 = corrected[i].cov;
  }
  return out;
}

// Corrected points and projection results are both packet-major and
// point-minor; merge pixel fields by walking the two lists together.
void merge_pixels(std::vector<AugmentedPoint>& points,
                  const std::vector<CorrectedPoint>& corrected,
                  const ProjectionResult& projection,
                  const std::string& camera_id) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < points.size() && k < projection.points.size();
       ++i) {
    const ProjectedPoint& pp = projection.points[k];
    if (corrected[i].packet_index == pp.packet_index &&
        corrected[i].point_index == pp.point_index) {
      AugmentedPoint::Pixel px;
      px.camera_id = camera_id;
      px.uv = pp.mean;
      px.cov2 = pp.cov;
      px.in_frame = pp.in_frame;
      points[i].pixel = std::move(px);
      ++k;
    }
  }
}

struct CorrectArgs {
  std::string scan_path;
  std::string meas_path;
  std::string config_path;
  std::string output_path;
  std::string t_ref_arg{"last-packet"};
  std::string camera_id;
  bool no_point_cov{false};
  bool binary{false};
};

int run_correct(const CorrectArgs& args, bool with_projection) {
  const CalibrationConfig cfg = load_config(args.config_path);
  const LidarScan scan = read_scan(args.scan_path);
  const auto measurements = read_measurements(args.meas_path);
  const double t_ref = resolve_t_ref(args.t_ref_arg, scan);

  const auto ego = estimate_ego_motion(packet_timestamps(scan), measurements,
                                       t_ref, cfg.noise, cfg.ut);
  CorrectionOptions opts;
  opts.with_point_cov = !args.no_point_cov;
  const CorrectionResult result =
      correct_scan(scan, ego, cfg.t_veh_ld, cfg.ut, opts);

  std::vector<AugmentedPoint> out = to_augmented(result.points);
  if (with_projection) {
    if (cfg.cameras.empty()) {
      throw ConfigError(args.config_path +
                        ": at least one camera required for projection");
    }
    const CalibrationConfig::Camera& cam =
        args.camera_id.empty() ? cfg.cameras.front()
                               : cfg.camera(args.camera_id);
    const ProjectionResult projection =
        project_omega(result.omega, cam.t_cam_ld, cam.intrinsics);
    merge_pixels(out, result.points, projection, cam.id);
    std::cout << "projected " << projection.points.size() << " points ("
              << projection.dropped_behind_camera << " behind camera)\n";
  }
  write_augmented_cloud(out, args.output_path, args.binary);
  std::cout << "corrected " << out.size() << " points from "
            << scan.packets.size() << " packets, t_ref=" << t_ref << "\n";
  std::cout << "wrote " << args.output_path << "\n";
  return 0;
}

int run_simulate(const std::string& sim_config_path, int runs,
                 std::uint64_t seed, bool runs_set, bool seed_set,
                 const std::string& report_path,
                 const std::string& figures_dir) {
  SimConfig cfg;
  if (!sim_config_path.empty()) {
    cfg = load_sim_config(sim_config_path);
  }
  if (runs_set) cfg.runs = runs;
  if (seed_set) cfg.seed = seed;

  const MonteCarloOutput out = run_monte_carlo(cfg);
  write_report(out.report, report_path);
  std::cout << "runs=" << out.report.runs << " seed=" << out.report.seed
            << "\n3D: " << out.report.nees_3d.count
            << " points, in-bound rate " << out.report.nees_3d.rate
            << "\n2D: " << out.report.nees_2d.count
            << " points, in-bound rate " << out.report.nees_2d.rate
            << " (dropped " << out.report.dropped_2d << ")\n";
  std::cout << "wrote " << report_path << "\n";

  if (!figures_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(figures_dir);
    const Episode& ep = out.episode0;
    const auto dir = [&figures_dir](const char* name) {
      return (fs::path(figures_dir) / name).string();
    };

    write_points_xyz(ep.truth_3d, dir("truth.txt"));
    std::vector<Eigen::Vector3d> uncorrected;
    for (const LidarPacket& pk : ep.scan.packets) {
      for (const LidarPoint& p : pk.points) uncorrected.push_back(p.head<3>());
    }
    write_points_xyz(uncorrected, dir("uncorrected.txt"));
    write_augmented_cloud(to_augmented(out.eval0.corrected_3d),
                          dir("corrected.txt"));

    std::vector<Eigen::Vector2d> px_truth, px_uncorrected;
    for (const auto& px : ep.truth_pixels) {
      if (px) px_truth.push_back(*px);
    }
    for (const Eigen::Vector3d& p : uncorrected) {
      const LidarPoint q = cfg.rig.t_cam_ld * make_lidar_point(p.x(), p.y(),
                                                               p.z());
      if (const auto px = project_point(q.head<3>(), cfg.rig.intrinsics)) {
        px_uncorrected.push_back(*px);
      }
    }
    write_pixels_uv(px_truth, dir("pixels_truth.txt"));
    write_pixels_uv(px_uncorrected, dir("pixels_uncorrected.txt"));

    std::ofstream pc(dir("pixels_corrected.txt"));
    pc << "# columns: packet u v a b theta\n";
    for (const ProjectedPoint& pp : out.eval0.projection_2d.points) {
      const Ellipse e = ellipse_95(pp.cov);
      pc << pp.packet_index << ' ' << canonical_double(pp.mean.x()) << ' '
         << canonical_double(pp.mean.y()) << ' ' << canonical_double(e.a)
         << ' ' << canonical_double(e.b) << ' ' << canonical_double(e.theta)
         << '\n';
    }
    std::cout << "wrote figure data to " << figures_dir << "\n";
  }
  return 0;
}

int run_nees(const std::string& input, const std::string& truth_path,
             const std::string& mode, const std::string& output) {
  const auto cloud = read_augmented_cloud(input);
  std::ifstream in(truth_path);
  if (!in) throw DataError(truth_path + ": cannot open for reading");

  const int dof = mode == "2d" ? 2 : 3;
  std::vector<Eigen::VectorXd> truth;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    Eigen::VectorXd row(dof);
    for (int k = 0; k < dof; ++k) {
      if (!(is >> row[k])) {
        throw DataError(truth_path + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(dof) + " values");
      }
    }
    truth.push_back(row);
  }

  std::vector<double> eps;
  std::size_t t = 0;
  for (const AugmentedPoint& p : cloud) {
    if (dof == 3) {
      if (t >= truth.size()) break;
      eps.push_back(nees(GaussianState{p.xyz, p.cov3}, truth[t++]));
    } else if (p.pixel) {
      if (t >= truth.size()) break;
      eps.push_back(
          nees(GaussianState{p.pixel->uv, p.pixel->cov2}, truth[t++]));
    }
  }
  const std::size_t expected =
      dof == 3 ? cloud.size()
               : static_cast<std::size_t>(std::count_if(
                     cloud.begin(), cloud.end(),
                     [](const AugmentedPoint& p) { return p.pixel.has_value(); }));
  if (truth.size() != expected) {
    throw DataError(truth_path + ": " + std::to_string(truth.size()) +
                    " truth rows for " + std::to_string(expected) +
                    " cloud points");
  }

  const NeesSummary s = summarize_nees(eps, dof);
  const std::string text = nees_summary_json(s);
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output);
    if (!out) throw DataError(output + ": cannot open for writing");
    out << text;
    std::cout << "in-bound rate " << s.rate << " over " << s.count
              << " samples\nwrote " << output << "\n";
  }
  return 0;
}

int run_ellipses(const std::string& input, const std::string& output,
                 int dim) {
  const auto cloud = read_augmented_cloud(input);
  std::ofstream out(output);
  if (!out) throw DataError(output + ": cannot open for writing");
  int written = 0;
  if (dim == 2) {
    out << "# columns: packet u v a b theta\n";
    for (const AugmentedPoint& p : cloud) {
      if (!p.pixel) continue;
      const Ellipse e = ellipse_95(p.pixel->cov2);
      out << p.packet_index << ' ' << canonical_double(p.pixel->uv.x()) << ' '
          << canonical_double(p.pixel->uv.y()) << ' ' << canonical_double(e.a)
          << ' ' << canonical_double(e.b) << ' ' << canonical_double(e.theta)
          << '\n';
      ++written;
    }
  } else {
    out << "# columns: packet x y z ax ay az r00 r01 r02 r10 r11 r12 r20 "
           "r21 r22\n";
    for (const AugmentedPoint& p : cloud) {
      const Ellipsoid e = ellipsoid_95(p.cov3);
      out << p.packet_index << ' ' << canonical_double(p.xyz.x()) << ' '
          << canonical_double(p.xyz.y()) << ' ' << canonical_double(p.xyz.z());
      for (int k = 0; k < 3; ++k) out << ' ' << canonical_double(e.axes[k]);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          out << ' ' << canonical_double(e.rotation(r, c));
        }
      }
      out << '\n';
      ++written;
    }
  }
  std::cout << "wrote " << written << " records to " << output << "\n";
  return 0;
}

void apply_thread_cap() {
  if (const char* env = std::getenv("DESKEW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic lidar ego-motion correction and fisheye "
               "projection"};
  app.require_subcommand(1);

  CorrectArgs cargs;
  CLI::App* correct = app.add_subcommand(
      "correct", "Motion-correct a scan into the reference frame");
  correct->add_option("--scan", cargs.scan_path, "Scan file")->required();
  correct->add_option("--measurements", cargs.meas_path, "Odometry file")
      ->required();
  correct->add_option("--config", cargs.config_path, "Calibration config")
      ->required();
  correct->add_option("--output", cargs.output_path, "Output cloud")
      ->required();
  correct->add_option("--t-ref", cargs.t_ref_arg,
                      "<seconds>|last-packet|image:<ts>");
  correct->add_flag("--no-point-cov", cargs.no_point_cov,
                    "Skip per-point 3D covariances");
  correct->add_flag("--binary", cargs.binary, "Write the binary cloud format");

  CLI::App* project = app.add_subcommand(
      "project", "Correct and project into a camera image");
  project->add_option("--scan", cargs.scan_path, "Scan file")->required();
  project->add_option("--measurements", cargs.meas_path, "Odometry file")
      ->required();
  project->add_option("--config", cargs.config_path, "Calibration config")
      ->required();
  project->add_option("--output", cargs.output_path, "Output cloud")
      ->required();
  project->add_option("--t-ref", cargs.t_ref_arg,
                      "<seconds>|last-packet|image:<ts>");
  project->add_option("--camera", cargs.camera_id,
                      "Camera id (default: first in config)");
  project->add_flag("--no-point-cov", cargs.no_point_cov,
                    "Skip per-point 3D covariances");
  project->add_flag("--binary", cargs.binary, "Write the binary cloud format");

  std::string sim_config_path, report_path = "report.json", figures_dir;
  int runs = 200;
  std::uint64_t seed = 1;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo consistency evaluation");
  simulate->add_option("--sim-config", sim_config_path, "Simulation config");
  CLI::Option* runs_opt =
      simulate->add_option("--runs", runs, "Number of Monte Carlo runs");
  CLI::Option* seed_opt = simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--report", report_path, "Report output path");
  simulate->add_option("--figures", figures_dir,
                       "Directory for overlay figure data");

  std::string nees_input, nees_truth, nees_mode = "3d", nees_output;
  CLI::App* nees_cmd =
      app.add_subcommand("nees", "Score a cloud against ground truth");
  nees_cmd->add_option("--input", nees_input, "Augmented cloud")->required();
  nees_cmd->add_option("--truth", nees_truth, "Ground truth file")->required();
  nees_cmd->add_option("--mode", nees_mode, "3d or 2d")
      ->check(CLI::IsMember({"3d", "2d"}));
  nees_cmd->add_option("--output", nees_output, "Report path (default stdout)");

  std::string ell_input, ell_output;
  int ell_dim = 2;
  CLI::App* ellipses =
      app.add_subcommand("ellipses", "95% confidence ellipse plot data");
  ellipses->add_option("--input", ell_input, "Augmented cloud")->required();
  ellipses->add_option("--output", ell_output, "Output file")->required();
  ellipses->add_option("--dim", ell_dim, "2 (pixel) or 3 (point)")
      ->check(CLI::IsMember({2, 3}));

  CLI11_PARSE(app, argc, argv);
  apply_thread_cap();

  try {
    if (*correct) return run_correct(cargs, false);
    if (*project) return run_correct(cargs, true);
    if (*simulate) {
      return run_simulate(sim_config_path, runs, seed, runs_opt->count() > 0,
                          seed_opt->count() > 0, report_path, figures_dir);
    }
    if (*nees_cmd) {
      return run_nees(nees_input, nees_truth, nees_mode, nees_output);
    }
    if (*ellipses) return run_ellipses(ell_input, ell_output, ell_dim);
  } catch (const deskew::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const deskew::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const deskew::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
