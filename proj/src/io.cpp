#include "deskew/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deskew/errors.hpp"

namespace deskew {

using json = nlohmann::ordered_json;

namespace {

constexpr char kCloudMagic[8] = {'A', 'U', 'G', 'P', 'C', 'L', '0', '1'};
constexpr double kDegToRad = M_PI / 180.0;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, const std::string& path,
                    int line) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw DataError(path + ":" + std::to_string(line) +
                    ": cannot parse number '" + tok + "'");
  }
  return v;
}

int parse_int(const std::string& tok, const std::string& path, int line) {
  int v = 0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw DataError(path + ":" + std::to_string(line) +
                    ": cannot parse integer '" + tok + "'");
  }
  return v;
}

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError(path + ": cannot open for reading");
  return in;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

// --- JSON helpers ---------------------------------------------------------

Eigen::Matrix3d parse_matrix3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(field + ": expected 3 rows");
  }
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) {
      throw ConfigError(field + ": expected 3 columns in row " +
                        std::to_string(r));
    }
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Eigen::Vector3d parse_vector3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(field + ": expected 3 values");
  }
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(),
                         j[2].get<double>());
}

HomTransform parse_transform(const json& j, const std::string& field) {
  if (j.contains("matrix")) {
    const json& rows = j["matrix"];
    if (!rows.is_array() || rows.size() != 4) {
      throw ConfigError(field + ".matrix: expected 4 rows");
    }
    HomTransform t;
    for (int r = 0; r < 4; ++r) {
      if (!rows[r].is_array() || rows[r].size() != 4) {
        throw ConfigError(field + ".matrix: expected 4 columns in row " +
                          std::to_string(r));
      }
      for (int c = 0; c < 4; ++c) t(r, c) = rows[r][c].get<double>();
    }
    if (!is_rigid_transform(t)) {
      throw ConfigError(field +
                        ".matrix: not a rigid transform (rotation must be "
                        "orthonormal, bottom row [0 0 0 1])");
    }
    return t;
  }
  Pose6D pose;
  if (j.contains("translation")) {
    const Eigen::Vector3d tr = parse_vector3(j["translation"],
                                             field + ".translation");
    pose.x = tr.x();
    pose.y = tr.y();
    pose.z = tr.z();
  }
  if (j.contains("rpy_deg")) {
    const Eigen::Vector3d r = parse_vector3(j["rpy_deg"], field + ".rpy_deg");
    pose.roll = r.x() * kDegToRad;
    pose.pitch = r.y() * kDegToRad;
    pose.yaw = r.z() * kDegToRad;
  } else if (j.contains("rpy")) {
    const Eigen::Vector3d r = parse_vector3(j["rpy"], field + ".rpy");
    pose.roll = r.x();
    pose.pitch = r.y();
    pose.yaw = r.z();
  }
  return pose_to_transform(pose);
}

json transform_to_json(const HomTransform& t) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(t(r, c));
    rows.push_back(row);
  }
  return json{{"matrix", rows}};
}

json matrix3_to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 3; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

UtParams parse_ut(const json& j, const std::string& field) {
  UtParams ut;
  if (j.contains("alpha")) ut.alpha = j["alpha"].get<double>();
  if (j.contains("kappa")) ut.kappa = j["kappa"].get<double>();
  if (j.contains("beta")) ut.beta = j["beta"].get<double>();
  try {
    ut.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field + ": " + e.what());
  }
  return ut;
}

NoiseConfig parse_noise(const json& j, const std::string& field) {
  NoiseConfig noise;
  // Experiment defaults: 0.05 m/s on v_x, 2 deg/s, sigma_t = 0.6 ms.
  noise.cov_v = 0.05 * 0.05 * Eigen::Matrix3d::Identity();
  const double w_std_default = 2.0 * kDegToRad;
  noise.cov_w = w_std_default * w_std_default * Eigen::Matrix3d::Identity();
  noise.sigma_t = 0.0006;
  noise.use_vx_only = true;

  if (j.contains("linear_cov")) {
    noise.cov_v = parse_matrix3(j["linear_cov"], field + ".linear_cov");
  } else if (j.contains("linear_std")) {
    const Eigen::Vector3d s = parse_vector3(j["linear_std"],
                                            field + ".linear_std");
    noise.cov_v = s.cwiseProduct(s).asDiagonal();
  }
  if (j.contains("angular_cov")) {
    noise.cov_w = parse_matrix3(j["angular_cov"], field + ".angular_cov");
  } else if (j.contains("angular_std_deg")) {
    const Eigen::Vector3d s =
        parse_vector3(j["angular_std_deg"], field + ".angular_std_deg") *
        kDegToRad;
    noise.cov_w = s.cwiseProduct(s).asDiagonal();
  }
  if (j.contains("sigma_t")) noise.sigma_t = j["sigma_t"].get<double>();
  if (j.contains("use_vx_only")) {
    noise.use_vx_only = j["use_vx_only"].get<bool>();
  }
  if (j.contains("ref_pose_var")) {
    noise.ref_pose_var = j["ref_pose_var"].get<double>();
  }
  if (noise.sigma_t < 0.0) {
    throw ConfigError(field + ".sigma_t: must be >= 0");
  }
  if (noise.ref_pose_var < 0.0) {
    throw ConfigError(field + ".ref_pose_var: must be >= 0");
  }
  return noise;
}

CameraIntrinsics parse_intrinsics(const json& j, const std::string& field) {
  CameraIntrinsics intr;
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"}) {
    if (!j.contains(key)) {
      throw ConfigError(field + "." + key + ": missing");
    }
  }
  intr.fx = j["fx"].get<double>();
  intr.fy = j["fy"].get<double>();
  intr.cx = j["cx"].get<double>();
  intr.cy = j["cy"].get<double>();
  intr.width = j["width"].get<int>();
  intr.height = j["height"].get<int>();
  if (j.contains("skew")) intr.skew = j["skew"].get<double>();
  if (j.contains("dist")) {
    const json& d = j["dist"];
    if (!d.is_array() || d.size() != 4) {
      throw ConfigError(field + ".dist: expected 4 coefficients");
    }
    intr.k1 = d[0].get<double>();
    intr.k2 = d[1].get<double>();
    intr.k3 = d[2].get<double>();
    intr.k4 = d[3].get<double>();
  }
  try {
    intr.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field + ": " + std::string(e.what()));
  }
  return intr;
}

json intrinsics_to_json(const CameraIntrinsics& intr) {
  return json{{"fx", intr.fx},
              {"fy", intr.fy},
              {"cx", intr.cx},
              {"cy", intr.cy},
              {"skew", intr.skew},
              {"dist", {intr.k1, intr.k2, intr.k3, intr.k4}},
              {"width", intr.width},
              {"height", intr.height}};
}

json load_json_file(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    return json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

const CalibrationConfig::Camera& CalibrationConfig::camera(
    const std::string& id) const {
  for (const Camera& c : cameras) {
    if (c.id == id) return c;
  }
  throw ConfigError("camera '" + id + "' not found in config");
}

CalibrationConfig load_config(const std::string& path) {
  const json j = load_json_file(path);
  CalibrationConfig cfg;
  try {
    cfg.ut = j.contains("ut") ? parse_ut(j["ut"], "ut") : UtParams{};
    cfg.noise = parse_noise(j.contains("noise") ? j["noise"] : json::object(),
                            "noise");
    if (j.contains("t_veh_ld")) {
      cfg.t_veh_ld = parse_transform(j["t_veh_ld"], "t_veh_ld");
    }
    if (j.contains("cameras")) {
      const json& cams = j["cameras"];
      if (!cams.is_array()) throw ConfigError("cameras: expected array");
      for (std::size_t i = 0; i < cams.size(); ++i) {
        const std::string field = "cameras[" + std::to_string(i) + "]";
        const json& cj = cams[i];
        CalibrationConfig::Camera cam;
        if (!cj.contains("id")) throw ConfigError(field + ".id: missing");
        cam.id = cj["id"].get<std::string>();
        if (cam.id.empty() ||
            cam.id.find_first_of(" \t\n") != std::string::npos) {
          throw ConfigError(field + ".id: must be non-empty without spaces");
        }
        if (!cj.contains("intrinsics")) {
          throw ConfigError(field + ".intrinsics: missing");
        }
        cam.intrinsics =
            parse_intrinsics(cj["intrinsics"], field + ".intrinsics");
        if (!cj.contains("t_cam_ld")) {
          throw ConfigError(field + ".t_cam_ld: missing");
        }
        cam.t_cam_ld = parse_transform(cj["t_cam_ld"], field + ".t_cam_ld");
        cfg.cameras.push_back(std::move(cam));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

void save_config(const CalibrationConfig& cfg, const std::string& path) {
  json j;
  j["ut"] = {{"alpha", cfg.ut.alpha},
             {"kappa", cfg.ut.kappa},
             {"beta", cfg.ut.beta}};
  j["noise"] = {{"linear_cov", matrix3_to_json(cfg.noise.cov_v)},
                {"angular_cov", matrix3_to_json(cfg.noise.cov_w)},
                {"sigma_t", cfg.noise.sigma_t},
                {"use_vx_only", cfg.noise.use_vx_only},
                {"ref_pose_var", cfg.noise.ref_pose_var}};
  j["t_veh_ld"] = transform_to_json(cfg.t_veh_ld);
  json cams = json::array();
  for (const auto& cam : cfg.cameras) {
    cams.push_back(json{{"id", cam.id},
                        {"intrinsics", intrinsics_to_json(cam.intrinsics)},
                        {"t_cam_ld", transform_to_json(cam.t_cam_ld)}});
  }
  j["cameras"] = cams;
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

LidarScan read_scan(const std::string& path) {
  std::ifstream in = open_input(path);
  LidarScan scan;
  std::string line;
  int line_no = 0;
  int current_packet = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 5) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 5 fields (packet timestamp x y z), got " +
                      std::to_string(fields.size()));
    }
    const int packet = parse_int(fields[0], path, line_no);
    const double ts = parse_double(fields[1], path, line_no);
    const LidarPoint point = make_lidar_point(
        parse_double(fields[2], path, line_no),
        parse_double(fields[3], path, line_no),
        parse_double(fields[4], path, line_no));
    if (!point.allFinite() || !std::isfinite(ts)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": non-finite value");
    }
    if (packet != current_packet) {
      if (packet < current_packet) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": packet indices must be non-decreasing");
      }
      if (!scan.packets.empty() && ts <= scan.packets.back().timestamp) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": packet timestamps must be strictly increasing");
      }
      scan.packets.push_back(LidarPacket{{}, ts});
      current_packet = packet;
    } else if (ts != scan.packets.back().timestamp) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": timestamp differs within packet " +
                      std::to_string(packet));
    }
    scan.packets.back().points.push_back(point);
  }
  if (scan.packets.empty()) {
    throw DataError(path + ": empty input");
  }
  return scan;
}

std::vector<KinematicMeasurement> read_measurements(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<KinematicMeasurement> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 7) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 7 fields (timestamp vx vy vz wx wy wz), "
                      "got " +
                      std::to_string(fields.size()));
    }
    KinematicMeasurement m;
    m.timestamp = parse_double(fields[0], path, line_no);
    m.v = Eigen::Vector3d(parse_double(fields[1], path, line_no),
                          parse_double(fields[2], path, line_no),
                          parse_double(fields[3], path, line_no));
    m.w = Eigen::Vector3d(parse_double(fields[4], path, line_no),
                          parse_double(fields[5], path, line_no),
                          parse_double(fields[6], path, line_no));
    if (!std::isfinite(m.timestamp) || !m.v.allFinite() || !m.w.allFinite()) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": non-finite value");
    }
    if (!out.empty() && m.timestamp <= out.back().timestamp) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": timestamps must be strictly increasing");
    }
    out.push_back(m);
  }
  if (out.empty()) {
    throw DataError(path + ": empty input");
  }
  return out;
}

std::string canonical_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

void write_cloud_text(const std::vector<AugmentedPoint>& points,
                      const std::string& path) {
  std::ofstream out = open_output(path);
  out << "# deskew augmented cloud v1\n";
  out << "# columns: packet timestamp x y z cxx cxy cxz cyy cyz czz"
         " [cam u v cuu cuv cvv in_frame]\n";
  for (const AugmentedPoint& p : points) {
    out << p.packet_index << ' ' << canonical_double(p.timestamp) << ' '
        << canonical_double(p.xyz.x()) << ' ' << canonical_double(p.xyz.y())
        << ' ' << canonical_double(p.xyz.z());
    const double c[6] = {p.cov3(0, 0), p.cov3(0, 1), p.cov3(0, 2),
                         p.cov3(1, 1), p.cov3(1, 2), p.cov3(2, 2)};
    for (double v : c) out << ' ' << canonical_double(v);
    if (p.pixel) {
      out << ' ' << p.pixel->camera_id << ' '
          << canonical_double(p.pixel->uv.x()) << ' '
          << canonical_double(p.pixel->uv.y()) << ' '
          << canonical_double(p.pixel->cov2(0, 0)) << ' '
          << canonical_double(p.pixel->cov2(0, 1)) << ' '
          << canonical_double(p.pixel->cov2(1, 1)) << ' '
          << (p.pixel->in_frame ? 1 : 0);
    }
    out << '\n';
  }
}

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError(path + ": truncated binary cloud");
  return v;
}

void write_cloud_binary(const std::vector<AugmentedPoint>& points,
                        const std::string& path) {
  std::ofstream out = open_output(path, true);
  out.write(kCloudMagic, sizeof(kCloudMagic));

  std::vector<std::string> cameras;
  auto camera_index = [&cameras](const std::string& id) {
    for (std::size_t i = 0; i < cameras.size(); ++i) {
      if (cameras[i] == id) return static_cast<std::int32_t>(i);
    }
    cameras.push_back(id);
    return static_cast<std::int32_t>(cameras.size() - 1);
  };
  std::vector<std::int32_t> cam_of(points.size(), -1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].pixel) cam_of[i] = camera_index(points[i].pixel->camera_id);
  }

  write_raw(out, static_cast<std::uint32_t>(cameras.size()));
  for (const std::string& id : cameras) {
    write_raw(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  write_raw(out, static_cast<std::uint64_t>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const AugmentedPoint& p = points[i];
    write_raw(out, static_cast<std::int32_t>(p.packet_index));
    write_raw(out, p.timestamp);
    for (int k = 0; k < 3; ++k) write_raw(out, p.xyz[k]);
    const double c[6] = {p.cov3(0, 0), p.cov3(0, 1), p.cov3(0, 2),
                         p.cov3(1, 1), p.cov3(1, 2), p.cov3(2, 2)};
    for (double v : c) write_raw(out, v);
    write_raw(out, cam_of[i]);
    const bool has = p.pixel.has_value();
    write_raw(out, has ? p.pixel->uv.x() : 0.0);
    write_raw(out, has ? p.pixel->uv.y() : 0.0);
    write_raw(out, has ? p.pixel->cov2(0, 0) : 0.0);
    write_raw(out, has ? p.pixel->cov2(0, 1) : 0.0);
    write_raw(out, has ? p.pixel->cov2(1, 1) : 0.0);
    write_raw(out, static_cast<std::uint8_t>(
                       has && p.pixel->in_frame ? 1 : 0));
  }
}

Eigen::Matrix3d cov3_from_triangle(const double c[6]) {
  Eigen::Matrix3d m;
  m << c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5];
  return m;
}

template <typename Matrix>
void require_psd(const Matrix& m, const std::string& path, int line) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw DataError(path + (line > 0 ? ":" + std::to_string(line) : "") +
                    ": covariance is not positive semi-definite");
  }
}

std::vector<AugmentedPoint> read_cloud_binary(const std::string& path) {
  std::ifstream in = open_input(path, true);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCloudMagic, sizeof(magic)) != 0) {
    throw DataError(path + ": bad magic for binary cloud");
  }
  const auto n_cams = read_raw<std::uint32_t>(in, path);
  std::vector<std::string> cameras(n_cams);
  for (auto& id : cameras) {
    const auto len = read_raw<std::uint32_t>(in, path);
    id.resize(len);
    in.read(id.data(), len);
    if (!in) throw DataError(path + ": truncated binary cloud");
  }
  const auto n = read_raw<std::uint64_t>(in, path);
  std::vector<AugmentedPoint> points(n);
  for (auto& p : points) {
    p.packet_index = read_raw<std::int32_t>(in, path);
    p.timestamp = read_raw<double>(in, path);
    for (int k = 0; k < 3; ++k) p.xyz[k] = read_raw<double>(in, path);
    double c[6];
    for (double& v : c) v = read_raw<double>(in, path);
    p.cov3 = cov3_from_triangle(c);
    require_psd(p.cov3, path, 0);
    const auto cam = read_raw<std::int32_t>(in, path);
    const double u = read_raw<double>(in, path);
    const double v = read_raw<double>(in, path);
    const double cuu = read_raw<double>(in, path);
    const double cuv = read_raw<double>(in, path);
    const double cvv = read_raw<double>(in, path);
    const auto in_frame = read_raw<std::uint8_t>(in, path);
    if (cam >= 0) {
      if (static_cast<std::size_t>(cam) >= cameras.size()) {
        throw DataError(path + ": camera index out of range");
      }
      AugmentedPoint::Pixel px;
      px.camera_id = cameras[cam];
      px.uv = Eigen::Vector2d(u, v);
      px.cov2 << cuu, cuv, cuv, cvv;
      require_psd(px.cov2, path, 0);
      px.in_frame = in_frame != 0;
      p.pixel = std::move(px);
    }
  }
  return points;
}

std::vector<AugmentedPoint> read_cloud_text(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<AugmentedPoint> points;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 11 && fields.size() != 18) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 11 or 18 fields, got " +
                      std::to_string(fields.size()));
    }
    AugmentedPoint p;
    p.packet_index = parse_int(fields[0], path, line_no);
    p.timestamp = parse_double(fields[1], path, line_no);
    p.xyz = Eigen::Vector3d(parse_double(fields[2], path, line_no),
                            parse_double(fields[3], path, line_no),
                            parse_double(fields[4], path, line_no));
    double c[6];
    for (int k = 0; k < 6; ++k) {
      c[k] = parse_double(fields[5 + k], path, line_no);
    }
    p.cov3 = cov3_from_triangle(c);
    require_psd(p.cov3, path, line_no);
    if (fields.size() == 18) {
      AugmentedPoint::Pixel px;
      px.camera_id = fields[11];
      px.uv = Eigen::Vector2d(parse_double(fields[12], path, line_no),
                              parse_double(fields[13], path, line_no));
      const double cuu = parse_double(fields[14], path, line_no);
      const double cuv = parse_double(fields[15], path, line_no);
      const double cvv = parse_double(fields[16], path, line_no);
      px.cov2 << cuu, cuv, cuv, cvv;
      require_psd(px.cov2, path, line_no);
      px.in_frame = parse_int(fields[17], path, line_no) != 0;
      p.pixel = std::move(px);
    }
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace

void write_augmented_cloud(const std::vector<AugmentedPoint>& points,
                           const std::string& path, bool binary) {
  for (const AugmentedPoint& p : points) {
    if (p.pixel && (p.pixel->camera_id.empty() ||
                    p.pixel->camera_id.find_first_of(" \t") !=
                        std::string::npos)) {
      throw DataError("camera id must be non-empty without spaces");
    }
  }
  if (binary) {
    write_cloud_binary(points, path);
  } else {
    write_cloud_text(points, path);
  }
}

std::vector<AugmentedPoint> read_augmented_cloud(const std::string& path) {
  {
    std::ifstream probe = open_input(path, true);
    char magic[8] = {};
    probe.read(magic, sizeof(magic));
    if (probe.gcount() == 8 &&
        std::memcmp(magic, kCloudMagic, sizeof(magic)) == 0) {
      return read_cloud_binary(path);
    }
  }
  return read_cloud_text(path);
}

namespace {

json summary_to_json(const NeesSummary& s) {
  return json{{"dof", s.dof},
              {"bounds", {s.bound_lo, s.bound_hi}},
              {"count", s.count},
              {"in_bounds", s.in_bounds},
              {"rate", s.rate},
              {"mean", s.mean_epsilon},
              {"histogram_max", s.histogram_max},
              {"histogram", s.histogram},
              {"overflow", s.overflow}};
}

}  // namespace

std::string nees_summary_json(const NeesSummary& summary) {
  return summary_to_json(summary).dump(2) + "\n";
}

std::string report_to_json(const ConsistencyReport& report) {
  json j;
  j["runs"] = report.runs;
  j["seed"] = report.seed;
  j["nees_3d"] = summary_to_json(report.nees_3d);
  j["nees_2d"] = summary_to_json(report.nees_2d);
  j["dropped_2d"] = report.dropped_2d;
  return j.dump(2) + "\n";
}

void write_report(const ConsistencyReport& report, const std::string& path) {
  std::ofstream out = open_output(path);
  out << report_to_json(report);
}

SimConfig load_sim_config(const std::string& path) {
  const json j = load_json_file(path);
  SimConfig cfg;
  try {
    auto range = [&](const char* key, double& lo, double& hi) {
      if (!j.contains(key)) return;
      const json& r = j[key];
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError(std::string(key) + ": expected [lo, hi]");
      }
      lo = r[0].get<double>();
      hi = r[1].get<double>();
    };
    range("v_range", cfg.v_min, cfg.v_max);
    range("w_range_deg", cfg.w_min_deg, cfg.w_max_deg);
    range("elevation_range_deg", cfg.elevation_min_deg, cfg.elevation_max_deg);
    range("range_range", cfg.range_min, cfg.range_max);
    if (j.contains("scan_period")) {
      cfg.scan_period = j["scan_period"].get<double>();
    }
    if (j.contains("packets_per_scan")) {
      cfg.packets_per_scan = j["packets_per_scan"].get<int>();
    }
    if (j.contains("noise_v_std")) {
      cfg.noise_v_std = j["noise_v_std"].get<double>();
    }
    if (j.contains("noise_w_std_deg")) {
      cfg.noise_w_std_deg = j["noise_w_std_deg"].get<double>();
    }
    if (j.contains("jitter_std")) {
      cfg.jitter_std = j["jitter_std"].get<double>();
    }
    if (j.contains("runs")) cfg.runs = j["runs"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("clockwise")) cfg.clockwise = j["clockwise"].get<bool>();
    if (j.contains("measurement_rate_hz")) {
      cfg.measurement_rate_hz = j["measurement_rate_hz"].get<int>();
    }
    if (j.contains("ut")) cfg.ut = parse_ut(j["ut"], "ut");
    if (j.contains("rig")) {
      const json& rj = j["rig"];
      if (rj.contains("intrinsics")) {
        cfg.rig.intrinsics =
            parse_intrinsics(rj["intrinsics"], "rig.intrinsics");
      }
      if (rj.contains("t_cam_ld")) {
        cfg.rig.t_cam_ld = parse_transform(rj["t_cam_ld"], "rig.t_cam_ld");
      }
      if (rj.contains("t_veh_ld")) {
        cfg.rig.t_veh_ld = parse_transform(rj["t_veh_ld"], "rig.t_veh_ld");
      }
    }
    cfg.validate();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

void write_points_xyz(const std::vector<Eigen::Vector3d>& points,
                      const std::string& path) {
  std::ofstream out = open_output(path);
  out << "# columns: x y z\n";
  for (const auto& p : points) {
    out << canonical_double(p.x()) << ' ' << canonical_double(p.y()) << ' '
        << canonical_double(p.z()) << '\n';
  }
}

void write_pixels_uv(const std::vector<Eigen::Vector2d>& pixels,
                     const std::string& path) {
  std::ofstream out = open_output(path);
  out << "# columns: u v\n";
  for (const auto& p : pixels) {
    out << canonical_double(p.x()) << ' ' << canonical_double(p.y()) << '\n';
  }
}

}  // namespace deskew
