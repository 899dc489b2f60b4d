#pragma once

// Depth-camera inertial odometry scenario: analytic helix trajectory with a
// roll/pitch wobble, three known landmarks, and a side-by-side run of the
// filters with per-timestamp error logging.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "multiframe/filters.hpp"

namespace multiframe {

struct TrajectoryConfig {
  double radius = 5.0;        // m
  double angular_rate = 0.5;  // rad/s
  double climb_rate = 0.2;    // m/s
  double height = 0.0;        // m, initial height
  double roll_amplitude = 0.3;   // rad
  double roll_frequency = 1.5;   // rad/s
  double pitch_amplitude = 0.25;  // rad
  double pitch_frequency = 1.1;   // rad/s
};

struct InitialCovariance {
  double rot = 0.01;     // rad
  double pos = 0.01;     // m
  double vel = 0.01;     // m/s
  double ext_rot = 0.3;  // rad
  double ext_pos = 0.2;  // m

  Mat15 matrix() const {
    Vec15 sd;
    sd << Vec3::Constant(rot), Vec3::Constant(pos), Vec3::Constant(vel), Vec3::Constant(ext_rot),
        Vec3::Constant(ext_pos);
    return sd.cwiseAbs2().asDiagonal();
  }
};

/// Gains of the default scenario: small process terms (deterministic observer)
/// and 1 cm landmark noise.
inline NoiseConfig scenario_noise() {
  NoiseConfig n;
  n.gyro_cov = Mat3::Identity() * 1e-8;
  n.accel_cov = Mat3::Identity() * 1e-8;
  n.ext_rot_cov = Mat3::Identity() * 1e-10;
  n.ext_pos_cov = Mat3::Identity() * 1e-10;
  n.meas_cov = Mat3::Identity() * 1e-4;
  return n;
}

struct ScenarioConfig {
  double duration = 60.0;  // s
  double imu_rate = 200.0;  // Hz
  double cam_rate = 10.0;   // Hz
  std::vector<Vec3> landmarks{{6, 2, 1}, {-4, 5, 8}, {1, -6, 4}};
  TrajectoryConfig trajectory;
  Vec3 extrinsic_rotation{0.05, -0.1, 0.02};  // axis-angle of the true Rc
  Vec3 extrinsic_translation{0.1, 0.05, -0.03};  // true pc, m
  Vec3 offset_rotation{0.1, -0.2, 0.2};      // 0.3 rad about a skew axis
  Vec3 offset_translation{0.12, 0.0, -0.16};  // 0.2 m
  InitialCovariance initial_std;
  NoiseConfig noise = scenario_noise();
  Vec3 gravity = default_gravity();
  std::uint64_t seed = 1;
  bool stochastic = false;
  std::vector<FilterKind> filters{FilterKind::Mekf, FilterKind::Iekf, FilterKind::MfgIekf};
  double converge_rot = 0.01;  // rad
  double converge_pos = 0.01;  // m
  double converge_dwell = 1.0;  // s
  double divergence = 1e3;

  /// Number of IMU steps; rows per filter is steps() + 1 for a positive duration.
  long steps() const { return std::lround(duration * imu_rate); }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (!(duration >= 0) || !std::isfinite(duration)) fail("duration must be >= 0");
    if (!(cam_rate >= 1)) fail("cam_rate must be >= 1 Hz");
    if (!(imu_rate >= cam_rate)) fail("imu_rate must be >= cam_rate");
    if (std::abs(duration * imu_rate - std::round(duration * imu_rate)) > 1e-9) {
      fail("duration * imu_rate must be an integer");
    }
    if (landmarks.size() != 3) fail("exactly 3 landmarks are required");
    if (filters.empty()) fail("at least one filter is required");
    for (std::size_t i = 0; i < filters.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (filters[i] == filters[j]) fail("filter '" + to_string(filters[i]) + "' listed twice");
    for (const Mat3* c : {&noise.gyro_cov, &noise.accel_cov, &noise.ext_rot_cov, &noise.ext_pos_cov,
                          &noise.meas_cov}) {
      if ((*c - c->transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
          Eigen::SelfAdjointEigenSolver<Mat3>(*c).eigenvalues().minCoeff() < -1e-12) {
        fail("noise covariances must be symmetric PSD");
      }
    }
    if (!(converge_dwell >= 0) || !(converge_rot > 0) || !(converge_pos > 0)) {
      fail("convergence thresholds must be positive");
    }
  }
};

namespace detail {

inline Vec3 json_vec3(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("config: '" + key + "' must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

/// A covariance is either a scalar (isotropic variance) or a 3x3 nested array.
inline Mat3 json_cov(const nlohmann::json& j, const std::string& key) {
  if (j.is_number()) return Mat3::Identity() * j.get<double>();
  if (!j.is_array() || j.size() != 3) throw ConfigError("config: '" + key + "' must be a number or 3x3");
  Mat3 M;
  for (int r = 0; r < 3; ++r) M.row(r) = json_vec3(j[r], key).transpose();
  return M;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Fields missing from the JSON keep their defaults; unknown keys are rejected.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "duration", "imu_rate", "cam_rate", "landmarks", "trajectory", "extrinsic", "offset",
      "initial_std", "noise", "gravity", "seed", "stochastic", "filters", "convergence"};
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  ScenarioConfig c;
  try {
    detail::read(j, "duration", c.duration);
    detail::read(j, "imu_rate", c.imu_rate);
    detail::read(j, "cam_rate", c.cam_rate);
    detail::read(j, "seed", c.seed);
    detail::read(j, "stochastic", c.stochastic);
    if (j.contains("landmarks")) {
      c.landmarks.clear();
      for (const auto& l : j.at("landmarks")) c.landmarks.push_back(detail::json_vec3(l, "landmarks"));
    }
    if (j.contains("gravity")) c.gravity = detail::json_vec3(j.at("gravity"), "gravity");
    if (j.contains("trajectory")) {
      const auto& t = j.at("trajectory");
      auto& tr = c.trajectory;
      detail::read(t, "radius", tr.radius);
      detail::read(t, "angular_rate", tr.angular_rate);
      detail::read(t, "climb_rate", tr.climb_rate);
      detail::read(t, "height", tr.height);
      detail::read(t, "roll_amplitude", tr.roll_amplitude);
      detail::read(t, "roll_frequency", tr.roll_frequency);
      detail::read(t, "pitch_amplitude", tr.pitch_amplitude);
      detail::read(t, "pitch_frequency", tr.pitch_frequency);
    }
    if (j.contains("extrinsic")) {
      const auto& e = j.at("extrinsic");
      if (e.contains("rotation")) c.extrinsic_rotation = detail::json_vec3(e.at("rotation"), "extrinsic.rotation");
      if (e.contains("translation")) {
        c.extrinsic_translation = detail::json_vec3(e.at("translation"), "extrinsic.translation");
      }
    }
    if (j.contains("offset")) {
      const auto& o = j.at("offset");
      if (o.contains("rotation")) c.offset_rotation = detail::json_vec3(o.at("rotation"), "offset.rotation");
      if (o.contains("translation")) {
        c.offset_translation = detail::json_vec3(o.at("translation"), "offset.translation");
      }
    }
    if (j.contains("initial_std")) {
      const auto& s = j.at("initial_std");
      detail::read(s, "rot", c.initial_std.rot);
      detail::read(s, "pos", c.initial_std.pos);
      detail::read(s, "vel", c.initial_std.vel);
      detail::read(s, "ext_rot", c.initial_std.ext_rot);
      detail::read(s, "ext_pos", c.initial_std.ext_pos);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      const std::pair<const char*, Mat3*> fields[] = {
          {"gyro_cov", &c.noise.gyro_cov},       {"accel_cov", &c.noise.accel_cov},
          {"ext_rot_cov", &c.noise.ext_rot_cov}, {"ext_pos_cov", &c.noise.ext_pos_cov},
          {"meas_cov", &c.noise.meas_cov}};
      for (const auto& [key, dst] : fields) {
        if (n.contains(key)) *dst = detail::json_cov(n.at(key), key);
      }
    }
    if (j.contains("filters")) {
      c.filters.clear();
      for (const auto& f : j.at("filters")) c.filters.push_back(filter_kind_from_string(f.get<std::string>()));
    }
    if (j.contains("convergence")) {
      const auto& v = j.at("convergence");
      detail::read(v, "rot", c.converge_rot);
      detail::read(v, "pos", c.converge_pos);
      detail::read(v, "dwell", c.converge_dwell);
      detail::read(v, "divergence", c.divergence);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

struct TruthSample {
  DcioState state;
  ImuSample imu;
};

/// Analytic truth at time t: position on the helix, yaw along the tangent,
/// roll and pitch wobbling sinusoidally (R = Rz(yaw) Ry(pitch) Rx(roll)).
/// Returns the exact body-frame rate and specific force.
inline TruthSample generate_truth(const ScenarioConfig& c, double t) {
  const auto& tr = c.trajectory;
  const double w = tr.angular_rate, r = tr.radius;
  const double s = std::sin(w * t), co = std::cos(w * t);
  const Vec3 p(r * co, r * s, tr.height + tr.climb_rate * t);
  const Vec3 v(-r * w * s, r * w * co, tr.climb_rate);
  const Vec3 acc(-r * w * w * co, -r * w * w * s, 0.0);

  const double yaw = w * t + M_PI / 2, yaw_rate = w;
  const double roll = tr.roll_amplitude * std::sin(tr.roll_frequency * t);
  const double roll_rate = tr.roll_amplitude * tr.roll_frequency * std::cos(tr.roll_frequency * t);
  const double pitch = tr.pitch_amplitude * std::sin(tr.pitch_frequency * t);
  const double pitch_rate =
      tr.pitch_amplitude * tr.pitch_frequency * std::cos(tr.pitch_frequency * t);

  const Mat3 R = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(roll, Vec3::UnitX()))
                     .toRotationMatrix();
  const double sr = std::sin(roll), cr = std::cos(roll), sp = std::sin(pitch), cp = std::cos(pitch);
  const Vec3 omega(roll_rate - yaw_rate * sp, pitch_rate * cr + yaw_rate * cp * sr,
                   -pitch_rate * sr + yaw_rate * cp * cr);

  TruthSample out;
  out.state.R = R;
  out.state.p = p;
  out.state.v = v;
  out.state.Rc = so_exp(Vector(c.extrinsic_rotation), 3);
  out.state.pc = c.extrinsic_translation;
  out.imu.omega = omega;
  out.imu.accel = R.transpose() * (acc - c.gravity);
  return out;
}

/// Initial estimate: truth with the extrinsics offset, Rc_hat = Rc Exp(offset).
inline DcioState initial_estimate(const ScenarioConfig& c) {
  DcioState s = generate_truth(c, 0.0).state;
  s.Rc = s.Rc * Mat3(so_exp(Vector(c.offset_rotation), 3));
  s.pc += c.offset_translation;
  return s;
}

struct LogRow {
  double t = 0;
  std::size_t filter = 0;  // index into RunLog::filters
  StateErrors errors;
  double innov_norm = 0;
};

struct FilterSummary {
  FilterKind kind;
  StateErrors initial;
  StateErrors terminal;
  double time_to_converge = std::numeric_limits<double>::infinity();
  bool diverged = false;
  double diverged_at = std::numeric_limits<double>::quiet_NaN();
  int covariance_warnings = 0;
};

struct RunLog {
  std::vector<FilterKind> filters;
  std::vector<LogRow> rows;  // timestamp-major, then filter order
  std::vector<FilterSummary> summary;
};

/// First time after which both extrinsic errors stay below the thresholds for
/// at least the dwell time (and until the end of the run).
inline double time_to_converge(const std::vector<double>& t, const std::vector<double>& rot,
                               const std::vector<double>& pos, double rot_tol, double pos_tol,
                               double dwell) {
  double since = std::numeric_limits<double>::infinity();
  for (std::size_t k = t.size(); k-- > 0;) {
    if (!(rot[k] < rot_tol && pos[k] < pos_tol)) break;
    since = t[k];
  }
  if (!t.empty() && std::isfinite(since) && t.back() - since >= dwell - 1e-12) return since;
  return std::numeric_limits<double>::infinity();
}

/// Runs every configured filter against the same truth and measurement stream.
/// Truth is propagated by the exact flow of the IMU samples (taken at each step
/// midpoint, zero-order hold), so deterministic mode has no model mismatch.
inline RunLog run(const ScenarioConfig& c) {
  c.validate();
  RunLog log;
  log.filters = c.filters;
  if (c.duration == 0) return log;

  const long n = c.steps();
  const double dt = 1.0 / c.imu_rate;
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto sample = [&](const Mat3& cov) -> Vec3 {
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 z(normal(rng), normal(rng), normal(rng));
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * z;
  };

  DcioState truth = generate_truth(c, 0.0).state;
  const DcioState start = initial_estimate(c);
  std::vector<std::unique_ptr<ErrorStateFilter>> filters;
  std::vector<double> innov(c.filters.size(), 0.0);
  for (auto kind : c.filters) {
    filters.push_back(make_filter(kind, start, c.initial_std.matrix(), c.noise, c.gravity));
    FilterSummary s;
    s.kind = kind;
    s.initial = state_errors(start, truth);
    log.summary.push_back(s);
  }

  std::vector<double> times;
  std::vector<std::vector<double>> rot(filters.size()), pos(filters.size());
  auto record = [&](double t) {
    times.push_back(t);
    for (std::size_t i = 0; i < filters.size(); ++i) {
      auto& s = log.summary[i];
      const StateErrors e = state_errors(filters[i]->mean(), truth);
      const double worst = std::max({e.rot_core, e.pos_core, e.vel_core, e.rot_ext, e.pos_ext});
      if (!s.diverged && !(worst <= c.divergence)) {
        s.diverged = true;
        s.diverged_at = t;
      }
      log.rows.push_back({t, i, e, innov[i]});
      rot[i].push_back(e.rot_ext);
      pos[i].push_back(e.pos_ext);
      s.terminal = e;
    }
  };
  record(0.0);

  long last_frame = 0;
  for (long k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const ImuSample imu = generate_truth(c, t - 0.5 * dt).imu;
    truth = imu_flow(truth, imu, dt, c.gravity);
    ImuSample measured = imu;
    if (c.stochastic) {
      measured.omega += sample(c.noise.gyro_cov / dt);
      measured.accel += sample(c.noise.accel_cov / dt);
    }
    const long frame = static_cast<long>(std::floor(t * c.cam_rate + 1e-9));
    const bool camera = frame > last_frame;
    last_frame = frame;
    std::vector<Vec3> z;
    if (camera) {
      for (const auto& l : c.landmarks) {
        Vec3 m = measure_landmark(truth, l);
        if (c.stochastic) m += sample(c.noise.meas_cov);
        z.push_back(m);
      }
    }
    for (std::size_t i = 0; i < filters.size(); ++i) {
      if (log.summary[i].diverged) continue;
      try {
        filters[i]->predict(measured, dt);
        if (camera) innov[i] = filters[i]->update(c.landmarks, z);
      } catch (const RankError&) {
        log.summary[i].diverged = true;
        log.summary[i].diverged_at = t;
      }
    }
    record(t);
  }

  for (std::size_t i = 0; i < filters.size(); ++i) {
    auto& s = log.summary[i];
    s.covariance_warnings = filters[i]->covariance_warnings();
    if (!s.diverged) {
      s.time_to_converge =
          time_to_converge(times, rot[i], pos[i], c.converge_rot, c.converge_pos, c.converge_dwell);
    }
  }
  return log;
}

inline const char* csv_header() {
  return "t,filter,rot_err_core,pos_err_core,vel_err_core,rot_err_ext,pos_err_ext,innov_norm";
}

inline void write_csv(const RunLog& log, std::ostream& out) {
  out << csv_header() << '\n';
  char buf[64];
  auto num = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%.15e", x);
    return std::string(buf);
  };
  for (const auto& r : log.rows) {
    const auto& e = r.errors;
    out << num(r.t) << ',' << to_string(log.filters[r.filter]) << ',' << num(e.rot_core) << ','
        << num(e.pos_core) << ',' << num(e.vel_core) << ',' << num(e.rot_ext) << ','
        << num(e.pos_ext) << ',' << num(r.innov_norm) << '\n';
  }
}

inline void write_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  write_csv(log, out);
  out.flush();
  if (!out) throw std::runtime_error("write_csv: write to '" + path + "' failed");
}

inline std::string format_summary(const RunLog& log) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-9s %12s %12s %14s %14s %s\n", "filter", "init_rot", "init_pos",
                "converge_s", "final_rot", "final_pos");
  out << line;
  for (const auto& s : log.summary) {
    std::string conv = std::isfinite(s.time_to_converge) ? std::to_string(s.time_to_converge) : "never";
    if (s.diverged) conv = "diverged";
    std::snprintf(line, sizeof line, "%-9s %12.4e %12.4e %14s %14.4e %.4e\n",
                  to_string(s.kind).c_str(), s.initial.rot_ext, s.initial.pos_ext, conv.c_str(),
                  s.terminal.rot_ext, s.terminal.pos_ext);
    out << line;
  }
  return out.str();
}

}  // namespace multiframe
