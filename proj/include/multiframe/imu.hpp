#pragma once

// Depth-camera inertial model: IMU pose (R, p, v) and camera extrinsics
// (Rc, pc), noise-free kinematics
//
//   R' = R omega^,  p' = v,  v' = R a + g,  Rc' = 0,  pc' = 0
//
// and the landmark measurement z = Rc^T (R^T (p_l - p) - pc).

#include <Eigen/Dense>

#include "multiframe/mfg.hpp"

namespace multiframe {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline Vec3 default_gravity() { return {0.0, 0.0, -9.81}; }

struct DcioState {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 Rc = Mat3::Identity();
  Vec3 pc = Vec3::Zero();
};

struct ImuSample {
  Vec3 omega = Vec3::Zero();  // rad/s, body frame
  Vec3 accel = Vec3::Zero();  // m/s^2, specific force in the body frame
};

/// Exact flow for inputs held constant over dt.
inline DcioState imu_flow(const DcioState& s, const ImuSample& imu, double dt,
                          const Vec3& gravity = default_gravity()) {
  const Vector phi = imu.omega * dt;
  const Mat3 G1 = gamma_series(1, phi, 3);
  const Mat3 G2 = gamma_series(2, phi, 3);
  DcioState out = s;
  out.R = s.R * Mat3(so_exp(phi, 3));
  out.v = s.v + s.R * G1 * imu.accel * dt + gravity * dt;
  out.p = s.p + s.v * dt + s.R * G2 * imu.accel * (dt * dt) + 0.5 * gravity * (dt * dt);
  return out;
}

inline Vec3 measure_landmark(const DcioState& s, const Vec3& landmark) {
  return s.Rc.transpose() * (s.R.transpose() * (landmark - s.p) - s.pc);
}

/// MFG(3,2,0,0,1) element: core (R, [p, v]), right factor (Rc, [pc, 0]).
inline MfgElement to_mfg(const DcioState& s) {
  MfgElement chi;
  Matrix x(3, 2);
  x << s.p, s.v;
  chi.core = {s.R, x, Matrix::Zero(3, 0)};
  Matrix xc = Matrix::Zero(3, 2);
  xc.col(0) = s.pc;
  chi.right.push_back({s.Rc, xc, Matrix::Zero(3, 0)});
  return chi;
}

/// Inverse of to_mfg; the second extrinsic column is dropped.
inline DcioState from_mfg(const MfgElement& chi) {
  const auto g = chi.signature();
  if (!(g == MfgSignature{3, 2, 0, 0, 1})) {
    throw InvalidArgument("from_mfg: expected an MFG(3,2,0,0,1) element");
  }
  DcioState s;
  s.R = chi.core.R;
  s.p = chi.core.x.col(0);
  s.v = chi.core.x.col(1);
  s.Rc = chi.right[0].R;
  s.pc = chi.right[0].x.col(0);
  return s;
}

/// Errors between an estimate and the truth, with rotation errors as
/// |log(R_hat R^T)|.
struct StateErrors {
  double rot_core = 0;
  double pos_core = 0;
  double vel_core = 0;
  double rot_ext = 0;
  double pos_ext = 0;
};

inline StateErrors state_errors(const DcioState& estimate, const DcioState& truth) {
  auto angle = [](const Mat3& A) {
    return std::atan2(0.5 * Vec3(A(2, 1) - A(1, 2), A(0, 2) - A(2, 0), A(1, 0) - A(0, 1)).norm(),
                      0.5 * (A.trace() - 1.0));
  };
  return {angle(estimate.R * truth.R.transpose()), (estimate.p - truth.p).norm(),
          (estimate.v - truth.v).norm(), angle(estimate.Rc * truth.Rc.transpose()),
          (estimate.pc - truth.pc).norm()};
}

}  // namespace multiframe
