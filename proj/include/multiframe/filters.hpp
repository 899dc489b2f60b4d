#pragma once

// Error-state Kalman filters for the depth-camera inertial model, all on the
// 15-dimensional error [dtheta; dp; dv; dtheta_c; dp_c]:
//
//   MfgIekf        MFG(3,2,0,0,1), error chi chi_hat^-1
//   ImperfectIekf  SE2(3) x SE(3), right-invariant error on each factor
//   Mekf           SO(3) x R^6 x SO(3) x R^3, multiplicative rotation errors
//
// The predict/update machinery is shared; each variant supplies its chart,
// retraction and linearisation.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "multiframe/imu.hpp"

namespace multiframe {

constexpr int kErrorDim = 15;
using Vec15 = Eigen::Matrix<double, kErrorDim, 1>;
using Mat15 = Eigen::Matrix<double, kErrorDim, kErrorDim>;
using Mat3x15 = Eigen::Matrix<double, 3, kErrorDim>;

/// Covariances, used as tunable gains in deterministic mode.
struct NoiseConfig {
  Mat3 gyro_cov = Mat3::Identity() * 1e-4;     // (rad/s)^2
  Mat3 accel_cov = Mat3::Identity() * 1e-3;    // (m/s^2)^2
  Mat3 ext_rot_cov = Mat3::Identity() * 1e-6;  // (rad/s)^2
  Mat3 ext_pos_cov = Mat3::Identity() * 1e-6;  // (m/s)^2
  Mat3 meas_cov = Mat3::Identity() * 1e-2;     // m^2 per landmark
};

namespace detail {

inline Mat3 skew3(const Vec3& v) { return hat(Vector(v), 3); }

inline Mat15 process_covariance(const NoiseConfig& n) {
  Mat15 Q = Mat15::Zero();
  Q.block<3, 3>(0, 0) = n.gyro_cov;
  Q.block<3, 3>(6, 6) = n.accel_cov;
  Q.block<3, 3>(9, 9) = n.ext_rot_cov;
  Q.block<3, 3>(12, 12) = n.ext_pos_cov;
  return Q;
}

/// Transition of the right-invariant SE2(3) error [dtheta; dp; dv]:
/// exp(A dt) with dp' = dv, dv' = g^ dtheta.
inline Eigen::Matrix<double, 9, 9> se23_transition(double dt, const Vec3& gravity) {
  Eigen::Matrix<double, 9, 9> F = Eigen::Matrix<double, 9, 9>::Identity();
  const Mat3 G = skew3(gravity);
  F.block<3, 3>(3, 0) = 0.5 * dt * dt * G;
  F.block<3, 3>(3, 6) = dt * Mat3::Identity();
  F.block<3, 3>(6, 0) = dt * G;
  return F;
}

inline TfgElement core_element(const DcioState& s) { return to_mfg(s).core; }

}  // namespace detail

class ErrorStateFilter {
 public:
  ErrorStateFilter(const DcioState& initial, const Mat15& covariance, const NoiseConfig& noise,
                   const Vec3& gravity)
      : mean_(initial), P_(covariance), noise_(noise), gravity_(gravity) {}
  virtual ~ErrorStateFilter() = default;

  virtual std::string name() const = 0;

  /// Local coordinates of `truth` around the current estimate.
  virtual Vec15 chart(const DcioState& truth) const = 0;
  /// State at local coordinates `xi` around the current estimate.
  virtual DcioState retract(const Vec15& xi) const = 0;
  /// Error transition over one IMU step from the current estimate.
  virtual Mat15 transition(const ImuSample& imu, double dt) const = 0;
  /// Map from [n_g; 0; n_a; n_c; n_p] to the error rate at the current estimate.
  virtual Mat15 noise_input() const = 0;
  /// Innovation and its Jacobian for one landmark.
  virtual Vec3 innovation(const Vec3& landmark, const Vec3& z) const = 0;
  virtual Mat3x15 observation_jacobian(const Vec3& landmark) const = 0;
  virtual Mat3 innovation_noise(const Mat3& meas_cov) const { return meas_cov; }

  void predict(const ImuSample& imu, double dt) {
    if (dt <= 0) throw InvalidArgument("predict: dt must be positive");
    const Mat15 F = transition(imu, dt);
    const Mat15 G = noise_input();
    P_ = F * P_ * F.transpose() + G * detail::process_covariance(noise_) * G.transpose() * dt;
    mean_ = imu_flow(mean_, imu, dt, gravity_);
    condition_covariance();
  }

  /// Stacked Kalman update with the Joseph form. Returns the innovation norm.
  double update(const std::vector<Vec3>& landmarks, const std::vector<Vec3>& measurements) {
    if (landmarks.empty() || landmarks.size() != measurements.size()) {
      throw InvalidArgument("update: need one measurement per landmark");
    }
    const Index k = 3 * static_cast<Index>(landmarks.size());
    Matrix H(k, kErrorDim);
    Vector y(k);
    Matrix N = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
      const Index r = 3 * static_cast<Index>(i);
      H.middleRows(r, 3) = observation_jacobian(landmarks[i]);
      y.segment(r, 3) = innovation(landmarks[i], measurements[i]);
      N.block(r, r, 3, 3) = innovation_noise(noise_.meas_cov);
    }
    const Matrix S = H * P_ * H.transpose() + N;
    const Eigen::FullPivLU<Matrix> lu(S);
    if (lu.rank() < k) throw RankError("update: innovation covariance is singular");
    const Matrix K = P_ * H.transpose() * lu.inverse();
    const Vec15 xi = K * y;
    const Mat15 IKH = Mat15::Identity() - K * H;
    mean_ = retract(xi);
    P_ = IKH * P_ * IKH.transpose() + K * N * K.transpose();
    P_ = 0.5 * (P_ + P_.transpose());
    return y.norm();
  }

  const DcioState& mean() const { return mean_; }
  const Mat15& covariance() const { return P_; }
  const Vec3& gravity() const { return gravity_; }
  int covariance_warnings() const { return warnings_; }

 protected:
  DcioState mean_;
  Mat15 P_;
  NoiseConfig noise_;
  Vec3 gravity_;
  int warnings_ = 0;

 private:
  void condition_covariance() {
    P_ = 0.5 * (P_ + P_.transpose());
    const Eigen::SelfAdjointEigenSolver<Mat15> eig(P_);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      ++warnings_;
      P_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
           eig.eigenvectors().transpose();
    }
  }
};

/// MFG-IEKF. The error is chi chi_hat^-1 in MFG(3,2,0,0,1): core coordinates
/// from its core block, extrinsic coordinates from its right factor (first
/// translation column only).
class MfgIekf : public ErrorStateFilter {
 public:
  using ErrorStateFilter::ErrorStateFilter;

  std::string name() const override { return "mfg-iekf"; }

  Vec15 chart(const DcioState& truth) const override {
    const MfgElement err = to_mfg(truth) * mfg_inverse(to_mfg(mean_));
    const TfgTangent core = tfg_log(err.core);
    const TfgTangent ext = tfg_log(err.right[0]);
    Vec15 xi;
    xi << core.theta, core.u.col(0), core.u.col(1), ext.theta, ext.u.col(0);
    return xi;
  }

  /// Nonlinear update: R = G0(dth) R_hat, Rc = G0(R_hat^T dth_c) Rc_hat,
  /// p = G0(dth) p_hat + G1(dth) dp, v likewise,
  /// pc = G0(R_hat^T dth_c) pc_hat + R_hat^T Delta(dth_c, p_hat, dpc).
  DcioState retract(const Vec15& xi) const override {
    const Vector dth = xi.segment<3>(0), dthc = xi.segment<3>(9);
    const Mat3 G0 = so_exp(dth, 3), G1 = gamma_series(1, dth, 3);
    const Mat3 Gc0 = so_exp(dthc, 3), Gc1 = gamma_series(1, dthc, 3);
    const Mat3 Rt = mean_.R.transpose();
    const Mat3 Gbody = so_exp(Vector(Rt * Vec3(dthc)), 3);
    const Vec3 delta = (Gc0 - Mat3::Identity()) * mean_.p + Gc1 * xi.segment<3>(12);
    DcioState out;
    out.R = G0 * mean_.R;
    out.p = G0 * mean_.p + G1 * xi.segment<3>(3);
    out.v = G0 * mean_.v + G1 * xi.segment<3>(6);
    out.Rc = Gbody * mean_.Rc;
    out.pc = Gbody * mean_.pc + Rt * delta;
    return out;
  }

  Mat15 transition(const ImuSample& imu, double dt) const override {
    Mat15 F = Mat15::Zero();
    F.topLeftCorner<9, 9>() = detail::se23_transition(dt, gravity_);
    // The extrinsic error is conjugated by M = T0_hat(t+dt) T0_hat(t)^-1.
    const TfgElement M = detail::core_element(imu_flow(mean_, imu, dt, gravity_)) *
                         tfg_inverse(detail::core_element(mean_));
    const Mat3 Rm = M.R;
    F.block<3, 3>(9, 9) = Rm;
    F.block<3, 3>(12, 9) = detail::skew3(M.x.col(0)) * Rm;
    F.block<3, 3>(12, 12) = Rm;
    return F;
  }

  Mat15 noise_input() const override {
    Mat15 G = Mat15::Zero();
    const Matrix Ad0 = tfg_adjoint(detail::core_element(mean_));
    G.topLeftCorner<9, 9>() = Ad0;
    // Extrinsic noise enters the right factor as (n_c, Rc^T n_p) transported by
    // Ad of the accumulated block T0_hat rT1_hat.
    const MfgElement chi = to_mfg(mean_);
    const Matrix Ad1 = tfg_adjoint(chi.core * chi.right[0]);
    G.block<6, 6>(9, 9) = Ad1.topLeftCorner(6, 6);
    G.block<6, 3>(9, 12) = G.block<6, 3>(9, 12) * mean_.Rc.transpose();
    return G;
  }

  /// Invariant innovation R_hat Rc_hat z + R_hat pc_hat + p_hat - p_l.
  Vec3 innovation(const Vec3& landmark, const Vec3& z) const override {
    return mean_.R * mean_.Rc * z + mean_.R * mean_.pc + mean_.p - landmark;
  }

  Mat3x15 observation_jacobian(const Vec3& landmark) const override {
    Mat3x15 H = Mat3x15::Zero();
    const Mat3 L = detail::skew3(landmark);
    H.block<3, 3>(0, 0) = L;
    H.block<3, 3>(0, 3) = -Mat3::Identity();
    H.block<3, 3>(0, 9) = L;
    H.block<3, 3>(0, 12) = -Mat3::Identity();
    return H;
  }

  Mat3 innovation_noise(const Mat3& meas_cov) const override {
    const Mat3 A = mean_.R * mean_.Rc;
    return A * meas_cov * A.transpose();
  }
};

/// Imperfect IEKF on SE2(3) x SE(3) with right-invariant errors on both factors.
class ImperfectIekf : public ErrorStateFilter {
 public:
  using ErrorStateFilter::ErrorStateFilter;

  std::string name() const override { return "iekf"; }

  static TfgElement extrinsic(const DcioState& s) {
    Matrix x(3, 1);
    x.col(0) = s.pc;
    return {s.Rc, x, Matrix::Zero(3, 0)};
  }

  Vec15 chart(const DcioState& truth) const override {
    const TfgTangent core =
        tfg_log(detail::core_element(truth) * tfg_inverse(detail::core_element(mean_)));
    const TfgTangent ext = tfg_log(extrinsic(truth) * tfg_inverse(extrinsic(mean_)));
    Vec15 xi;
    xi << core.theta, core.u.col(0), core.u.col(1), ext.theta, ext.u.col(0);
    return xi;
  }

  DcioState retract(const Vec15& xi) const override {
    Matrix u(3, 2);
    u << xi.segment<3>(3), xi.segment<3>(6);
    const TfgElement core =
        tfg_exp({xi.segment<3>(0), u, Matrix::Zero(3, 0)}) * detail::core_element(mean_);
    const TfgElement ext =
        tfg_exp({xi.segment<3>(9), Matrix(xi.segment<3>(12)), Matrix::Zero(3, 0)}) *
        extrinsic(mean_);
    DcioState out;
    out.R = core.R;
    out.p = core.x.col(0);
    out.v = core.x.col(1);
    out.Rc = ext.R;
    out.pc = ext.x.col(0);
    return out;
  }

  Mat15 transition(const ImuSample&, double dt) const override {
    Mat15 F = Mat15::Identity();
    F.topLeftCorner<9, 9>() = detail::se23_transition(dt, gravity_);
    return F;
  }

  Mat15 noise_input() const override {
    Mat15 G = Mat15::Zero();
    G.topLeftCorner<9, 9>() = tfg_adjoint(detail::core_element(mean_));
    G.block<6, 6>(9, 9) = tfg_adjoint(extrinsic(mean_));
    G.block<6, 3>(9, 12) = G.block<6, 3>(9, 12) * mean_.Rc.transpose();
    return G;
  }

  Vec3 innovation(const Vec3& landmark, const Vec3& z) const override {
    return z - measure_landmark(mean_, landmark);
  }

  Mat3x15 observation_jacobian(const Vec3& landmark) const override {
    const Mat3 RcT = mean_.Rc.transpose();
    const Mat3 RT = mean_.R.transpose();
    const Vec3 q = RT * (landmark - mean_.p);
    Mat3x15 H = Mat3x15::Zero();
    H.block<3, 3>(0, 0) = RcT * RT * detail::skew3(landmark);
    H.block<3, 3>(0, 3) = -RcT * RT;
    H.block<3, 3>(0, 9) = RcT * detail::skew3(q);
    H.block<3, 3>(0, 12) = -RcT;
    return H;
  }
};

/// Multiplicative EKF: R = R_hat Exp(dtheta), Rc = Rc_hat Exp(dtheta_c), additive vectors.
class Mekf : public ErrorStateFilter {
 public:
  using ErrorStateFilter::ErrorStateFilter;

  std::string name() const override { return "mekf"; }

  Vec15 chart(const DcioState& truth) const override {
    Vec15 xi;
    xi << so_log(mean_.R.transpose() * truth.R), truth.p - mean_.p, truth.v - mean_.v,
        so_log(mean_.Rc.transpose() * truth.Rc), truth.pc - mean_.pc;
    return xi;
  }

  DcioState retract(const Vec15& xi) const override {
    DcioState out;
    out.R = mean_.R * Mat3(so_exp(Vector(xi.segment<3>(0)), 3));
    out.p = mean_.p + xi.segment<3>(3);
    out.v = mean_.v + xi.segment<3>(6);
    out.Rc = mean_.Rc * Mat3(so_exp(Vector(xi.segment<3>(9)), 3));
    out.pc = mean_.pc + xi.segment<3>(12);
    return out;
  }

  Mat15 transition(const ImuSample& imu, double dt) const override {
    const Vector phi = imu.omega * dt;
    const Mat3 G1 = gamma_series(1, phi, 3), G2 = gamma_series(2, phi, 3);
    Mat15 F = Mat15::Identity();
    F.block<3, 3>(0, 0) = Mat3(so_exp(phi, 3)).transpose();
    F.block<3, 3>(3, 0) = -mean_.R * detail::skew3(G2 * imu.accel * dt * dt);
    F.block<3, 3>(3, 6) = dt * Mat3::Identity();
    F.block<3, 3>(6, 0) = -mean_.R * detail::skew3(G1 * imu.accel * dt);
    return F;
  }

  Mat15 noise_input() const override {
    Mat15 G = Mat15::Identity();
    G.block<3, 3>(6, 6) = mean_.R;
    return G;
  }

  Vec3 innovation(const Vec3& landmark, const Vec3& z) const override {
    return z - measure_landmark(mean_, landmark);
  }

  Mat3x15 observation_jacobian(const Vec3& landmark) const override {
    const Mat3 RcT = mean_.Rc.transpose();
    const Vec3 q = mean_.R.transpose() * (landmark - mean_.p);
    Mat3x15 H = Mat3x15::Zero();
    H.block<3, 3>(0, 0) = RcT * detail::skew3(q);
    H.block<3, 3>(0, 3) = -RcT * mean_.R.transpose();
    H.block<3, 3>(0, 9) = detail::skew3(RcT * (q - mean_.pc));
    H.block<3, 3>(0, 12) = -RcT;
    return H;
  }
};

enum class FilterKind { Mekf, Iekf, MfgIekf };

inline std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::Mekf:
      return "mekf";
    case FilterKind::Iekf:
      return "iekf";
    case FilterKind::MfgIekf:
      return "mfg-iekf";
  }
  return "";
}

inline FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "mekf") return FilterKind::Mekf;
  if (s == "iekf") return FilterKind::Iekf;
  if (s == "mfg-iekf") return FilterKind::MfgIekf;
  throw InvalidArgument("unknown filter '" + s + "' (expected mekf, iekf or mfg-iekf)");
}

inline std::unique_ptr<ErrorStateFilter> make_filter(FilterKind kind, const DcioState& initial,
                                                     const Mat15& covariance,
                                                     const NoiseConfig& noise,
                                                     const Vec3& gravity = default_gravity()) {
  switch (kind) {
    case FilterKind::Mekf:
      return std::make_unique<Mekf>(initial, covariance, noise, gravity);
    case FilterKind::Iekf:
      return std::make_unique<ImperfectIekf>(initial, covariance, noise, gravity);
    case FilterKind::MfgIekf:
      return std::make_unique<MfgIekf>(initial, covariance, noise, gravity);
  }
  throw InvalidArgument("unknown filter kind");
}

}  // namespace multiframe
