#pragma once

#include <optional>
#include <vector>

#include "ncsched/modeset.hpp"
#include "ncsched/numerics.hpp"

namespace ncsched {

/// Shared virtual link: bandwidth in bit/s, fixed delay, packet size in bits,
/// and the number of packets forwarded per sampling period.
struct LinkSpec {
  double bandwidth = 0;
  Seconds delay{0};
  double packet_size = 0;
  int queue_capacity = 1;
};

struct SamplingPeriod {
  Seconds period{0};
  /// floor((B/L)(T_s - D)); equals queue_capacity at the minimum period.
  int max_queue_capacity = 0;
};

/// Minimum sampling period T_s = (L/B) q + D.
SamplingPeriod sampling_period(const LinkSpec& link);

/// Fraction of the link consumed by control traffic, qL / (T_s B).
double utilization(const LinkSpec& link, Seconds period);

enum class NoiseModel {
  /// Noise given as continuous white-noise intensity; mapped to a per-step
  /// covariance through discretize_noise.
  ContinuousIntensity,
  /// Noise given directly as a per-step covariance.
  PerStepCovariance,
};

/// One control loop as written in a scenario file.
struct PlantSpec {
  bool continuous = false;
  MatrixXd A;
  MatrixXd B;
  MatrixXd Q;
  MatrixXd R;
  std::optional<MatrixXd> H;  // cross weight, zero when absent
  std::optional<MatrixXd> K;  // LQR gain synthesized when absent
  VectorXd x0;
  std::optional<VectorXd> xhat0;  // controller estimate at k = 0, zero when absent
  std::optional<MatrixXd> noise;
  NoiseModel noise_model = NoiseModel::ContinuousIntensity;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Discrete loop model with a Schur-stabilizing gain.
struct NcsModel {
  MatrixXd A;
  MatrixXd B;
  MatrixXd K;
  MatrixXd Q;
  MatrixXd H;
  MatrixXd R;
  VectorXd x0;
  VectorXd xhat0;
  MatrixXd noise_cov;  // per-step process noise covariance

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Spectral radius bound used for every "Schur stable" check.
inline constexpr double kSchurMargin = 1e-9;

/// Discretizes (continuous specs), synthesizes K and the noise covariance, and
/// checks that A - BK is Schur stable.
NcsModel make_ncs(const PlantSpec& spec, Seconds period);

/// Switched model of one loop over the augmented state [x; xhat]:
/// mode 1 when the sample arrives, mode 0 when it is dropped.
template <typename Scalar>
struct BasicAugmentedNcs {
  MatrixX<Scalar> open;    // A_0
  MatrixX<Scalar> closed;  // A_1
  MatrixX<Scalar> cost;    // stage cost on [x; xhat]

  int dimension() const { return static_cast<int>(open.rows()); }
  int plant_dim() const { return dimension() / 2; }
  const MatrixX<Scalar>& mode(bool arrived) const { return arrived ? closed : open; }
};

using AugmentedNcs = BasicAugmentedNcs<double>;

/// A_theta = [[A, -BK], [theta A, (1 - theta) A - BK]],
/// cost = [[Q, -HK], [-K'H', K'RK]].
template <typename Scalar>
BasicAugmentedNcs<Scalar> augment(const MatrixX<Scalar>& A, const MatrixX<Scalar>& B,
                                  const MatrixX<Scalar>& K, const MatrixX<Scalar>& Q,
                                  const MatrixX<Scalar>& H, const MatrixX<Scalar>& R) {
  const Eigen::Index n = A.rows();
  const MatrixX<Scalar> bk = B * K;
  BasicAugmentedNcs<Scalar> out;
  out.closed.resize(2 * n, 2 * n);
  out.closed << A, -bk, A, -bk;
  out.open.resize(2 * n, 2 * n);
  out.open << A, -bk, MatrixX<Scalar>::Zero(n, n), A - bk;
  const MatrixX<Scalar> hk = H * K;
  out.cost.resize(2 * n, 2 * n);
  out.cost << Q, -hk, -hk.transpose(), K.transpose() * R * K;
  out.cost = symmetrized(out.cost);
  return out;
}

inline AugmentedNcs augment(const NcsModel& ncs) {
  return augment<double>(ncs.A, ncs.B, ncs.K, ncs.Q, ncs.H, ncs.R);
}

/// Block-diagonal switched system over all loops. Mode matrices are formed on
/// demand; spectral radii come from the per-loop blocks.
class LumpedSystem {
 public:
  LumpedSystem(std::vector<AugmentedNcs> loops, ModeSet modes);

  const ModeSet& modes() const { return modes_; }
  int loop_count() const { return static_cast<int>(loops_.size()); }
  const AugmentedNcs& loop(int i) const { return loops_.at(i); }
  const std::vector<AugmentedNcs>& loops() const { return loops_; }
  int dimension() const { return offsets_.back(); }
  int offset(int i) const { return offsets_.at(i); }

  /// diag over loops of A^i_{delta(i, s)}.
  MatrixXd mode_matrix(int mode) const;
  /// diag over loops of the stage costs.
  MatrixXd cost_matrix() const;
  /// max over loops of the block spectral radii.
  double mode_spectral_radius(int mode) const;

  double loop_radius(int loop, bool arrived) const {
    return arrived ? closed_radius_.at(loop) : open_radius_.at(loop);
  }

 private:
  std::vector<AugmentedNcs> loops_;
  ModeSet modes_;
  std::vector<int> offsets_;
  std::vector<double> open_radius_;
  std::vector<double> closed_radius_;
};

LumpedSystem build_lumped(std::vector<AugmentedNcs> loops, const ModeSet& modes);

}  // namespace ncsched
