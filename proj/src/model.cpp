#include "ncsched/model.hpp"

#include <cmath>
#include <string>

namespace ncsched {

SamplingPeriod sampling_period(const LinkSpec& link) {
  if (!(link.bandwidth > 0) || !(link.packet_size > 0) || link.delay.count() < 0 ||
      link.queue_capacity < 1) {
    throw InvalidArgument("LinkSpec: need B > 0, L > 0, D >= 0, q >= 1");
  }
  SamplingPeriod out;
  out.period = Seconds(link.packet_size / link.bandwidth * link.queue_capacity) + link.delay;
  const double slots = link.bandwidth / link.packet_size * (out.period - link.delay).count();
  // (B/L)(T - D) reproduces q only up to round-off
  out.max_queue_capacity = static_cast<int>(std::floor(slots + 1e-9 * (1 + slots)));
  return out;
}

double utilization(const LinkSpec& link, Seconds period) {
  return link.queue_capacity * link.packet_size / (period.count() * link.bandwidth);
}

namespace {

void require_shape(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidArgument(std::string("plant: ") + what + " has shape " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

NcsModel make_ncs(const PlantSpec& spec, Seconds period) {
  const int n = spec.state_dim();
  const int m = spec.input_dim();
  if (n == 0 || m == 0) throw InvalidArgument("plant: empty A or B");
  require_shape(spec.A, n, n, "A");
  require_shape(spec.B, n, m, "B");
  require_shape(spec.Q, n, n, "Q");
  require_shape(spec.R, m, m, "R");
  if (spec.x0.size() != n) throw InvalidArgument("plant: x0 dimension mismatch");
  if (!is_symmetric(spec.Q, 1e-9) || min_sym_eigenvalue(spec.Q) < -1e-12 * (1 + max_abs(spec.Q))) {
    throw InvalidArgument("plant: Q must be symmetric positive semidefinite");
  }
  if (!is_symmetric(spec.R, 1e-9) || min_sym_eigenvalue(spec.R) <= 0) {
    throw InvalidArgument("plant: R must be symmetric positive definite");
  }

  NcsModel out;
  out.Q = symmetrized(spec.Q);
  out.R = symmetrized(spec.R);
  out.H = spec.H ? *spec.H : MatrixXd::Zero(n, m);
  require_shape(out.H, n, m, "H");

  if (spec.continuous) {
    if (!(period.count() > 0)) throw InvalidArgument("plant: sampling period must be positive");
    const auto d = discretize_zoh(spec.A, spec.B, period);
    out.A = d.A;
    out.B = d.B;
  } else {
    out.A = spec.A;
    out.B = spec.B;
  }

  if (spec.K) {
    require_shape(*spec.K, m, n, "K");
    out.K = *spec.K;
  } else {
    out.K = solve_dare(out.A, out.B, out.Q, out.R, out.H).K;
  }
  if (!is_schur_stable(out.A - out.B * out.K, kSchurMargin)) {
    throw NotStabilizable("plant: A - BK is not Schur stable (spectral radius " +
                          std::to_string(spectral_radius(out.A - out.B * out.K)) + ")");
  }

  out.x0 = spec.x0;
  out.xhat0 = spec.xhat0 ? *spec.xhat0 : VectorXd::Zero(n);
  if (out.xhat0.size() != n) throw InvalidArgument("plant: xhat0 dimension mismatch");

  if (!spec.noise) {
    out.noise_cov = MatrixXd::Zero(n, n);
  } else {
    require_shape(*spec.noise, n, n, "noise");
    if (!is_symmetric(*spec.noise, 1e-9) || min_sym_eigenvalue(*spec.noise) < -1e-12) {
      throw InvalidArgument("plant: noise must be symmetric positive semidefinite");
    }
    const bool discretize = spec.continuous && spec.noise_model == NoiseModel::ContinuousIntensity;
    out.noise_cov = discretize ? discretize_noise(spec.A, *spec.noise, period)
                               : MatrixXd(symmetrized(*spec.noise));
  }
  return out;
}

LumpedSystem::LumpedSystem(std::vector<AugmentedNcs> loops, ModeSet modes)
    : loops_(std::move(loops)), modes_(std::move(modes)) {
  if (static_cast<int>(loops_.size()) != modes_.loops()) {
    throw InvalidArgument("build_lumped: " + std::to_string(loops_.size()) +
                          " loops for a mode set over " + std::to_string(modes_.loops()));
  }
  offsets_.push_back(0);
  for (const auto& l : loops_) {
    if (l.open.rows() != l.closed.rows() || l.cost.rows() != l.open.rows() ||
        l.open.rows() != l.open.cols() || l.open.rows() % 2 != 0) {
      throw InvalidArgument("build_lumped: malformed augmented loop");
    }
    offsets_.push_back(offsets_.back() + l.dimension());
    open_radius_.push_back(spectral_radius(l.open));
    closed_radius_.push_back(spectral_radius(l.closed));
  }
}

MatrixXd LumpedSystem::mode_matrix(int mode) const {
  MatrixXd out = MatrixXd::Zero(dimension(), dimension());
  for (int i = 0; i < loop_count(); ++i) {
    const int d = loops_[i].dimension();
    out.block(offsets_[i], offsets_[i], d, d) = loops_[i].mode(modes_.contains(mode, i));
  }
  return out;
}

MatrixXd LumpedSystem::cost_matrix() const {
  MatrixXd out = MatrixXd::Zero(dimension(), dimension());
  for (int i = 0; i < loop_count(); ++i) {
    const int d = loops_[i].dimension();
    out.block(offsets_[i], offsets_[i], d, d) = loops_[i].cost;
  }
  return out;
}

double LumpedSystem::mode_spectral_radius(int mode) const {
  double r = 0;
  for (int i = 0; i < loop_count(); ++i) r = std::max(r, loop_radius(i, modes_.contains(mode, i)));
  return r;
}

LumpedSystem build_lumped(std::vector<AugmentedNcs> loops, const ModeSet& modes) {
  return LumpedSystem(std::move(loops), modes);
}

}  // namespace ncsched
