#pragma once

#include <random>
#include <vector>

#include "ncsched/model.hpp"

namespace fixtures {

using ncsched::MatrixXd;
using ncsched::VectorXd;

inline MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

inline ncsched::NcsModel scalar_loop(double a, double b, double q, double r) {
  ncsched::NcsModel m;
  m.A = scalar(a);
  m.B = scalar(b);
  m.Q = scalar(q);
  m.H = scalar(0);
  m.R = scalar(r);
  m.K = ncsched::solve_dare(m.A, m.B, m.Q, m.R, m.H).K;
  m.x0 = VectorXd::Ones(1);
  m.xhat0 = VectorXd::Zero(1);
  m.noise_cov = scalar(0);
  return m;
}

/// Discrete loop with random dynamics of the given spectral scale and an LQR gain.
inline ncsched::NcsModel random_loop(std::mt19937_64& gen, int n, int inputs, double scale) {
  std::uniform_real_distribution<double> u(-1, 1);
  ncsched::NcsModel m;
  m.A = MatrixXd::NullaryExpr(n, n, [&] { return u(gen); });
  m.A *= scale / ncsched::spectral_radius(m.A);
  m.B = MatrixXd::NullaryExpr(n, inputs, [&] { return u(gen); });
  m.Q = MatrixXd::Identity(n, n);
  m.R = 0.1 * MatrixXd::Identity(inputs, inputs);
  m.H = MatrixXd::Zero(n, inputs);
  m.K = ncsched::solve_dare(m.A, m.B, m.Q, m.R, m.H).K;
  m.x0 = VectorXd::Ones(n);
  m.xhat0 = VectorXd::Zero(n);
  m.noise_cov = MatrixXd::Zero(n, n);
  return m;
}

/// The oscillator [[0, 1], [-2, 2]] with input [0, 1]', Q = I, R = 0.1,
/// discretized at period T.
inline ncsched::PlantSpec oscillator_spec() {
  ncsched::PlantSpec spec;
  spec.continuous = true;
  spec.A = MatrixXd(2, 2);
  spec.A << 0, 1, -2, 2;
  spec.B = MatrixXd(2, 1);
  spec.B << 0, 1;
  spec.Q = MatrixXd::Identity(2, 2);
  spec.R = scalar(0.1);
  spec.x0 = VectorXd::Ones(2);
  spec.noise = 1e-3 * MatrixXd::Identity(2, 2);
  return spec;
}

inline std::vector<ncsched::AugmentedNcs> augment_all(const std::vector<ncsched::NcsModel>& ms) {
  std::vector<ncsched::AugmentedNcs> out;
  for (const auto& m : ms) out.push_back(ncsched::augment(m));
  return out;
}

}  // namespace fixtures
