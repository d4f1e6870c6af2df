/*
 * Copyright 2026 The plategp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */


#include "plategp/oracles.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plategp {

namespace {

// n-th derivative of 1 - cos(alpha x).
double basis_derivative(int n, double alpha, double x) {
  const double t = alpha * x;
  if (n == 0) return 1.0 - std::cos(t);
  const double an = std::pow(alpha, n);
  switch (n % 4) {
    case 1: return an * std::sin(t);
    case 2: return an * std::cos(t);
    case 3: return -an * std::sin(t);
    default: return -an * std::cos(t);
  }
}

double wavenumber(int mode, double span) { return 2.0 * mode * std::numbers::pi / span; }

}  // namespace

RitzSolution::RitzSolution(PlateGeometry geometry, double load_amplitude, Eigen::MatrixXd coefficients)
    : geometry_(geometry), load_(load_amplitude), coefficients_(std::move(coefficients)) {}

double RitzSolution::energy() const {
  // Every load-vector entry is q0 a b.
  return -0.5 * load_ * geometry_.length_x * geometry_.length_y * coefficients_.sum();
}

RitzSolution ritz_solve(const PlateGeometry& g, double load_amplitude, int modes_x, int modes_y) {
  g.validate();
  if (modes_x < 1 || modes_y < 1) throw std::invalid_argument("Ritz series needs at least one mode per axis");
  if (!std::isfinite(load_amplitude)) throw std::invalid_argument("load amplitude must be finite");

  // Stiffness / (D a b / 4) = diag(S) + U U^T with
  //   S_mn = (alpha_m^2 + beta_n^2)^2,
  //   u_m = sqrt(2) alpha_m^2 (e_m x 1), v_n = sqrt(2) beta_n^2 (1 x e_n),
  // and every load entry equal to q0 a b, i.e. F = 4 q0 / D after scaling.
  // Woodbury reduces the solve to an (M + N) SPD capacitance system.
  const int m_count = modes_x, n_count = modes_y;
  Eigen::VectorXd a2(m_count), b2(n_count);
  for (int m = 0; m < m_count; ++m) a2[m] = std::pow(wavenumber(m + 1, g.length_x), 2);
  for (int n = 0; n < n_count; ++n) b2[n] = std::pow(wavenumber(n + 1, g.length_y), 2);

  Eigen::MatrixXd inv_s(m_count, n_count);
  for (int m = 0; m < m_count; ++m)
    for (int n = 0; n < n_count; ++n) inv_s(m, n) = 1.0 / std::pow(a2[m] + b2[n], 2);

  const double f = 4.0 * load_amplitude / g.rigidity;
  const double r2 = std::sqrt(2.0);

  const int k = m_count + n_count;
  Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd rhs(k);
  const Eigen::VectorXd row_sums = inv_s.rowwise().sum();
  const Eigen::VectorXd col_sums = inv_s.colwise().sum().transpose();
  for (int m = 0; m < m_count; ++m) {
    cap(m, m) += 2.0 * a2[m] * a2[m] * row_sums[m];
    rhs[m] = r2 * a2[m] * f * row_sums[m];
  }
  for (int n = 0; n < n_count; ++n) {
    cap(m_count + n, m_count + n) += 2.0 * b2[n] * b2[n] * col_sums[n];
    rhs[m_count + n] = r2 * b2[n] * f * col_sums[n];
  }
  for (int m = 0; m < m_count; ++m)
    for (int n = 0; n < n_count; ++n) {
      cap(m, m_count + n) = cap(m_count + n, m) = 2.0 * a2[m] * b2[n] * inv_s(m, n);
    }

  const Eigen::LLT<Eigen::MatrixXd> llt(cap);
  if (llt.info() != Eigen::Success) throw std::runtime_error("Ritz capacitance system is not positive definite");
  const Eigen::VectorXd y = llt.solve(rhs);

  Eigen::MatrixXd w(m_count, n_count);
  for (int m = 0; m < m_count; ++m)
    for (int n = 0; n < n_count; ++n) {
      w(m, n) = inv_s(m, n) * (f - r2 * a2[m] * y[m] - r2 * b2[n] * y[m_count + n]);
    }
  return RitzSolution(g, load_amplitude, std::move(w));
}

double ritz_field(const RitzSolution& sol, QuantityKind kind, Point x) {
  const auto& g = sol.geometry();
  const auto& w = sol.coefficients();
  Eigen::VectorXd bx(sol.modes_x()), by(sol.modes_y());
  double value = 0.0;
  for (const auto& t : operator_for(kind).terms()) {
    for (int m = 0; m < sol.modes_x(); ++m) bx[m] = basis_derivative(t.order_x, wavenumber(m + 1, g.length_x), x.x);
    for (int n = 0; n < sol.modes_y(); ++n) by[n] = basis_derivative(t.order_y, wavenumber(n + 1, g.length_y), x.y);
    value += t.coefficient.at(g.poisson) * std::pow(g.rigidity, t.rigidity_power) * bx.dot(w * by);
  }
  return value;
}

}  // namespace plategp
