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

#include "plategp/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace plategp {

namespace {

double sign_of_order(int order) { return (order % 2 == 0) ? 1.0 : -1.0; }

void check_axis_order(int order) {
  if (order < 0 || order > kMaxAxisOrder) {
    throw std::out_of_range("derivative order " + std::to_string(order) + " outside [0, " +
                            std::to_string(kMaxAxisOrder) + "]");
  }
}

}  // namespace

KernelParams KernelParams::from_log(double log_amplitude, double log_length_x, double log_length_y) {
  return KernelParams{std::exp(log_amplitude), std::exp(log_length_x), std::exp(log_length_y)};
}

void KernelParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(amplitude) || !positive(length_x) || !positive(length_y)) {
    throw std::invalid_argument("kernel parameters must be finite and positive");
  }
}

void DerivativeOrder::validate() const {
  if (first_x < 0 || first_y < 0 || second_x < 0 || second_y < 0) {
    throw std::out_of_range("negative derivative order");
  }
  check_axis_order(first_x + second_x);
  check_axis_order(first_y + second_y);
}

double hermite_he(int n, double u) {
  if (n < 0) throw std::out_of_range("negative Hermite degree");
  if (n == 0) return 1.0;
  double previous = 1.0;
  double current = u;
  for (int k = 1; k < n; ++k) {
    const double next = u * current - k * previous;
    previous = current;
    current = next;
  }
  return current;
}

double gaussian_derivative_1d(int order, double offset, double length) {
  check_axis_order(order);
  if (!(length > 0.0)) throw std::invalid_argument("length scale must be positive");
  const double u = offset / length;
  return sign_of_order(order) * std::pow(length, -order) * hermite_he(order, u) * std::exp(-0.5 * u * u);
}

AxisDerivatives axis_derivatives(double offset, double length) {
  const double u = offset / length;
  const double g = std::exp(-0.5 * u * u);

  std::array<double, kMaxAxisOrder + 2> he{};
  he[0] = 1.0;
  he[1] = u;
  for (int k = 1; k <= kMaxAxisOrder; ++k) he[k + 1] = u * he[k] - k * he[k - 1];

  // d/dl [l^-n He_n(u) g] = l^-(n+1) (u He_{n+1}(u) - n He_n(u)) g, using
  // He_n' = n He_{n-1}.
  AxisDerivatives out;
  const double inv_length = 1.0 / length;
  double scale = g;  // (-1)^n l^-n g
  for (int n = 0; n <= kMaxAxisOrder; ++n) {
    out.value[n] = scale * he[n];
    out.d_length[n] = scale * inv_length * (u * he[n + 1] - n * he[n]);
    scale *= -inv_length;
  }
  return out;
}

PolyGaussian1D::PolyGaussian1D(std::vector<double> coefficients, int length_power)
    : coefficients_(std::move(coefficients)), length_power_(length_power) {
  if (coefficients_.empty()) coefficients_.push_back(0.0);
}

PolyGaussian1D PolyGaussian1D::gaussian() { return PolyGaussian1D({1.0}, 0); }

// d/dtau [l^-s p(u) e] = l^-(s+1) (p'(u) - u p(u)) e
PolyGaussian1D PolyGaussian1D::derivative_offset() const {
  std::vector<double> next(coefficients_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coefficients_.size(); ++k) {
    if (k > 0) next[k - 1] += static_cast<double>(k) * coefficients_[k];
    next[k + 1] -= coefficients_[k];
  }
  return PolyGaussian1D(std::move(next), length_power_ + 1);
}

// d/dl [l^-s p(u) e] = l^-(s+1) (-s p(u) - u p'(u) + u^2 p(u)) e
PolyGaussian1D PolyGaussian1D::derivative_length() const {
  std::vector<double> next(coefficients_.size() + 2, 0.0);
  const auto s = static_cast<double>(length_power_);
  for (std::size_t k = 0; k < coefficients_.size(); ++k) {
    const double c = coefficients_[k];
    next[k] += (-s - static_cast<double>(k)) * c;
    next[k + 2] += c;
  }
  return PolyGaussian1D(std::move(next), length_power_ + 1);
}

double PolyGaussian1D::operator()(double offset, double length) const {
  const double u = offset / length;
  double poly = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) poly = poly * u + *it;
  return std::pow(length, -length_power_) * poly * std::exp(-0.5 * u * u);
}

double base_kernel(Point x, Point x_prime, const KernelParams& params) {
  const double ux = (x.x - x_prime.x) / params.length_x;
  const double uy = (x.y - x_prime.y) / params.length_y;
  return params.amplitude * params.amplitude * std::exp(-0.5 * (ux * ux + uy * uy));
}

double mixed_partial(const DerivativeOrder& order, Point x, Point x_prime, const KernelParams& params) {
  order.validate();
  const int nx = order.first_x + order.second_x;
  const int ny = order.first_y + order.second_y;
  const double sign = sign_of_order(order.second_x + order.second_y);
  return params.amplitude * params.amplitude * sign *
         gaussian_derivative_1d(nx, x.x - x_prime.x, params.length_x) *
         gaussian_derivative_1d(ny, x.y - x_prime.y, params.length_y);
}

KernelGradient mixed_partial_param_gradient(const DerivativeOrder& order, Point x, Point x_prime,
                                            const KernelParams& params) {
  order.validate();
  const int nx = order.first_x + order.second_x;
  const int ny = order.first_y + order.second_y;
  const double sign = sign_of_order(order.second_x + order.second_y);
  const auto ax = axis_derivatives(x.x - x_prime.x, params.length_x);
  const auto ay = axis_derivatives(x.y - x_prime.y, params.length_y);
  const double a2 = params.amplitude * params.amplitude;

  KernelGradient grad;
  grad.amplitude = 2.0 * params.amplitude * sign * ax.value[nx] * ay.value[ny];
  grad.length_x = a2 * sign * ax.d_length[nx] * ay.value[ny];
  grad.length_y = a2 * sign * ax.value[nx] * ay.d_length[ny];
  return grad;
}

}  // namespace plategp
