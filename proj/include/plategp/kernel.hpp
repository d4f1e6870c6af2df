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

#ifndef PLATEGP_KERNEL_HPP
#define PLATEGP_KERNEL_HPP

#include <array>
#include <vector>

namespace plategp {

/// Location on the plate mid-surface.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Highest derivative order per axis that the kernel algebra supports.
/// The load-load block needs 4 derivatives on each argument.
inline constexpr int kMaxAxisOrder = 8;

/// Hyperparameters of the squared-exponential ARD deflection kernel
///   k(x, x') = A^2 exp(-(x-x')^2 / 2 l_x^2 - (y-y')^2 / 2 l_y^2).
struct KernelParams {
  double amplitude = 1.0;
  double length_x = 1.0;
  double length_y = 1.0;

  /// Builds parameters from log(A), log(l_x), log(l_y).
  static KernelParams from_log(double log_amplitude, double log_length_x, double log_length_y);

  /// Throws std::invalid_argument unless every entry is finite and positive.
  void validate() const;
};

/// Partial derivatives of the kernel with respect to (A, l_x, l_y).
struct KernelGradient {
  double amplitude = 0.0;
  double length_x = 0.0;
  double length_y = 0.0;
};

/// Derivative orders of a mixed partial: `first_*` act on the first kernel
/// argument x, `second_*` on the second argument x'.
struct DerivativeOrder {
  int first_x = 0;
  int first_y = 0;
  int second_x = 0;
  int second_y = 0;

  /// Throws std::out_of_range for negative orders or combined orders above
  /// kMaxAxisOrder on either axis.
  void validate() const;
};

/// Probabilists' Hermite polynomial He_n(u).
double hermite_he(int n, double u);

/// d^n/dtau^n exp(-tau^2 / 2 l^2) = (-1)^n l^-n He_n(tau/l) exp(-tau^2 / 2 l^2).
double gaussian_derivative_1d(int order, double offset, double length);

/// All offset derivatives of the 1-D Gaussian factor up to kMaxAxisOrder at one
/// offset, together with their length-scale derivatives. This is the inner loop
/// of covariance assembly: one exp() and one Hermite recursion per axis serves
/// every operator block.
struct AxisDerivatives {
  std::array<double, kMaxAxisOrder + 1> value{};
  std::array<double, kMaxAxisOrder + 1> d_length{};
};

AxisDerivatives axis_derivatives(double offset, double length);

/// Polynomial-times-Gaussian in one variable,
///   f(tau; l) = l^-s p(tau/l) exp(-tau^2 / 2 l^2),
/// closed under differentiation in tau and in l.
class PolyGaussian1D {
 public:
  PolyGaussian1D() = default;
  PolyGaussian1D(std::vector<double> coefficients, int length_power);

  /// The plain Gaussian factor exp(-tau^2 / 2 l^2).
  static PolyGaussian1D gaussian();

  [[nodiscard]] PolyGaussian1D derivative_offset() const;
  [[nodiscard]] PolyGaussian1D derivative_length() const;

  [[nodiscard]] double operator()(double offset, double length) const;

  [[nodiscard]] const std::vector<double>& coefficients() const { return coefficients_; }
  [[nodiscard]] int length_power() const { return length_power_; }

 private:
  std::vector<double> coefficients_{1.0};  // ascending powers of u = tau/l
  int length_power_ = 0;
};

/// k_ww(x, x'; theta).
double base_kernel(Point x, Point x_prime, const KernelParams& params);

/// Mixed partial of k_ww. Stationarity turns every x' derivative into a
/// negated tau derivative, and the kernel factorizes over the two axes.
double mixed_partial(const DerivativeOrder& order, Point x, Point x_prime, const KernelParams& params);

/// Gradient of mixed_partial with respect to (A, l_x, l_y).
KernelGradient mixed_partial_param_gradient(const DerivativeOrder& order, Point x, Point x_prime,
                                            const KernelParams& params);

}  // namespace plategp

#endif  // PLATEGP_KERNEL_HPP
