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

#ifndef PLATEGP_PLATE_OPERATORS_HPP
#define PLATEGP_PLATE_OPERATORS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "plategp/kernel.hpp"

namespace plategp {

/// The twelve Kirchhoff-Love plate quantities. The enumerator order is the
/// block order of the multi-output covariance matrix.
enum class QuantityKind : std::uint8_t {
  w,
  r_x,
  r_y,
  kappa_x,
  kappa_y,
  kappa_xy,
  q,
  Q_x,
  Q_y,
  M_x,
  M_y,
  M_xy,
};

inline constexpr std::size_t kQuantityCount = 12;

inline constexpr std::array<QuantityKind, kQuantityCount> kAllQuantities = {
    QuantityKind::w,       QuantityKind::r_x,      QuantityKind::r_y, QuantityKind::kappa_x,
    QuantityKind::kappa_y, QuantityKind::kappa_xy, QuantityKind::q,   QuantityKind::Q_x,
    QuantityKind::Q_y,     QuantityKind::M_x,      QuantityKind::M_y, QuantityKind::M_xy};

constexpr std::size_t block_index(QuantityKind kind) { return static_cast<std::size_t>(kind); }

/// True for load, shear forces and moments, whose operators contain D.
constexpr bool carries_rigidity(QuantityKind kind) { return kind >= QuantityKind::q; }

std::string_view to_string(QuantityKind kind);

/// Parses the names produced by to_string ("w", "r_x", "kappa_xy", "Q_y", ...).
/// Throws std::invalid_argument for unknown names.
QuantityKind parse_quantity(std::string_view name);

/// c0 + c1 * nu.
struct NuPolynomial {
  double constant = 0.0;
  double linear = 0.0;

  [[nodiscard]] constexpr double at(double nu) const { return constant + linear * nu; }

  friend bool operator==(const NuPolynomial&, const NuPolynomial&) = default;
};

/// One term coefficient(nu) * D^rigidity_power * d^(order_x + order_y) / dx^order_x dy^order_y.
struct OperatorTerm {
  NuPolynomial coefficient;
  int rigidity_power = 0;
  int order_x = 0;
  int order_y = 0;

  friend bool operator==(const OperatorTerm&, const OperatorTerm&) = default;
};

/// A linear differential operator mapping the deflection to a plate quantity.
class DiffOperator {
 public:
  DiffOperator() = default;
  explicit DiffOperator(std::vector<OperatorTerm> terms);

  [[nodiscard]] std::span<const OperatorTerm> terms() const { return terms_; }
  /// Common D power of all terms (0 for kinematic quantities, 1 otherwise).
  [[nodiscard]] int rigidity_power() const;
  [[nodiscard]] int max_order() const;

 private:
  std::vector<OperatorTerm> terms_;
};

const DiffOperator& operator_for(QuantityKind kind);

struct PlateConstants {
  double rigidity = 1.0;
  double poisson = 0.3;

  /// Throws std::invalid_argument unless D > 0 and 0 <= nu < 0.5.
  void validate() const;
};

/// Covariance between quantity `a` at x and quantity `b` at x':
/// L_a (acting on x) L_b (acting on x') k_ww.
double cross_covariance(QuantityKind a, QuantityKind b, Point x, Point x_prime, const KernelParams& params,
                        const PlateConstants& constants);

/// d/dD of cross_covariance.
double cross_covariance_d_gradient(QuantityKind a, QuantityKind b, Point x, Point x_prime,
                                   const KernelParams& params, const PlateConstants& constants);

/// The expanded term products of L_a L_b' for a fixed Poisson ratio. Each
/// product carries the x' sign (-1)^(order on x') folded into its coefficient,
/// so a block entry is A^2 D^p sum_k c_k G_{ix_k}(tau_x) G_{iy_k}(tau_y).
struct CovariancePlan {
  struct Product {
    double coefficient = 0.0;
    int order_x = 0;
    int order_y = 0;
  };
  std::vector<Product> products;
  int rigidity_power = 0;

  static CovariancePlan build(QuantityKind a, QuantityKind b, double poisson);
};

/// Block value and its derivatives for one pair of points.
struct BlockEntry {
  double value = 0.0;
  double d_length_x = 0.0;
  double d_length_y = 0.0;
};

/// All 144 plans for one Poisson ratio; used by matrix assembly.
class CovarianceTable {
 public:
  explicit CovarianceTable(double poisson);

  [[nodiscard]] const CovariancePlan& plan(QuantityKind a, QuantityKind b) const {
    return plans_[block_index(a) * kQuantityCount + block_index(b)];
  }
  [[nodiscard]] double poisson() const { return poisson_; }

  /// Value only. `scale` is A^2 D^p for the pair.
  static double evaluate(const CovariancePlan& plan, const AxisDerivatives& ax, const AxisDerivatives& ay,
                         double scale);
  /// Value and length-scale derivatives.
  static BlockEntry evaluate_with_gradient(const CovariancePlan& plan, const AxisDerivatives& ax,
                                           const AxisDerivatives& ay, double scale);

 private:
  double poisson_;
  std::vector<CovariancePlan> plans_;
};

}  // namespace plategp

#endif  // PLATEGP_PLATE_OPERATORS_HPP
