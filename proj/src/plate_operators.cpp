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

#include "plategp/plate_operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace plategp {

namespace {

constexpr std::array<std::string_view, kQuantityCount> kNames = {
    "w", "r_x", "r_y", "kappa_x", "kappa_y", "kappa_xy", "q", "Q_x", "Q_y", "M_x", "M_y", "M_xy"};

std::array<DiffOperator, kQuantityCount> make_operator_table() {
  using T = OperatorTerm;
  std::array<DiffOperator, kQuantityCount> table;
  table[block_index(QuantityKind::w)] = DiffOperator({T{{1.0, 0.0}, 0, 0, 0}});
  table[block_index(QuantityKind::r_x)] = DiffOperator({T{{1.0, 0.0}, 0, 1, 0}});
  table[block_index(QuantityKind::r_y)] = DiffOperator({T{{1.0, 0.0}, 0, 0, 1}});
  table[block_index(QuantityKind::kappa_x)] = DiffOperator({T{{-1.0, 0.0}, 0, 2, 0}});
  table[block_index(QuantityKind::kappa_y)] = DiffOperator({T{{-1.0, 0.0}, 0, 0, 2}});
  table[block_index(QuantityKind::kappa_xy)] = DiffOperator({T{{-2.0, 0.0}, 0, 1, 1}});
  // D (d4/dx4 + 2 d4/dx2dy2 + d4/dy4)
  table[block_index(QuantityKind::q)] =
      DiffOperator({T{{1.0, 0.0}, 1, 4, 0}, T{{2.0, 0.0}, 1, 2, 2}, T{{1.0, 0.0}, 1, 0, 4}});
  // -D d/dx laplacian, -D d/dy laplacian
  table[block_index(QuantityKind::Q_x)] = DiffOperator({T{{-1.0, 0.0}, 1, 3, 0}, T{{-1.0, 0.0}, 1, 1, 2}});
  table[block_index(QuantityKind::Q_y)] = DiffOperator({T{{-1.0, 0.0}, 1, 2, 1}, T{{-1.0, 0.0}, 1, 0, 3}});
  table[block_index(QuantityKind::M_x)] = DiffOperator({T{{-1.0, 0.0}, 1, 2, 0}, T{{0.0, -1.0}, 1, 0, 2}});
  table[block_index(QuantityKind::M_y)] = DiffOperator({T{{-1.0, 0.0}, 1, 0, 2}, T{{0.0, -1.0}, 1, 2, 0}});
  table[block_index(QuantityKind::M_xy)] = DiffOperator({T{{1.0, -1.0}, 1, 1, 1}});
  return table;
}

double rigidity_power_of(double rigidity, int power) {
  switch (power) {
    case 0: return 1.0;
    case 1: return rigidity;
    default: return rigidity * rigidity;
  }
}

}  // namespace

std::string_view to_string(QuantityKind kind) { return kNames[block_index(kind)]; }

QuantityKind parse_quantity(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllQuantities[i];
  }
  throw std::invalid_argument("unknown plate quantity '" + std::string(name) + "'");
}

DiffOperator::DiffOperator(std::vector<OperatorTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("operator needs at least one term");
  for (const auto& t : terms_) {
    if (t.rigidity_power != terms_.front().rigidity_power) {
      throw std::invalid_argument("operator terms must share one power of D");
    }
  }
}

int DiffOperator::rigidity_power() const { return terms_.empty() ? 0 : terms_.front().rigidity_power; }

int DiffOperator::max_order() const {
  int order = 0;
  for (const auto& t : terms_) order = std::max(order, t.order_x + t.order_y);
  return order;
}

const DiffOperator& operator_for(QuantityKind kind) {
  static const auto table = make_operator_table();
  return table[block_index(kind)];
}

void PlateConstants::validate() const {
  if (!std::isfinite(rigidity) || rigidity <= 0.0) throw std::invalid_argument("rigidity must be positive");
  if (!(poisson >= 0.0 && poisson < 0.5)) throw std::invalid_argument("Poisson ratio must lie in [0, 0.5)");
}

CovariancePlan CovariancePlan::build(QuantityKind a, QuantityKind b, double poisson) {
  const auto& left = operator_for(a);
  const auto& right = operator_for(b);
  CovariancePlan plan;
  plan.rigidity_power = left.rigidity_power() + right.rigidity_power();
  for (const auto& ta : left.terms()) {
    for (const auto& tb : right.terms()) {
      const double coefficient = ta.coefficient.at(poisson) * tb.coefficient.at(poisson);
      if (coefficient == 0.0) continue;
      const double sign = ((tb.order_x + tb.order_y) % 2 == 0) ? 1.0 : -1.0;
      const int ox = ta.order_x + tb.order_x;
      const int oy = ta.order_y + tb.order_y;
      auto same = std::find_if(plan.products.begin(), plan.products.end(),
                               [&](const Product& p) { return p.order_x == ox && p.order_y == oy; });
      if (same != plan.products.end()) {
        same->coefficient += sign * coefficient;
      } else {
        plan.products.push_back({sign * coefficient, ox, oy});
      }
    }
  }
  return plan;
}

CovarianceTable::CovarianceTable(double poisson) : poisson_(poisson) {
  plans_.reserve(kQuantityCount * kQuantityCount);
  for (auto a : kAllQuantities) {
    for (auto b : kAllQuantities) plans_.push_back(CovariancePlan::build(a, b, poisson));
  }
}

double CovarianceTable::evaluate(const CovariancePlan& plan, const AxisDerivatives& ax, const AxisDerivatives& ay,
                                 double scale) {
  double sum = 0.0;
  for (const auto& p : plan.products) sum += p.coefficient * ax.value[p.order_x] * ay.value[p.order_y];
  return scale * sum;
}

BlockEntry CovarianceTable::evaluate_with_gradient(const CovariancePlan& plan, const AxisDerivatives& ax,
                                                   const AxisDerivatives& ay, double scale) {
  BlockEntry entry;
  for (const auto& p : plan.products) {
    entry.value += p.coefficient * ax.value[p.order_x] * ay.value[p.order_y];
    entry.d_length_x += p.coefficient * ax.d_length[p.order_x] * ay.value[p.order_y];
    entry.d_length_y += p.coefficient * ax.value[p.order_x] * ay.d_length[p.order_y];
  }
  entry.value *= scale;
  entry.d_length_x *= scale;
  entry.d_length_y *= scale;
  return entry;
}

double cross_covariance(QuantityKind a, QuantityKind b, Point x, Point x_prime, const KernelParams& params,
                        const PlateConstants& constants) {
  const auto plan = CovariancePlan::build(a, b, constants.poisson);
  const auto ax = axis_derivatives(x.x - x_prime.x, params.length_x);
  const auto ay = axis_derivatives(x.y - x_prime.y, params.length_y);
  const double scale =
      params.amplitude * params.amplitude * rigidity_power_of(constants.rigidity, plan.rigidity_power);
  return CovarianceTable::evaluate(plan, ax, ay, scale);
}

double cross_covariance_d_gradient(QuantityKind a, QuantityKind b, Point x, Point x_prime,
                                   const KernelParams& params, const PlateConstants& constants) {
  const int power = operator_for(a).rigidity_power() + operator_for(b).rigidity_power();
  if (power == 0) return 0.0;
  // D enters each block as the monomial D^power.
  return power * cross_covariance(a, b, x, x_prime, params, constants) / constants.rigidity;
}

}  // namespace plategp
