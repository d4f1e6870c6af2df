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

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plategp {

namespace {

// d^n/dt^n sin(t) = sin(t + n pi/2), by quadrant to keep zeros exact.
double sin_derivative(int n, double t) {
  switch (n % 4) {
    case 0: return std::sin(t);
    case 1: return std::cos(t);
    case 2: return -std::sin(t);
    default: return -std::cos(t);
  }
}

}  // namespace

void PlateGeometry::validate() const {
  if (!(length_x > 0.0) || !(length_y > 0.0) || !std::isfinite(length_x) || !std::isfinite(length_y)) {
    throw std::invalid_argument("plate spans must be positive");
  }
  constants().validate();
}

double navier_amplitude(const PlateGeometry& g, double load_amplitude) {
  const double pi = std::numbers::pi;
  const double s = 1.0 / (g.length_x * g.length_x) + 1.0 / (g.length_y * g.length_y);
  return load_amplitude / (pi * pi * pi * pi * g.rigidity * s * s);
}

double navier_field(const PlateGeometry& g, const LoadSpec& load, QuantityKind kind, Point x) {
  if (load.kind != LoadKind::sinusoidal) throw std::invalid_argument("Navier solution needs a sinusoidal load");
  const double pi = std::numbers::pi;
  const double kx = pi / g.length_x;
  const double ky = pi / g.length_y;
  const double c = navier_amplitude(g, load.amplitude);
  double value = 0.0;
  for (const auto& t : operator_for(kind).terms()) {
    value += t.coefficient.at(g.poisson) * std::pow(g.rigidity, t.rigidity_power) * std::pow(kx, t.order_x) *
             std::pow(ky, t.order_y) * sin_derivative(t.order_x, kx * x.x) * sin_derivative(t.order_y, ky * x.y);
  }
  return c * value;
}

}  // namespace plategp
