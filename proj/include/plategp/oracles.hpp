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


#ifndef PLATEGP_ORACLES_HPP
#define PLATEGP_ORACLES_HPP

#include <Eigen/Core>

#include "plategp/gp_model.hpp"
#include "plategp/kernel.hpp"
#include "plategp/plate_operators.hpp"

namespace plategp {

struct PlateGeometry {
  double length_x = 1.0;
  double length_y = 1.0;
  double rigidity = 1.0;
  double poisson = 0.3;

  void validate() const;
  [[nodiscard]] PlateDomain domain() const { return {length_x, length_y}; }
  [[nodiscard]] PlateConstants constants() const { return {rigidity, poisson}; }
};

enum class LoadKind { sinusoidal, uniform };

struct LoadSpec {
  LoadKind kind = LoadKind::sinusoidal;
  double amplitude = 1.0;
};

/// Simply supported plate under q = q0 sin(pi x/a) sin(pi y/b). Exact for all
/// twelve quantities. Throws std::invalid_argument for a uniform load.
double navier_field(const PlateGeometry& geometry, const LoadSpec& load, QuantityKind kind, Point x);

/// Amplitude of the Navier deflection, q0 / (pi^4 D (1/a^2 + 1/b^2)^2).
double navier_amplitude(const PlateGeometry& geometry, double load_amplitude);

/// Ritz approximation of a clamped plate under uniform load on the basis
/// (1 - cos 2 m pi x/a)(1 - cos 2 n pi y/b), m = 1..M, n = 1..N.
class RitzSolution {
 public:
  RitzSolution(PlateGeometry geometry, double load_amplitude, Eigen::MatrixXd coefficients);

  [[nodiscard]] const PlateGeometry& geometry() const { return geometry_; }
  [[nodiscard]] double load_amplitude() const { return load_; }
  [[nodiscard]] int modes_x() const { return static_cast<int>(coefficients_.rows()); }
  [[nodiscard]] int modes_y() const { return static_cast<int>(coefficients_.cols()); }
  /// w_mn, rows m, columns n.
  [[nodiscard]] const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  /// Total potential energy at the solution, -1/2 f^T w.
  [[nodiscard]] double energy() const;

 private:
  PlateGeometry geometry_;
  double load_;
  Eigen::MatrixXd coefficients_;
};

/// Throws std::invalid_argument unless modes_x, modes_y >= 1.
RitzSolution ritz_solve(const PlateGeometry& geometry, double load_amplitude, int modes_x, int modes_y);

/// Term-wise application of the quantity's operator to the series.
double ritz_field(const RitzSolution& solution, QuantityKind kind, Point x);

}  // namespace plategp

#endif  // PLATEGP_ORACLES_HPP
