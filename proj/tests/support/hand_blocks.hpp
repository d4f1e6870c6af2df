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


// Term-by-term expansions of selected covariance blocks, written out by hand
// from the operator definitions. Test-only oracle for the generic composition.

#ifndef PLATEGP_TESTS_HAND_BLOCKS_HPP
#define PLATEGP_TESTS_HAND_BLOCKS_HPP

#include <cmath>
#include <stdexcept>

#include "plategp/plate_operators.hpp"

namespace plategp::testing {

// d^n/dtau^n exp(-tau^2/2l^2), written out term by term.
inline double g(int n, double tau, double l) {
  const double u = tau / l;
  const double u2 = u * u;
  const double e = std::exp(-u2 / 2);
  switch (n) {
    case 0: return e;
    case 1: return -u / l * e;
    case 2: return (u2 - 1) / (l * l) * e;
    case 3: return -(u2 * u - 3 * u) / std::pow(l, 3) * e;
    case 4: return (u2 * u2 - 6 * u2 + 3) / std::pow(l, 4) * e;
    case 5: return -(u2 * u2 * u - 10 * u2 * u + 15 * u) / std::pow(l, 5) * e;
    case 6: return (u2 * u2 * u2 - 15 * u2 * u2 + 45 * u2 - 15) / std::pow(l, 6) * e;
    case 8: return (std::pow(u, 8) - 28 * std::pow(u, 6) + 210 * u2 * u2 - 420 * u2 + 105) / std::pow(l, 8) * e;
    default: throw std::logic_error("order not tabulated");
  }
}

struct Args {
  double tx, ty, lx, ly, a2, d, nu;
  [[nodiscard]] double gx(int n) const { return g(n, tx, lx); }
  [[nodiscard]] double gy(int n) const { return g(n, ty, ly); }
};

// Hand expansions of selected blocks with x' derivatives sign-flipped.
inline double k_w_q(const Args& s) {
  return s.d * s.a2 * (s.gx(4) * s.gy(0) + 2 * s.gx(2) * s.gy(2) + s.gx(0) * s.gy(4));
}
inline double k_rx_My(const Args& s) {
  return -s.d * s.a2 * (s.gx(1) * s.gy(2) + s.nu * s.gx(3) * s.gy(0));
}
inline double k_kx_q(const Args& s) {
  return -s.d * s.a2 * (s.gx(6) * s.gy(0) + 2 * s.gx(4) * s.gy(2) + s.gx(2) * s.gy(4));
}
inline double k_kxy_Mxy(const Args& s) { return -2 * s.d * (1 - s.nu) * s.a2 * s.gx(2) * s.gy(2); }
inline double k_q_q(const Args& s) {
  return s.d * s.d * s.a2 *
         (s.gx(8) * s.gy(0) + 4 * s.gx(6) * s.gy(2) + 6 * s.gx(4) * s.gy(4) + 4 * s.gx(2) * s.gy(6) +
          s.gx(0) * s.gy(8));
}
inline double k_Qx_Qy(const Args& s) {
  return -s.d * s.d * s.a2 * (s.gx(5) * s.gy(1) + 2 * s.gx(3) * s.gy(3) + s.gx(1) * s.gy(5));
}
inline double k_Mx_Mx(const Args& s) {
  return s.d * s.d * s.a2 *
         (s.gx(4) * s.gy(0) + 2 * s.nu * s.gx(2) * s.gy(2) + s.nu * s.nu * s.gx(0) * s.gy(4));
}


struct HandBlock {
  QuantityKind a, b;
  double (*closed)(const Args&);
};

inline constexpr HandBlock kHandBlocks[] = {
    {QuantityKind::w, QuantityKind::q, k_w_q},           {QuantityKind::r_x, QuantityKind::M_y, k_rx_My},
    {QuantityKind::kappa_x, QuantityKind::q, k_kx_q},    {QuantityKind::kappa_xy, QuantityKind::M_xy, k_kxy_Mxy},
    {QuantityKind::q, QuantityKind::q, k_q_q},           {QuantityKind::Q_x, QuantityKind::Q_y, k_Qx_Qy},
    {QuantityKind::M_x, QuantityKind::M_x, k_Mx_Mx}};

}  // namespace plategp::testing

#endif  // PLATEGP_TESTS_HAND_BLOCKS_HPP
