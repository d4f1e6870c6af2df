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

// Finite-difference oracles for the kernel algebra. Test-only: everything here
// is computed from the definition of k_ww and never calls the Hermite
// closed forms under test.

#ifndef PLATEGP_TESTS_FD_ORACLE_HPP
#define PLATEGP_TESTS_FD_ORACLE_HPP

#include <boost/multiprecision/mpfr.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "plategp/kernel.hpp"

namespace plategp::testing {

// 160 decimal digits. Nested differences up to total order 16 need the
// working precision to sit far below h^16.
using HighFloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<160>,
                                                boost::multiprecision::et_off>;

inline HighFloat high_precision_kernel(const HighFloat& x, const HighFloat& y, const HighFloat& xp,
                                       const HighFloat& yp, const KernelParams& p) {
  const HighFloat lx(p.length_x);
  const HighFloat ly(p.length_y);
  const HighFloat a(p.amplitude);
  const HighFloat dx = (x - xp) / lx;
  const HighFloat dy = (y - yp) / ly;
  return a * a * exp(-(dx * dx + dy * dy) / 2);
}

struct Stencil {
  std::vector<HighFloat> weight;
  std::vector<HighFloat> offset;  // in units of h
};

// Central difference of order k: sum_j (-1)^j C(k, j) f(x + (k/2 - j) h) / h^k.
inline Stencil central_stencil(int order) {
  Stencil s;
  HighFloat binom = 1;
  for (int j = 0; j <= order; ++j) {
    s.weight.push_back((j % 2 == 0) ? binom : -binom);
    s.offset.push_back(HighFloat(order) / 2 - j);
    binom = binom * (order - j) / (j + 1);
  }
  return s;
}

// Step rule h = eps^(1/(order+2)) * l with eps the oracle's machine epsilon.
inline HighFloat fd_step(int total_order, double length) {
  const HighFloat eps = std::numeric_limits<HighFloat>::epsilon();
  return pow(eps, HighFloat(1) / (total_order + 2)) * HighFloat(length);
}

// d^(nx+ny)/dx^nx dy^ny d^(mx+my)/dx'^mx dy'^my k_ww by nested central
// differences, one stencil per argument coordinate.
inline double nested_fd_mixed_partial(const DerivativeOrder& order, Point x, Point xp, const KernelParams& p) {
  const int total = order.first_x + order.first_y + order.second_x + order.second_y;
  const HighFloat hx = fd_step(total, p.length_x);
  const HighFloat hy = fd_step(total, p.length_y);
  const auto s1 = central_stencil(order.first_x);
  const auto s2 = central_stencil(order.first_y);
  const auto s3 = central_stencil(order.second_x);
  const auto s4 = central_stencil(order.second_y);
  const HighFloat x0(x.x), y0(x.y), xp0(xp.x), yp0(xp.y);

  HighFloat sum = 0;
  for (std::size_t i = 0; i < s1.weight.size(); ++i) {
    const HighFloat xi = x0 + s1.offset[i] * hx;
    for (std::size_t j = 0; j < s2.weight.size(); ++j) {
      const HighFloat yj = y0 + s2.offset[j] * hy;
      for (std::size_t k = 0; k < s3.weight.size(); ++k) {
        const HighFloat xk = xp0 + s3.offset[k] * hx;
        for (std::size_t m = 0; m < s4.weight.size(); ++m) {
          const HighFloat ym = yp0 + s4.offset[m] * hy;
          sum += s1.weight[i] * s2.weight[j] * s3.weight[k] * s4.weight[m] *
                 high_precision_kernel(xi, yj, xk, ym, p);
        }
      }
    }
  }
  sum /= pow(hx, order.first_x + order.second_x) * pow(hy, order.first_y + order.second_y);
  return static_cast<double>(sum);
}

// Natural magnitude of a derivative of the given per-axis orders: the Hermite
// function envelope A^2 sqrt(nx! ny!) l_x^-nx l_y^-ny. Used as the floor of
// relative-error denominators near zeros of the derivative.
inline double derivative_scale(int order_x, int order_y, const KernelParams& p) {
  return p.amplitude * p.amplitude * std::sqrt(std::tgamma(order_x + 1.0) * std::tgamma(order_y + 1.0)) *
         std::pow(p.length_x, -order_x) * std::pow(p.length_y, -order_y);
}

inline double relative_error(double value, double reference, double scale_floor) {
  return std::abs(value - reference) / std::max(std::abs(reference), scale_floor);
}

}  // namespace plategp::testing

#endif  // PLATEGP_TESTS_FD_ORACLE_HPP
