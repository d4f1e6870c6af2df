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


#include "plategp/conjugate_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace plategp {

namespace {

struct Sample {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Eigen::VectorXd gradient;
};

bool finite(double v) { return std::isfinite(v); }

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db); falls back
// to bisection when the cubic is degenerate or leaves the bracket.
double cubic_step(const Sample& a, const Sample& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double t =
        b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    const double margin = 0.1 * (hi - lo);
    if (finite(t) && t > lo + margin && t < hi - margin) return t;
  }
  return 0.5 * (lo + hi);
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& d, const CgOptions& opt,
             int& evaluations)
      : f_(f), x_(x), d_(d), opt_(opt), evaluations_(evaluations) {}

  Sample eval(double alpha) {
    Sample s;
    s.alpha = alpha;
    s.gradient.resize(x_.size());
    ++evaluations_;
    s.value = f_(x_ + alpha * d_, s.gradient);
    if (!finite(s.value) || !s.gradient.allFinite()) {
      s.value = std::numeric_limits<double>::infinity();
      s.slope = 0.0;
    } else {
      s.slope = s.gradient.dot(d_);
    }
    return s;
  }

  // Returns a point satisfying the strong Wolfe conditions, or the best
  // sufficient-decrease point found when the budget runs out. `ok` is false
  // when no decrease was found at all.
  Sample run(const Sample& start, double alpha, bool& ok) {
    Sample prev = start;
    Sample best = start;
    for (int i = 0; i < 30 && evaluations_ < opt_.max_evaluations; ++i) {
      Sample cur = eval(alpha);
      if (!finite(cur.value)) {
        // Infeasible: shrink toward the last feasible point.
        alpha = prev.alpha + 0.1 * (alpha - prev.alpha);
        continue;
      }
      if (cur.value > start.value + opt_.c1 * cur.alpha * start.slope || (i > 0 && cur.value >= prev.value)) {
        return zoom(start, prev, cur, ok);
      }
      if (std::abs(cur.slope) <= -opt_.c2 * start.slope) {
        ok = true;
        return cur;
      }
      if (cur.slope >= 0.0) return zoom(start, cur, prev, ok);
      best = cur;
      prev = cur;
      alpha *= 2.0;
      if (alpha * d_.cwiseAbs().maxCoeff() > opt_.max_step) {
        ok = true;
        return best;
      }
    }
    ok = best.alpha > 0.0;
    return best;
  }

 private:
  Sample zoom(const Sample& start, Sample lo, Sample hi, bool& ok) {
    for (int i = 0; i < 30 && evaluations_ < opt_.max_evaluations; ++i) {
      const double alpha = finite(hi.value) ? cubic_step(lo, hi) : 0.5 * (lo.alpha + hi.alpha);
      Sample cur = eval(alpha);
      if (!finite(cur.value) || cur.value > start.value + opt_.c1 * cur.alpha * start.slope ||
          cur.value >= lo.value) {
        hi = cur;
      } else {
        if (std::abs(cur.slope) <= -opt_.c2 * start.slope) {
          ok = true;
          return cur;
        }
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, lo.alpha)) break;
    }
    ok = lo.alpha > 0.0 && lo.value < start.value;
    return lo;
  }

  const Objective& f_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& d_;
  const CgOptions& opt_;
  int& evaluations_;
};

}  // namespace

CgResult minimize_cg(const Objective& f, Eigen::VectorXd x0, const CgOptions& options) {
  CgResult res;
  res.x = std::move(x0);
  res.gradient.resize(res.x.size());
  res.value = f(res.x, res.gradient);
  res.evaluations = 1;
  if (!finite(res.value) || !res.gradient.allFinite()) {
    throw std::invalid_argument("objective is not finite at the starting point");
  }

  Eigen::VectorXd d = -res.gradient;
  double previous_slope = 0.0;
  double previous_alpha = 0.0;
  int small_steps = 0;
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (res.gradient.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    if (res.evaluations >= options.max_evaluations) break;

    double slope = res.gradient.dot(d);
    if (slope >= 0.0) {
      d = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    const double dmax = d.cwiseAbs().maxCoeff();
    double alpha = (res.iterations == 0 || previous_alpha == 0.0)
                       ? std::min(1.0, 0.1 / dmax)
                       : std::min(1.0, previous_alpha * previous_slope / slope);
    alpha = std::min(alpha, options.max_step / dmax);

    const Sample start{0.0, res.value, slope, res.gradient};
    bool ok = false;
    LineSearch search(f, res.x, d, options, res.evaluations);
    Sample next = search.run(start, alpha, ok);
    if (!ok) {
      if (d.dot(-res.gradient) < res.gradient.squaredNorm() * (1.0 - 1e-12)) {
        // Retry once along steepest descent before giving up.
        d = -res.gradient;
        previous_alpha = 0.0;
        continue;
      }
      res.message = "line search failed to decrease the objective";
      return res;
    }

    const double reduction =
        (res.value - next.value) / std::max({std::abs(res.value), std::abs(next.value), 1.0});
    small_steps = reduction <= options.function_tolerance ? small_steps + 1 : 0;

    const Eigen::VectorXd g_old = res.gradient;
    res.x += next.alpha * d;
    res.value = next.value;
    res.gradient = next.gradient;
    previous_alpha = next.alpha;
    previous_slope = slope;

    const double beta = std::max(0.0, res.gradient.dot(res.gradient - g_old) / g_old.squaredNorm());
    d = -res.gradient + beta * d;
    if (options.stall_iterations > 0 && small_steps >= options.stall_iterations) {
      ++res.iterations;
      res.converged = true;
      res.message = "relative function reduction below tolerance";
      return res;
    }
  }
  res.converged = res.gradient.cwiseAbs().maxCoeff() < options.gradient_tolerance;
  res.message = res.converged ? "gradient tolerance reached" : "iteration budget exhausted";
  return res;
}

}  // namespace plategp
