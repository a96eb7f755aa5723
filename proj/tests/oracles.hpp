// Copyright 2026 The detoracle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Brute-force reference computations used as test oracles. None of them
// shares code with the library routine it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "detoracle/model.hpp"

namespace detoracle::oracle {

// Point-in-rotated-rectangle via the box frame.
inline bool inside_box(const ObjectObservation& o, double px, double py) {
  const double c = std::cos(o.yaw), s = std::sin(o.yaw);
  const double dx = px - o.x, dy = py - o.y;
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  return std::abs(u) <= 0.5 * o.length && std::abs(v) <= 0.5 * o.width;
}

// IoU by jittered-grid point sampling over the joint bounding square.
inline double sampled_iou(const ObjectObservation& a, const ObjectObservation& b, int n,
                          std::mt19937_64& gen) {
  const double ra = 0.5 * std::hypot(a.length, a.width);
  const double rb = 0.5 * std::hypot(b.length, b.width);
  const double x0 = std::min(a.x - ra, b.x - rb), x1 = std::max(a.x + ra, b.x + rb);
  const double y0 = std::min(a.y - ra, b.y - rb), y1 = std::max(a.y + ra, b.y + rb);
  const double hx = (x1 - x0) / n, hy = (y1 - y0) / n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long in_a = 0, in_b = 0, both = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double px = x0 + (i + u(gen)) * hx;
      const double py = y0 + (j + u(gen)) * hy;
      const bool ia = inside_box(a, px, py), ib = inside_box(b, px, py);
      in_a += ia;
      in_b += ib;
      both += ia && ib;
    }
  }
  const long uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(uni);
}

// W2 between axis-aligned Gaussians from samples: for independent coordinates
// the optimal coupling is the product of the sorted 1-D couplings.
inline double sampled_w2_diagonal(double mx1, double my1, double vx1, double vy1, double mx2,
                                  double my2, double vx2, double vy2, int n, std::mt19937_64& gen) {
  auto axis = [&](double m1, double v1, double m2, double v2) {
    std::normal_distribution<double> d1(m1, std::sqrt(v1)), d2(m2, std::sqrt(v2));
    std::vector<double> s1(n), s2(n);
    for (auto& x : s1) x = d1(gen);
    for (auto& x : s2) x = d2(gen);
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += (s1[i] - s2[i]) * (s1[i] - s2[i]);
    return acc / n;
  };
  return std::sqrt(axis(mx1, vx1, mx2, vx2) + axis(my1, vy1, my2, vy2));
}

// Minimum total cost over every injective row-to-column assignment of a
// rows <= cols matrix (transposed otherwise). Enumerates permutations.
inline double min_assignment_cost(std::vector<std::vector<double>> m) {
  if (m.empty() || m[0].empty()) return 0.0;
  if (m.size() > m[0].size()) {
    std::vector<std::vector<double>> t(m[0].size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m[0].size(); ++j) t[j][i] = m[i][j];
    }
    m = std::move(t);
  }
  std::vector<std::size_t> cols(m[0].size());
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m[i][cols[i]];
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

// Lengths of the maximal runs of `true` strictly between two `false` entries.
inline std::vector<int> interior_runs(const std::vector<bool>& missed) {
  std::vector<int> runs;
  int first_hit = -1;
  for (std::size_t i = 0; i < missed.size(); ++i) {
    if (!missed[i]) {
      first_hit = static_cast<int>(i);
      break;
    }
  }
  if (first_hit < 0) return runs;
  int run = 0;
  for (std::size_t i = first_hit; i < missed.size(); ++i) {
    if (missed[i]) {
      ++run;
    } else {
      if (run > 0) runs.push_back(run);
      run = 0;
    }
  }
  return runs;
}

}  // namespace detoracle::oracle
