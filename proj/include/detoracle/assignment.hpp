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

// Per-frame assignment of SUT rows to ReS columns.
//
// Rows are SUT observations and columns ReS observations, each sorted by
// track id, so index order is the lexicographic id order used for tie
// breaking. Gated cells hold +infinity and are never matched.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace detoracle {

enum class Algorithm { kGreedy, kHungarian };

// Ratios read SUT:ReS. n_one lets several SUT rows share one ReS column,
// one_n lets one SUT row cover several ReS columns.
enum class Cardinality { kOneOne, kOneN, kNOne, kNN };

inline bool rows_exclusive(Cardinality c) {
  return c == Cardinality::kOneOne || c == Cardinality::kNOne;
}
inline bool cols_exclusive(Cardinality c) {
  return c == Cardinality::kOneOne || c == Cardinality::kOneN;
}

class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols,
             double fill = std::numeric_limits<double>::infinity())
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  bool gated(std::size_t r, std::size_t c) const { return !std::isfinite((*this)(r, c)); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct FrameAssignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), sorted
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost(const CostMatrix& m) const {
    double s = 0.0;
    for (const auto& [r, c] : pairs) s += m(r, c);
    return s;
  }
};

// Kuhn-Munkres with row/column potentials on a dense rows <= cols matrix.
// Returns, for each row, the assigned column.
inline std::vector<std::size_t> hungarian_dense(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  const std::size_t m = a[0].size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

namespace detail {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Maximum-cardinality, minimum-cost one-to-one matching over the non-gated
// cells among the given rows/cols. Independent components of the non-gated
// graph are solved separately.
inline std::vector<std::pair<std::size_t, std::size_t>> hungarian_match(
    const CostMatrix& m, const std::vector<std::size_t>& rows,
    const std::vector<std::size_t>& cols) {
  const std::size_t nr = rows.size();
  const std::size_t nc = cols.size();
  DisjointSets sets(nr + nc);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      if (!m.gated(rows[i], cols[j])) sets.unite(i, nr + j);
    }
  }
  std::vector<std::vector<std::size_t>> comp_rows(nr + nc), comp_cols(nr + nc);
  for (std::size_t i = 0; i < nr; ++i) comp_rows[sets.find(i)].push_back(i);
  for (std::size_t j = 0; j < nc; ++j) comp_cols[sets.find(nr + j)].push_back(j);

  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < nr + nc; ++c) {
    const auto& cr = comp_rows[c];
    const auto& cc = comp_cols[c];
    if (cr.empty() || cc.empty()) continue;
    if (cr.size() == 1 && cc.size() == 1) {
      out.emplace_back(rows[cr[0]], cols[cc[0]]);
      continue;
    }
    // Gated cells and padding cost more than every real cost combined, so
    // the optimum first maximizes the number of real matches.
    double finite_sum = 0.0;
    for (auto i : cr) {
      for (auto j : cc) {
        if (!m.gated(rows[i], cols[j])) finite_sum += std::abs(m(rows[i], cols[j]));
      }
    }
    const double big = 2.0 * finite_sum + 1.0;
    const bool transpose = cr.size() > cc.size();
    const auto& small = transpose ? cc : cr;
    const auto& large = transpose ? cr : cc;
    std::vector<std::vector<double>> a(small.size(), std::vector<double>(large.size(), big));
    for (std::size_t i = 0; i < small.size(); ++i) {
      for (std::size_t j = 0; j < large.size(); ++j) {
        const std::size_t r = rows[transpose ? large[j] : small[i]];
        const std::size_t col = cols[transpose ? small[i] : large[j]];
        if (!m.gated(r, col)) a[i][j] = m(r, col);
      }
    }
    const auto assign = hungarian_dense(a);
    for (std::size_t i = 0; i < small.size(); ++i) {
      const std::size_t r = rows[transpose ? large[assign[i]] : small[i]];
      const std::size_t col = cols[transpose ? small[i] : large[assign[i]]];
      if (!m.gated(r, col)) out.emplace_back(r, col);
    }
  }
  return out;
}

}  // namespace detail

// `locked` pairs (sticky matches carried over from the previous frame) are
// kept as-is and their rows/columns removed from the remaining problem.
inline FrameAssignment assign_frame(const CostMatrix& m, Algorithm algorithm,
                                    Cardinality cardinality,
                                    std::span<const std::pair<std::size_t, std::size_t>> locked = {}) {
  FrameAssignment out;
  std::vector<char> row_used(m.rows(), 0), col_used(m.cols(), 0);
  std::vector<char> row_matched(m.rows(), 0), col_matched(m.cols(), 0);
  auto take = [&](std::size_t r, std::size_t c) {
    out.pairs.emplace_back(r, c);
    row_matched[r] = col_matched[c] = 1;
  };
  for (const auto& [r, c] : locked) {
    if (m.gated(r, c) || row_used[r] || col_used[c]) continue;
    take(r, c);
    row_used[r] = col_used[c] = 1;
  }

  if (cardinality == Cardinality::kNN) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (!m.gated(r, c) && !(row_used[r] && col_used[c])) take(r, c);
      }
    }
  } else if (algorithm == Algorithm::kGreedy) {
    struct Cell {
      double cost;
      std::size_t r, c;
    };
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (!m.gated(r, c)) cells.push_back({m(r, c), r, c});
      }
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      if (a.cost != b.cost) return a.cost < b.cost;
      if (a.r != b.r) return a.r < b.r;
      return a.c < b.c;
    });
    for (const auto& cell : cells) {
      if (row_used[cell.r] && col_used[cell.c]) continue;
      if (rows_exclusive(cardinality) && row_used[cell.r]) continue;
      if (cols_exclusive(cardinality) && col_used[cell.c]) continue;
      take(cell.r, cell.c);
      row_used[cell.r] = col_used[cell.c] = 1;
    }
  } else {
    std::vector<std::size_t> rows, cols;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (!row_used[r]) rows.push_back(r);
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!col_used[c]) cols.push_back(c);
    }
    for (const auto& [r, c] : detail::hungarian_match(m, rows, cols)) {
      take(r, c);
      row_used[r] = col_used[c] = 1;
    }
    // Extend the one-to-one core where the cardinality allows sharing.
    if (cardinality == Cardinality::kNOne) {
      for (std::size_t r = 0; r < m.rows(); ++r) {
        if (row_used[r]) continue;
        std::size_t best = m.cols();
        for (std::size_t c = 0; c < m.cols(); ++c) {
          if (!m.gated(r, c) && (best == m.cols() || m(r, c) < m(r, best))) best = c;
        }
        if (best != m.cols()) {
          take(r, best);
          row_used[r] = 1;
        }
      }
    } else if (cardinality == Cardinality::kOneN) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (col_used[c]) continue;
        std::size_t best = m.rows();
        for (std::size_t r = 0; r < m.rows(); ++r) {
          if (!m.gated(r, c) && (best == m.rows() || m(r, c) < m(best, c))) best = r;
        }
        if (best != m.rows()) {
          take(best, c);
          col_used[c] = 1;
        }
      }
    }
  }

  std::sort(out.pairs.begin(), out.pairs.end());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!row_matched[r]) out.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!col_matched[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

}  // namespace detoracle
