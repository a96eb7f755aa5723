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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"

namespace detoracle {
namespace {

CostMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  CostMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(Hungarian, ClassicThreeByThree) {
  const auto m = from_rows({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
  const auto a = assign_frame(m, Algorithm::kHungarian, Cardinality::kOneOne);
  EXPECT_DOUBLE_EQ(a.total_cost(m), 5.0);
  EXPECT_EQ(a.pairs.size(), 3u);
}

TEST(Hungarian, RectangularBothWays) {
  const auto wide = from_rows({{3, 1, 4, 1}, {5, 9, 2, 6}});
  auto a = assign_frame(wide, Algorithm::kHungarian, Cardinality::kOneOne);
  EXPECT_DOUBLE_EQ(a.total_cost(wide), 3.0);
  EXPECT_EQ(a.unmatched_cols.size(), 2u);
  const auto tall = from_rows({{3, 5}, {1, 9}, {4, 2}});
  a = assign_frame(tall, Algorithm::kHungarian, Cardinality::kOneOne);
  EXPECT_DOUBLE_EQ(a.total_cost(tall), 3.0);
  EXPECT_EQ(a.unmatched_rows, std::vector<std::size_t>{0});
}

TEST(Hungarian, MaximisesMatchesBeforeMinimisingCost) {
  // Pairing (0,0) alone costs 1, but (0,1)+(1,0) matches two objects.
  const auto m = from_rows({{1, 5}, {5, kInf}});
  const auto a = assign_frame(m, Algorithm::kHungarian, Cardinality::kOneOne);
  EXPECT_EQ(a.pairs.size(), 2u);
  EXPECT_DOUBLE_EQ(a.total_cost(m), 10.0);
}

TEST(Hungarian, MatchesExhaustiveSearch) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> dim(1, 6), val(0, 6400);
  for (int k = 0; k < 200; ++k) {
    const int r = dim(gen), c = dim(gen);
    std::vector<std::vector<double>> rows(r, std::vector<double>(c));
    for (auto& row : rows) {
      for (auto& v : row) v = val(gen) / 64.0;
    }
    const auto m = from_rows(rows);
    const auto a = assign_frame(m, Algorithm::kHungarian, Cardinality::kOneOne);
    EXPECT_EQ(a.total_cost(m), oracle::min_assignment_cost(rows));
  }
}

TEST(Greedy, TakesCheapestCellsFirst) {
  // Greedy pairs (0,0)=1 first and pays 1+10; the optimum is 2+3.
  const auto m = from_rows({{1, 2}, {3, 10}});
  EXPECT_DOUBLE_EQ(assign_frame(m, Algorithm::kGreedy, Cardinality::kOneOne).total_cost(m), 11.0);
  EXPECT_DOUBLE_EQ(assign_frame(m, Algorithm::kHungarian, Cardinality::kOneOne).total_cost(m), 5.0);
}

TEST(Cardinality, SharedColumnsAndRows) {
  // Rows are SUT objects, columns ReS objects.
  const auto m = from_rows({{0.2, kInf}, {0.6, kInf}, {kInf, 0.1}});
  for (auto alg : {Algorithm::kGreedy, Algorithm::kHungarian}) {
    EXPECT_EQ(assign_frame(m, alg, Cardinality::kOneOne).pairs.size(), 2u);
    const auto n1 = assign_frame(m, alg, Cardinality::kNOne);
    EXPECT_EQ(n1.pairs.size(), 3u);  // two SUT rows share ReS column 0
    EXPECT_TRUE(n1.unmatched_rows.empty());
  }
  const auto t = from_rows({{0.2, 0.4, kInf}, {kInf, kInf, 0.3}});
  const auto one_n = assign_frame(t, Algorithm::kHungarian, Cardinality::kOneN);
  EXPECT_EQ(one_n.pairs.size(), 3u);
  EXPECT_EQ(assign_frame(t, Algorithm::kHungarian, Cardinality::kNOne).pairs.size(), 2u);
  const auto all = from_rows({{1, 2}, {3, kInf}});
  EXPECT_EQ(assign_frame(all, Algorithm::kGreedy, Cardinality::kNN).pairs.size(), 3u);
}

TEST(Assignment, LockedPairsArePreassigned) {
  const auto m = from_rows({{1, 5}, {0.5, 9}});
  const std::vector<std::pair<std::size_t, std::size_t>> locked{{0, 0}};
  const auto a = assign_frame(m, Algorithm::kHungarian, Cardinality::kOneOne, locked);
  ASSERT_EQ(a.pairs.size(), 2u);
  EXPECT_EQ(a.pairs[0], std::make_pair(std::size_t{0}, std::size_t{0}));
  EXPECT_EQ(a.pairs[1], std::make_pair(std::size_t{1}, std::size_t{1}));
}

TEST(Assignment, EmptyAndFullyGatedFrames) {
  const CostMatrix empty(0, 3);
  EXPECT_EQ(assign_frame(empty, Algorithm::kHungarian, Cardinality::kOneOne).unmatched_cols.size(), 3u);
  const CostMatrix gated(2, 2);
  const auto a = assign_frame(gated, Algorithm::kHungarian, Cardinality::kOneOne);
  EXPECT_TRUE(a.pairs.empty());
  EXPECT_EQ(a.unmatched_rows.size(), 2u);
}

}  // namespace
}  // namespace detoracle
