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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"

namespace detoracle {
namespace {

using testing::obs;
constexpr double kPi = std::numbers::pi;

TEST(Angles, WrapIntoHalfOpenInterval) {
  EXPECT_NEAR(wrap_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.5 * kPi), -0.5 * kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(2.0 * kPi + 0.25), 0.25, 1e-12);
}

TEST(Angles, YawDifferenceTakesTheShortArc) {
  EXPECT_NEAR(yaw_difference(3.0, -3.0, YawPeriod::kTwoPi), 2.0 * kPi - 6.0, 1e-12);
  // Boxes are symmetric under a half turn.
  EXPECT_NEAR(yaw_difference(0.1, kPi - 0.1, YawPeriod::kPi), 0.2, 1e-12);
  EXPECT_NEAR(yaw_difference(0.0, kPi, YawPeriod::kPi), 0.0, 1e-12);
}

TEST(Polygons, PointInPolygonAndBoundaryDistance) {
  const auto sq = testing::rect(0, 0, 4, 2);
  EXPECT_TRUE(point_in_polygon({1, 1}, sq));
  EXPECT_FALSE(point_in_polygon({5, 1}, sq));
  EXPECT_NEAR(distance_to_boundary({1, 1}, sq), 1.0, 1e-12);
  EXPECT_NEAR(distance_to_boundary({7, 6}, sq), 5.0, 1e-12);
}

TEST(Polygons, SelfIntersectingPolygonIsRejected) {
  Polygon2D bow{{{0, 0}, {2, 2}, {2, 0}, {0, 2}}};
  EXPECT_THROW(validate_polygon(bow), GeometryError);
  EXPECT_THROW(validate_polygon(Polygon2D{{{0, 0}, {1, 0}}}), GeometryError);
}

TEST(Polygons, SegmentIntersection) {
  EXPECT_TRUE(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  EXPECT_TRUE(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));  // collinear overlap
}

TEST(Eigen, SymmetricTwoByTwo) {
  // Characteristic polynomial of [[1,2],[2,1]]: (1-l)^2 - 4 = 0 -> l = 3, -1.
  const auto e = sym_eigen(Mat2{1, 2, 2, 1});
  EXPECT_NEAR(e.lambda_max, 3.0, 1e-12);
  EXPECT_NEAR(e.lambda_min, -1.0, 1e-12);
  const Mat2 r = sqrt_psd(Mat2::diag(4.0, 9.0));
  EXPECT_NEAR(r.xx, 2.0, 1e-12);
  EXPECT_NEAR(r.yy, 3.0, 1e-12);
}

TEST(Iou, HalfOverlapOfUnitSquares) {
  // Intersection 0.5, union 1.5.
  const auto a = obs("a", 0, 0.0, 0.0, "car", 1.0, 1.0);
  const auto b = obs("b", 0, 0.5, 0.0, "car", 1.0, 1.0);
  EXPECT_NEAR(one_minus_iou_bev(a, b), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(one_minus_iou_bev(a, a), 0.0, 1e-12);
  EXPECT_NEAR(one_minus_iou_bev(a, obs("c", 0, 5.0, 0.0, "car", 1.0, 1.0)), 1.0, 1e-12);
}

TEST(Iou, RotatedSquareInsideItself) {
  // A unit square rotated 45 degrees over an axis-aligned one: the octagon
  // intersection has area 2(sqrt 2 - 1).
  const auto a = obs("a", 0, 0, 0, "car", 1.0, 1.0);
  const auto b = obs("b", 0, 0, 0, "car", 1.0, 1.0, kPi / 4.0);
  const double inter = 2.0 * (std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(one_minus_iou_bev(a, b), 1.0 - inter / (2.0 - inter), 1e-9);
}

TEST(Iou, AgreesWithPointSampling) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pos(-1.5, 1.5), ext(0.5, 4.0), ang(-kPi, kPi);
  for (int k = 0; k < 5; ++k) {
    const auto a = obs("a", 0, 0, 0, "car", ext(gen), ext(gen), ang(gen));
    const auto b = obs("b", 0, pos(gen), pos(gen), "car", ext(gen), ext(gen), ang(gen));
    EXPECT_NEAR(1.0 - one_minus_iou_bev(a, b), oracle::sampled_iou(a, b, 800, gen), 2e-3);
  }
}

TEST(Iou, ZeroAreaBoxIsAGeometryError) {
  auto a = obs("a", 0, 0, 0);
  a.length = 0.0;
  EXPECT_THROW(one_minus_iou_bev(a, obs("b", 0, 0, 0)), GeometryError);
}

TEST(Mahalanobis, ScalesByCombinedCovariance) {
  auto a = obs("a", 0, 2.0, 0.0);
  auto b = obs("b", 0, 0.0, 0.0);
  a.pos_cov = Mat2::diag(2.0, 0.5);
  b.pos_cov = Mat2::diag(2.0, 0.5);  // sum diag(4, 1)
  EXPECT_NEAR(mahalanobis_distance(a, b), 1.0, 1e-12);
  b.y = 1.0;
  EXPECT_NEAR(mahalanobis_distance(a, b), std::sqrt(2.0), 1e-12);
}

TEST(Mahalanobis, MissingOrSingularCovarianceIsRejected) {
  auto a = obs("a", 0, 0, 0), b = obs("b", 0, 1, 0);
  EXPECT_THROW(mahalanobis_distance(a, b), GeometryError);
  a.pos_cov = Mat2::diag(1.0, 0.0);
  EXPECT_THROW(mahalanobis_distance(a, b), GeometryError);
}

TEST(Wasserstein, EqualCovariancesReduceToCenterDistance) {
  auto a = obs("a", 0, 1.0, 1.0), b = obs("b", 0, 0.0, 0.0);
  a.pos_cov = b.pos_cov = Mat2{2.0, 0.3, 0.3, 1.0};
  EXPECT_NEAR(wasserstein2_gaussian(a, b), std::sqrt(2.0), 1e-9);
}

TEST(Wasserstein, ConcentricIsotropicGaussians) {
  // W2^2 = 2 (sigma_a - sigma_b)^2 in two dimensions.
  auto a = obs("a", 0, 0, 0), b = obs("b", 0, 0, 0);
  a.pos_cov = Mat2::diag(4.0, 4.0);
  b.pos_cov = Mat2::diag(1.0, 1.0);
  EXPECT_NEAR(wasserstein2_gaussian(a, b), std::sqrt(2.0), 1e-9);
}

TEST(Cost, GatesAndPenaltiesSumToTotal) {
  DistanceConfig cfg;
  cfg.threshold = 2.0;
  cfg.w_velocity = 0.5;
  cfg.w_yaw = 1.0;
  auto s = obs("s", 0, 1.0, 0.0);
  auto r = obs("r", 0, 0.0, 0.0);
  s.vx = 2.0;
  s.yaw = 0.3;
  const auto c = composite_cost(s, r, cfg);
  ASSERT_FALSE(c.gated);
  ASSERT_EQ(c.penalties.size(), 2u);
  EXPECT_NEAR(c.penalties[0].second, 1.0, 1e-12);
  EXPECT_NEAR(c.penalties[1].second, 0.3, 1e-12);
  EXPECT_NEAR(c.total, 2.3, 1e-12);

  r.class_label = "truck";
  EXPECT_EQ(composite_cost(s, r, cfg).gate_reason, "class");
  s.x = 2.5;
  EXPECT_EQ(composite_cost(s, r, cfg).gate_reason, "distance");
  EXPECT_FALSE(composite_cost(s, obs("r", 0, 0, 0), cfg, 0.5).gated);  // inflated gate
}

TEST(Cost, ClassPenalties) {
  DistanceConfig cfg;
  cfg.class_gate = false;
  cfg.class_penalty = ClassPenalty::kNll;
  cfg.w_class = 1.0;
  auto s = obs("s", 0, 0, 0);
  s.class_confs = std::map<std::string, double>{{"car", 0.25}, {"truck", 0.75}};
  const auto r = obs("r", 0, 0, 0);
  EXPECT_NEAR(composite_cost(s, r, cfg).total, std::log(4.0), 1e-12);
  cfg.class_penalty = ClassPenalty::kBrier;
  EXPECT_NEAR(composite_cost(s, r, cfg).total, 0.75 * 0.75 + 0.75 * 0.75, 1e-12);
}

TEST(Transforms, RigidMotion) {
  Transform t;
  t.kind = TransformKind::kRigid2d;
  t.theta = kPi / 2.0;
  t.tx = 1.0;
  auto o = obs("a", 0, 2.0, 0.0);
  o.vx = 1.0;
  o.pos_cov = Mat2::diag(4.0, 1.0);
  const auto m = apply_transform(t, o);
  EXPECT_NEAR(m.x, 1.0, 1e-12);
  EXPECT_NEAR(m.y, 2.0, 1e-12);
  EXPECT_NEAR(m.yaw, kPi / 2.0, 1e-12);
  EXPECT_NEAR(m.vy, 1.0, 1e-12);
  EXPECT_NEAR(m.pos_cov->xx, 1.0, 1e-12);
  EXPECT_NEAR(m.pos_cov->yy, 4.0, 1e-12);
}

TEST(Transforms, CubicPolynomialAndJacobian) {
  Transform t;
  t.kind = TransformKind::kPoly3;
  t.poly_x = {0, 1, 0, 0, 0, 0, 0.01, 0, 0, 0};  // x' = x + 0.01 x^3
  t.poly_y = {0, 0, 1, 0, 0.1, 0, 0, 0, 0, 0};   // y' = y + 0.1 x y
  const Vec2 p = transform_point(t, {2.0, 3.0});
  EXPECT_NEAR(p.x, 2.08, 1e-12);
  EXPECT_NEAR(p.y, 3.6, 1e-12);
  const Mat2 j = transform_jacobian(t, 2.0, 3.0);
  EXPECT_NEAR(j.xx, 1.12, 1e-12);
  EXPECT_NEAR(j.xy, 0.0, 1e-12);
  EXPECT_NEAR(j.yx, 0.3, 1e-12);
  EXPECT_NEAR(j.yy, 1.2, 1e-12);
}

TEST(Occlusion, ThreeOfFiveSightLinesBlocked) {
  // Target corners at x=9 and x=11 reach x=5 at |y| = 5/9 and 5/11; a wall
  // spanning |y| <= 0.5 at x=5 cuts the center ray and the two far corners.
  const auto target = obs("t", 0, 10.0, 0.0, "car", 2.0, 2.0);
  const std::vector<ObjectObservation> wall{obs("w", 0, 5.0, 0.0, "car", 0.2, 1.0)};
  EXPECT_NEAR(occlusion_fraction({0, 0}, target, wall), 0.6, 1e-12);
  const std::vector<ObjectObservation> narrow{obs("w", 0, 5.0, 0.2, "car", 0.2, 0.6)};
  EXPECT_NEAR(occlusion_fraction({0, 0}, target, narrow), 0.4, 1e-12);
}

TEST(Occlusion, ViewerInsideTargetIsAnError) {
  const std::vector<ObjectObservation> none;
  EXPECT_THROW(occlusion_fraction({0, 0}, obs("t", 0, 0, 0), none), GeometryError);
}

}  // namespace
}  // namespace detoracle
