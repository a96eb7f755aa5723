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

// Bird's-eye-view geometry: distance functions, oriented footprints, polygon
// predicates, coordinate transforms, and line-of-sight occlusion.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "detoracle/error.hpp"
#include "detoracle/model.hpp"

namespace detoracle {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 position(const ObjectObservation& o) { return {o.x, o.y}; }

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Polygons

struct Polygon2D {
  std::vector<Vec2> vertices;  // implicitly closed
  friend bool operator==(const Polygon2D&, const Polygon2D&) = default;
};

inline double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    a += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * a;
}

namespace detail {

inline int orientation(Vec2 a, Vec2 b, Vec2 c, double eps = 1e-12) {
  const double v = cross(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p, double eps = 1e-12) {
  return std::min(a.x, b.x) - eps <= p.x && p.x <= std::max(a.x, b.x) + eps &&
         std::min(a.y, b.y) - eps <= p.y && p.y <= std::max(a.y, b.y) + eps;
}

}  // namespace detail

// Closed-segment intersection test (touching counts).
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// Distance from p to the polygon outline (not to its interior).
inline double distance_to_boundary(Vec2 p, const Polygon2D& poly) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

// Throws GeometryError unless the polygon has >= 3 vertices, non-zero area,
// and no two non-adjacent edges touch.
inline void validate_polygon(const Polygon2D& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (const auto& p : v) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw GeometryError("polygon vertex is not finite");
    }
  }
  if (std::abs(signed_area(v)) < 1e-12) throw GeometryError("polygon has zero area");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
        throw GeometryError("polygon is self-intersecting");
      }
    }
  }
}

// Even-odd rule. Points within 1e-9 m of the outline count as inside.
inline bool point_in_polygon(Vec2 p, const Polygon2D& poly) {
  if (distance_to_boundary(p, poly) <= 1e-9) return true;
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x_cross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

// Oriented rectangle corners, counter-clockwise.
inline std::array<Vec2, 4> footprint(const ObjectObservation& o) {
  const double c = std::cos(o.yaw);
  const double s = std::sin(o.yaw);
  const double hl = 0.5 * o.length;
  const double hw = 0.5 * o.width;
  const Vec2 f{c * hl, s * hl};
  const Vec2 l{-s * hw, c * hw};
  const Vec2 ctr{o.x, o.y};
  return {ctr - f - l, ctr + f - l, ctr + f + l, ctr - f + l};
}

inline Polygon2D footprint_polygon(const ObjectObservation& o) {
  const auto fp = footprint(o);
  return Polygon2D{{fp.begin(), fp.end()}};
}

inline bool segment_intersects_polygon(Vec2 a, Vec2 b, const Polygon2D& poly) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (segments_intersect(a, b, v[i], v[(i + 1) % v.size()])) return true;
  }
  return point_in_polygon(a, poly);
}

// Sutherland-Hodgman clipping of a convex polygon against a convex clip
// polygon, both counter-clockwise.
inline std::vector<Vec2> clip_convex(std::vector<Vec2> subject, std::span<const Vec2> clip) {
  for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    const Vec2 e0 = clip[i];
    const Vec2 e1 = clip[(i + 1) % clip.size()];
    const Vec2 edge = e1 - e0;
    auto side = [&](Vec2 p) { return cross(edge, p - e0); };
    std::vector<Vec2> out;
    out.reserve(subject.size() + 2);
    for (std::size_t k = 0; k < subject.size(); ++k) {
      const Vec2 cur = subject[k];
      const Vec2 prev = subject[(k + subject.size() - 1) % subject.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) out.push_back(prev + (sp / (sp - sc)) * (cur - prev));
        out.push_back(cur);
      } else if (sp >= 0.0) {
        out.push_back(prev + (sp / (sp - sc)) * (cur - prev));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

// ---------------------------------------------------------------------------
// Symmetric 2x2 helpers

struct SymEigen2 {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double angle = 0.0;  // direction of the lambda_max eigenvector
};

inline SymEigen2 sym_eigen(const Mat2& m) {
  const double a = m.xx;
  const double b = 0.5 * (m.xy + m.yx);
  const double c = m.yy;
  const double mean = 0.5 * (a + c);
  const double r = std::hypot(0.5 * (a - c), b);
  return {mean + r, mean - r, 0.5 * std::atan2(2.0 * b, a - c)};
}

inline Mat2 from_eigen(double l1, double l2, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // V diag(l1, l2) V^T with V = [[c, -s], [s, c]]
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, (l1 - l2) * c * s,
          l1 * s * s + l2 * c * c};
}

inline bool is_psd(const Mat2& m, double tol = 1e-12) { return detail::is_psd(m, tol); }

// Principal square root of a symmetric PSD matrix.
inline Mat2 sqrt_psd(const Mat2& m) {
  if (!is_psd(m)) throw GeometryError("matrix square root of a non-PSD matrix");
  const auto e = sym_eigen(m);
  return from_eigen(std::sqrt(std::max(0.0, e.lambda_max)),
                    std::sqrt(std::max(0.0, e.lambda_min)), e.angle);
}

// ---------------------------------------------------------------------------
// Distance functions

inline double center_distance_2d(const ObjectObservation& a, const ObjectObservation& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double box_area(const ObjectObservation& o) { return o.length * o.width; }

inline double intersection_area_bev(const ObjectObservation& a, const ObjectObservation& b) {
  const auto fa = footprint(a);
  const auto fb = footprint(b);
  const auto inter = clip_convex({fa.begin(), fa.end()}, fb);
  if (inter.size() < 3) return 0.0;
  const double area = std::abs(signed_area(inter));
  return area < 1e-9 ? 0.0 : area;
}

inline double one_minus_iou_bev(const ObjectObservation& a, const ObjectObservation& b) {
  if (!(box_area(a) > 1e-12) || !(box_area(b) > 1e-12)) {
    throw GeometryError("zero-area box '" + (box_area(a) > 1e-12 ? b.track_id : a.track_id) +
                        "' in IoU");
  }
  const double inter = intersection_area_bev(a, b);
  const double uni = box_area(a) + box_area(b) - inter;
  return std::clamp(1.0 - inter / uni, 0.0, 1.0);
}

inline Mat2 cov_or_zero(const ObjectObservation& o) {
  return o.pos_cov.value_or(Mat2{});
}

inline double mahalanobis_distance(const ObjectObservation& a, const ObjectObservation& b) {
  const std::string pair = "('" + a.track_id + "', '" + b.track_id + "')";
  if (!a.pos_cov && !b.pos_cov) {
    throw GeometryError("mahalanobis distance needs a covariance for pair " + pair);
  }
  const Mat2 sigma = cov_or_zero(a) + cov_or_zero(b);
  const auto e = sym_eigen(sigma);
  if (!(e.lambda_min > 0.0) || e.lambda_max / e.lambda_min > 1e12) {
    throw GeometryError("singular combined covariance for pair " + pair);
  }
  const double det = sigma.det();
  const Mat2 inv{sigma.yy / det, -sigma.xy / det, -sigma.yx / det, sigma.xx / det};
  const Vec2 d{a.x - b.x, a.y - b.y};
  const double q = d.x * (inv.xx * d.x + inv.xy * d.y) + d.y * (inv.yx * d.x + inv.yy * d.y);
  return std::sqrt(std::max(0.0, q));
}

// 2-Wasserstein distance between the Gaussian position distributions.
inline double wasserstein2_gaussian(const ObjectObservation& a, const ObjectObservation& b) {
  const Mat2 sa = cov_or_zero(a);
  const Mat2 sb = cov_or_zero(b);
  if (!is_psd(sa) || !is_psd(sb)) {
    throw GeometryError("non-PSD covariance in wasserstein distance for ('" + a.track_id +
                        "', '" + b.track_id + "')");
  }
  const Mat2 rb = sqrt_psd(sb);
  const Mat2 m = rb * sa * rb;
  const auto e = sym_eigen(m);
  const double cross_term =
      std::sqrt(std::max(0.0, e.lambda_max)) + std::sqrt(std::max(0.0, e.lambda_min));
  const double bures = std::max(0.0, sa.trace() + sb.trace() - 2.0 * cross_term);
  const double d2 = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
  return std::sqrt(d2 + bures);
}

// ---------------------------------------------------------------------------
// Composite matching cost

enum class Metric { kCenter2d, kOneMinusIou, kMahalanobis, kWasserstein2 };
enum class YawPeriod { kPi, kTwoPi };
enum class ClassPenalty { kNone, kNll, kBrier };

struct DistanceConfig {
  Metric metric = Metric::kCenter2d;
  double threshold = 2.0;
  bool class_gate = true;
  double class_mismatch_penalty = 0.0;  // finite alternative to the gate
  double w_velocity = 0.0;
  double w_yaw = 0.0;
  YawPeriod yaw_period = YawPeriod::kPi;
  ClassPenalty class_penalty = ClassPenalty::kNone;
  double w_class = 0.0;

  friend bool operator==(const DistanceConfig&, const DistanceConfig&) = default;
};

struct CostBreakdown {
  double geometric = 0.0;
  std::vector<std::pair<std::string, double>> penalties;
  bool gated = false;
  std::string gate_reason;  // "distance" or "class" when gated
  double total = 0.0;

  static constexpr double kGated = std::numeric_limits<double>::infinity();
  friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;
};

inline double geometric_distance(const ObjectObservation& a, const ObjectObservation& b,
                                 Metric metric) {
  switch (metric) {
    case Metric::kCenter2d:
      return center_distance_2d(a, b);
    case Metric::kOneMinusIou:
      return one_minus_iou_bev(a, b);
    case Metric::kMahalanobis:
      return mahalanobis_distance(a, b);
    case Metric::kWasserstein2:
      return wasserstein2_gaussian(a, b);
  }
  return center_distance_2d(a, b);
}

inline double yaw_difference(double a, double b, YawPeriod period) {
  const double d = std::abs(wrap_angle(a - b));  // [0, pi]
  if (period == YawPeriod::kTwoPi) return d;
  return std::min(d, std::numbers::pi - d);  // [0, pi/2]
}

// Probability the SUT assigned to `label`; one-hot on its class_label when no
// class confidences are present.
inline double class_probability(const ObjectObservation& sut, const std::string& label) {
  if (sut.class_confs) {
    auto it = sut.class_confs->find(label);
    return it == sut.class_confs->end() ? 0.0 : it->second;
  }
  return sut.class_label == label ? 1.0 : 0.0;
}

inline double classification_penalty(const ObjectObservation& sut, const ObjectObservation& res,
                                     ClassPenalty kind) {
  switch (kind) {
    case ClassPenalty::kNone:
      return 0.0;
    case ClassPenalty::kNll:
      return -std::log(std::max(1e-12, class_probability(sut, res.class_label)));
    case ClassPenalty::kBrier: {
      double score = 0.0;
      bool saw_truth = false;
      if (sut.class_confs) {
        for (const auto& [cls, p] : *sut.class_confs) {
          const double target = cls == res.class_label ? 1.0 : 0.0;
          saw_truth = saw_truth || cls == res.class_label;
          score += (p - target) * (p - target);
        }
      } else {
        saw_truth = sut.class_label == res.class_label;
        score = saw_truth ? 0.0 : 1.0;
      }
      if (!saw_truth) score += 1.0;
      return score;
    }
  }
  return 0.0;
}

// Cost of pairing SUT observation `sut` with ReS observation `res`.
// `threshold_inflation` widens the distance gate (alignment / sync error).
inline CostBreakdown composite_cost(const ObjectObservation& sut, const ObjectObservation& res,
                                    const DistanceConfig& cfg, double threshold_inflation = 0.0) {
  CostBreakdown c;
  c.geometric = geometric_distance(sut, res, cfg.metric);
  const bool labels_differ = sut.class_label != res.class_label;
  if (c.geometric > cfg.threshold + threshold_inflation) {
    c.gated = true;
    c.gate_reason = "distance";
  } else if (cfg.class_gate && labels_differ) {
    c.gated = true;
    c.gate_reason = "class";
  }
  if (c.gated) {
    c.total = CostBreakdown::kGated;
    return c;
  }
  if (cfg.w_velocity != 0.0) {
    c.penalties.emplace_back("velocity",
                             cfg.w_velocity * std::hypot(sut.vx - res.vx, sut.vy - res.vy));
  }
  if (cfg.w_yaw != 0.0) {
    c.penalties.emplace_back("yaw", cfg.w_yaw * yaw_difference(sut.yaw, res.yaw, cfg.yaw_period));
  }
  if (cfg.class_penalty != ClassPenalty::kNone && cfg.w_class != 0.0) {
    c.penalties.emplace_back(cfg.class_penalty == ClassPenalty::kNll ? "class_nll" : "class_brier",
                             cfg.w_class * classification_penalty(sut, res, cfg.class_penalty));
  }
  if (!cfg.class_gate && labels_differ && cfg.class_mismatch_penalty != 0.0) {
    c.penalties.emplace_back("class_mismatch", cfg.class_mismatch_penalty);
  }
  c.total = c.geometric;
  for (const auto& [_, v] : c.penalties) c.total += v;
  return c;
}

// ---------------------------------------------------------------------------
// Coordinate transforms (ReS frame -> SUT frame)

enum class TransformKind { kIdentity, kRigid2d, kPoly3 };

struct Transform {
  TransformKind kind = TransformKind::kIdentity;
  double tx = 0.0;
  double ty = 0.0;
  double theta = 0.0;
  // Bivariate cubic coefficients over monomials
  // [1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3].
  std::array<double, 10> poly_x{0, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  std::array<double, 10> poly_y{0, 0, 1, 0, 0, 0, 0, 0, 0, 0};
  double reported_error_m = 0.0;

  friend bool operator==(const Transform&, const Transform&) = default;
};

namespace detail {

inline std::array<double, 10> cubic_monomials(double x, double y) {
  return {1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
}
inline std::array<double, 10> cubic_dx(double x, double y) {
  return {0.0, 1.0, 0.0, 2.0 * x, y, 0.0, 3.0 * x * x, 2.0 * x * y, y * y, 0.0};
}
inline std::array<double, 10> cubic_dy(double x, double y) {
  return {0.0, 0.0, 1.0, 0.0, x, 2.0 * y, 0.0, x * x, 2.0 * x * y, 3.0 * y * y};
}
inline double eval(const std::array<double, 10>& c, const std::array<double, 10>& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < 10; ++i) s += c[i] * m[i];
  return s;
}

}  // namespace detail

// Local Jacobian of the transform at (x, y).
inline Mat2 transform_jacobian(const Transform& t, double x, double y) {
  switch (t.kind) {
    case TransformKind::kIdentity:
      return Mat2::identity();
    case TransformKind::kRigid2d: {
      const double c = std::cos(t.theta);
      const double s = std::sin(t.theta);
      return {c, -s, s, c};
    }
    case TransformKind::kPoly3: {
      const auto dx = detail::cubic_dx(x, y);
      const auto dy = detail::cubic_dy(x, y);
      return {detail::eval(t.poly_x, dx), detail::eval(t.poly_x, dy),
              detail::eval(t.poly_y, dx), detail::eval(t.poly_y, dy)};
    }
  }
  return Mat2::identity();
}

inline Vec2 transform_point(const Transform& t, Vec2 p) {
  switch (t.kind) {
    case TransformKind::kIdentity:
      return p;
    case TransformKind::kRigid2d: {
      const double c = std::cos(t.theta);
      const double s = std::sin(t.theta);
      return {c * p.x - s * p.y + t.tx, s * p.x + c * p.y + t.ty};
    }
    case TransformKind::kPoly3: {
      const auto m = detail::cubic_monomials(p.x, p.y);
      return {detail::eval(t.poly_x, m), detail::eval(t.poly_y, m)};
    }
  }
  return p;
}

// Maps position, heading, velocity and covariance. Extents are unchanged.
inline ObjectObservation apply_transform(const Transform& t, ObjectObservation obs) {
  if (t.kind == TransformKind::kIdentity) return obs;
  const Mat2 j = transform_jacobian(t, obs.x, obs.y);
  const Vec2 p = transform_point(t, {obs.x, obs.y});
  if (t.kind == TransformKind::kRigid2d) {
    obs.yaw = wrap_angle(obs.yaw + t.theta);
  } else {
    const Vec2 h{std::cos(obs.yaw), std::sin(obs.yaw)};
    obs.yaw = std::atan2(j.yx * h.x + j.yy * h.y, j.xx * h.x + j.xy * h.y);
  }
  const Vec2 v{obs.vx, obs.vy};
  obs.vx = j.xx * v.x + j.xy * v.y;
  obs.vy = j.yx * v.x + j.yy * v.y;
  if (obs.pos_cov) obs.pos_cov = j * *obs.pos_cov * j.transposed();
  obs.x = p.x;
  obs.y = p.y;
  return obs;
}

// ---------------------------------------------------------------------------
// Line of sight

// Fraction of the five sight lines (viewer to each footprint corner and to
// the center) that cross any blocker footprint.
inline double occlusion_fraction(Vec2 viewer, const ObjectObservation& target,
                                 std::span<const ObjectObservation> blockers) {
  const Polygon2D target_poly = footprint_polygon(target);
  if (point_in_polygon(viewer, target_poly)) {
    throw GeometryError("viewer lies inside the footprint of '" + target.track_id + "'");
  }
  if (blockers.empty()) return 0.0;
  std::vector<Polygon2D> blocker_polys;
  blocker_polys.reserve(blockers.size());
  for (const auto& b : blockers) blocker_polys.push_back(footprint_polygon(b));

  const auto corners = footprint(target);
  const std::array<Vec2, 5> ends{corners[0], corners[1], corners[2], corners[3],
                                 Vec2{target.x, target.y}};
  int blocked = 0;
  for (const Vec2 end : ends) {
    for (const auto& poly : blocker_polys) {
      if (segment_intersects_polygon(viewer, end, poly)) {
        ++blocked;
        break;
      }
    }
  }
  return blocked / 5.0;
}

}  // namespace detoracle
