#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "perimetry/geom_core.hpp"

using namespace perimetry;

namespace {

constexpr double kPi = std::numbers::pi;

// Smallest enclosing circle by brute force over pairs and triples.
double brute_circumradius(const std::vector<Vector>& pts) {
  auto covers = [&](const Vector& c, double r) {
    for (const auto& p : pts)
      if (distance(p, c) > r * (1 + 1e-9) + 1e-12) return false;
    return true;
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i; j < pts.size(); ++j) {
      const Vector c = 0.5 * (pts[i] + pts[j]);
      const double r = distance(pts[i], c);
      if (covers(c, r)) best = std::min(best, r);
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const double ax = pts[i][0], ay = pts[i][1], bx = pts[j][0], by = pts[j][1], cx = pts[k][0], cy = pts[k][1];
        const double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
        if (std::abs(d) < 1e-14) continue;
        const double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d;
        const double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d;
        const Vector u{ux, uy};
        const double r = distance(u, pts[i]);
        if (covers(u, r)) best = std::min(best, r);
      }
    }
  return best;
}

}  // namespace

TEST(SphereQuadrature, WeightsSumToSphereArea) {
  for (int n : {1, 2, 3}) {
    const auto q = sphere_quadrature(n, n == 1 ? 2 : 500);
    double s = 0.0;
    for (double w : q.weights) s += w;
    EXPECT_NEAR(s, unit_sphere_area(n), 1e-12) << "n=" << n;
    for (const auto& u : q.nodes) EXPECT_NEAR(u.norm(), 1.0, 1e-12);
  }
}

TEST(SphereQuadrature, IntegratesAbsoluteCoordinate) {
  // int_{S^1} |u_1| = 4, int_{S^2} |u_3| = 2 pi.
  auto integrate = [](const SphereQuadrature& q, int axis) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::abs(q.nodes[i][axis]);
    return s;
  };
  EXPECT_NEAR(integrate(sphere_quadrature(2, 1000), 0), 4.0, 1e-4);
  EXPECT_NEAR(integrate(sphere_quadrature(3, 20000), 2), 2.0 * kPi, 1e-3);
}

TEST(SphereQuadrature, RejectsUnsupportedInputs) {
  EXPECT_THROW(sphere_quadrature(4, 100), ValidationError);
  EXPECT_THROW(sphere_quadrature(2, 1), ValidationError);
}

TEST(StructuringElement, DropsDuplicatesAndKeepsOrder) {
  StructuringElement Q{Vector{1.0, 0.0}, Vector{0.0, 1.0}, Vector{1.0, 0.0}};
  ASSERT_EQ(Q.size(), 2u);
  EXPECT_EQ(Q.points()[0], (Vector{1.0, 0.0}));
  EXPECT_FALSE(Q.contains_origin());
  EXPECT_TRUE(Q.with_origin().contains_origin());
  EXPECT_THROW(StructuringElement(std::vector<Vector>{}), ValidationError);
  EXPECT_THROW((StructuringElement{Vector{1.0}, Vector{1.0, 2.0}}), ValidationError);
}

TEST(Support, MatchesHandComputedValues) {
  StructuringElement Q{Vector{1.0, 0.0}, Vector{0.0, 2.0}};
  EXPECT_DOUBLE_EQ(support(Q, Vector{1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(support(Q, Vector{0.0, 1.0}), 2.0);
  EXPECT_DOUBLE_EQ(support(Q, Vector{-1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(support(Q, Vector{-1.0, -1.0}), -1.0);
  EXPECT_DOUBLE_EQ(support_pos(Q, Vector{-1.0, -1.0}), 0.0);
}

TEST(SurfaceMeasure, ValidateRejectsCorruptAtoms) {
  SurfaceMeasure S(2, {{Vector{1.0, 0.0}, 1.0}, {Vector{-1.0, 0.0}, 1.0}});
  EXPECT_NO_THROW(S.validate());
  SurfaceMeasure bad(2, {{Vector{1.0, 1e-3}, 1.0}});
  EXPECT_THROW(bad.validate(), ValidationError);
  SurfaceMeasure neg(2, {{Vector{0.0, 1.0}, -0.5}});
  EXPECT_THROW(neg.validate(), ValidationError);
}

TEST(CosineTransform, UnitSquare) {
  SurfaceMeasure S(2, {{Vector{1.0, 0.0}, 1.0}, {Vector{-1.0, 0.0}, 1.0}, {Vector{0.0, 1.0}, 1.0}, {Vector{0.0, -1.0}, 1.0}});
  EXPECT_DOUBLE_EQ(cosine_transform(S, Vector{1.0, 0.0}), 2.0);
  EXPECT_NEAR(cosine_transform(S, normalized(Vector{1.0, 1.0})), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(ConvexHull2d, RemovesInteriorAndCollinearPoints) {
  std::vector<Vector> pts{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {0.5, 0.5}, {0.0, 0.5}};
  const auto h = convex_hull_2d(pts);
  ASSERT_EQ(h.size(), 4u);
  double area = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    area += a[0] * b[1] - a[1] * b[0];
  }
  EXPECT_NEAR(0.5 * area, 1.0, 1e-15);  // counter-clockwise
}

TEST(MeanWidth, PlanarClosedForms) {
  // b = perimeter / pi in the plane.
  EXPECT_NEAR(mean_width(StructuringElement{Vector{1.0, 0.0}}), 2.0 / kPi, 1e-15);
  EXPECT_NEAR(mean_width(StructuringElement{Vector{1.0, 0.0}, Vector{0.0, 1.0}, Vector{1.0, 1.0}}), 4.0 / kPi, 1e-15);
  EXPECT_NEAR(mean_width(StructuringElement{Vector{0.0, 0.0}}), 0.0, 1e-15);
  // Symmetric pair: segment of length 2.
  EXPECT_NEAR(mean_width(StructuringElement{Vector{1.0, 0.0}, Vector{-1.0, 0.0}}), 4.0 / kPi, 1e-15);
}

TEST(MeanWidth, SpatialClosedForms) {
  // Segment of length L in R^3: b = L / 2. Unit cube: b = 3 / 2.
  EXPECT_NEAR(mean_width(StructuringElement{Vector{0.0, 0.0, 2.0}}), 1.0, 2e-4);
  std::vector<Vector> cube;
  for (int i = 0; i < 8; ++i) cube.push_back(Vector{double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  EXPECT_NEAR(mean_width(StructuringElement(cube)), 1.5, 2e-4);
}

TEST(MeanWidth, QuadratureAgreesWithExactPlanarValue) {
  CounterRng rng(5, 0);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vector> pts;
    for (int i = 0; i < 5; ++i) pts.push_back(Vector{rng.uniform(-1, 1), rng.uniform(-1, 1)});
    StructuringElement Q(pts);
    EXPECT_NEAR(mean_width(Q, sphere_quadrature(2, 20000)), mean_width(Q), 1e-6);
  }
}

TEST(Circumradius, MatchesBruteForceInThePlane) {
  CounterRng rng(11, 0);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vector> pts;
    const int k = 1 + static_cast<int>(rng.uniform() * 7);
    for (int i = 0; i < k; ++i) pts.push_back(Vector{rng.uniform(-2, 2), rng.uniform(-2, 2)});
    StructuringElement Q(pts);
    auto with0 = pts;
    with0.push_back(Vector{0.0, 0.0});
    EXPECT_NEAR(circumradius(Q), brute_circumradius(with0), 1e-9);
  }
}

TEST(Circumradius, SimpleCases) {
  EXPECT_NEAR(circumradius(StructuringElement{Vector{1.0, 0.0}}), 0.5, 1e-15);
  EXPECT_NEAR(circumradius(StructuringElement{Vector{2.0, 0.0}, Vector{0.0, 2.0}}), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(circumradius(StructuringElement{Vector{1.0, 1.0, 1.0}}), std::sqrt(3.0) / 2.0, 1e-12);
  // The ball around the triangle e1 e2 e3 already contains the origin.
  EXPECT_NEAR(circumradius(StructuringElement{Vector{1.0, 0.0, 0.0}, Vector{0.0, 1.0, 0.0}, Vector{0.0, 0.0, 1.0}}),
              std::sqrt(2.0 / 3.0), 1e-12);
}

TEST(InradiusInSpan, LowerBoundsConvergeToTrueValue) {
  // Unit square conv{0, e1, e2, e1+e2}: inradius 1/2.
  StructuringElement sq{Vector{1.0, 0.0}, Vector{0.0, 1.0}, Vector{1.0, 1.0}};
  const double coarse = inradius_in_span(sq, sphere_quadrature(2, 16)).radius;
  const double fine = inradius_in_span(sq, sphere_quadrature(2, 1024)).radius;
  EXPECT_LE(coarse, 0.5 + 1e-12);
  EXPECT_LE(fine, 0.5 + 1e-12);
  EXPECT_GE(fine, coarse - 1e-12);
  EXPECT_GT(fine, 0.49);
  // Right isosceles triangle with unit legs: (a + b - c) / 2.
  StructuringElement tri{Vector{1.0, 0.0}, Vector{0.0, 1.0}};
  const double s = inradius_in_span(tri, sphere_quadrature(2, 1024)).radius;
  EXPECT_LE(s, (2.0 - std::sqrt(2.0)) / 2.0 + 1e-12);
  EXPECT_GT(s, (2.0 - std::sqrt(2.0)) / 2.0 - 0.01);
}

TEST(InradiusInSpan, SegmentUsesItsSpan) {
  const auto in = inradius_in_span(StructuringElement{Vector{1.0, 0.0}}, sphere_quadrature(2, 64));
  EXPECT_NEAR(in.radius, 0.5, 1e-9);
  EXPECT_NEAR(in.center[0], 0.5, 1e-9);
  EXPECT_NEAR(in.center[1], 0.0, 1e-12);
}

TEST(InradiusInSpan, NeverExceedsCircumradius) {
  CounterRng rng(13, 0);
  const auto dirs = sphere_quadrature(2, 256);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vector> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(Vector{rng.uniform(-1, 1), rng.uniform(-1, 1)});
    StructuringElement Q(pts);
    EXPECT_LE(inradius_in_span(Q, dirs).radius, circumradius(Q) + 1e-12);
    EXPECT_GE(circumradius(Q), Q.max_norm() / 2.0 - 1e-12);
  }
}

TEST(SimplexMaximize, SmallLinearProgram) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3.
  const auto sol = simplex_maximize({{1, 1}, {1, 3}, {1, 0}}, {4, 6, 3}, {3, 2});
  ASSERT_TRUE(sol.bounded);
  EXPECT_NEAR(sol.value, 11.0, 1e-12);
  EXPECT_NEAR(sol.x[0], 3.0, 1e-12);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-12);
}

TEST(Rotation, RandomRotationsAreOrthogonal) {
  for (int n : {2, 3}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      CounterRng rng(3, s);
      const auto R = random_rotation(n, rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double d = dot(R.apply(Vector::unit(n, i)), R.apply(Vector::unit(n, j)));
          EXPECT_NEAR(d, i == j ? 1.0 : 0.0, 1e-12);
        }
    }
  }
}

TEST(Rotation, HaarMeanOfRotatedVectorVanishes) {
  Vector mean(3);
  const int M = 20000;
  for (int k = 0; k < M; ++k) {
    CounterRng rng(9, static_cast<std::uint64_t>(k));
    mean += random_rotation(3, rng).apply(Vector{0.0, 0.0, 1.0});
  }
  mean = (1.0 / M) * mean;
  // Each coordinate has variance 1/3 per draw.
  for (int a = 0; a < 3; ++a) EXPECT_LT(std::abs(mean[a]), 4.0 * std::sqrt(1.0 / 3.0 / M));
}
