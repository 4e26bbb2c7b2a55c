#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "krig/geometry.hpp"

using namespace krig;

namespace {

std::vector<Point> random_points(int n, unsigned seed, double lo = 0.0,
                                 double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

// independent oracle: sort index/distance pairs with std::sort
std::vector<int> brute_order(const LocationSet& locs, const Point& s0) {
  std::vector<std::pair<double, int>> d;
  for (std::size_t i = 0; i < locs.size(); ++i)
    d.push_back({locs.dist_to(i, s0), static_cast<int>(i)});
  std::sort(d.begin(), d.end());
  std::vector<int> out;
  for (auto& [dist, i] : d) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("euclidean distance basics") {
  CHECK(distance({0, 0}, {1, 0}, Metric::euclidean) == doctest::Approx(1.0));
  CHECK(distance({1, 2}, {4, 6}, Metric::euclidean) == doctest::Approx(5.0));
  CHECK(distance({3, -1}, {3, -1}, Metric::euclidean) == 0.0);
}

TEST_CASE("euclidean distance is a metric (random draws)") {
  auto pts = random_points(40, 11, -5.0, 5.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double dij = distance(pts[i], pts[j], Metric::euclidean);
      const double dji = distance(pts[j], pts[i], Metric::euclidean);
      CHECK(dij == doctest::Approx(dji).epsilon(1e-14));
      for (std::size_t k = 0; k < pts.size(); k += 7) {
        const double dik = distance(pts[i], pts[k], Metric::euclidean);
        const double dkj = distance(pts[k], pts[j], Metric::euclidean);
        CHECK(dij <= dik + dkj + 1e-12);
      }
    }
}

TEST_CASE("chordal distance on the unit sphere") {
  // same meridian: chord = 2 sin(delta/2) with delta the central angle
  const double d = distance({10, 0}, {10, 30}, Metric::chordal);
  CHECK(d == doctest::Approx(2.0 * std::sin(M_PI / 12.0)).epsilon(1e-12));
  // antipodal points give the maximum chord length 2
  CHECK(distance({0, 0}, {180, 0}, Metric::chordal) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // coincident
  CHECK(distance({45, -30}, {45, -30}, Metric::chordal) ==
        doctest::Approx(0.0));
  // small separations: chord ~ central angle in radians
  const double small = distance({0, 0}, {0.5, 0}, Metric::chordal);
  CHECK(small == doctest::Approx(0.5 * M_PI / 180.0).epsilon(1e-4));
}

TEST_CASE("chordal distance validates lon/lat ranges") {
  CHECK_THROWS(distance({0, 91}, {0, 0}, Metric::chordal));
  CHECK_THROWS(distance({0, 0}, {0, -90.5}, Metric::chordal));
  CHECK_THROWS(distance({-181, 0}, {0, 0}, Metric::chordal));
  CHECK_NOTHROW(distance({359.9, 89}, {-180, -89}, Metric::chordal));
}

TEST_CASE("LocationSet rejects duplicates and non-finite coordinates") {
  CHECK_THROWS(LocationSet({{0, 0}, {1, 1}, {0, 0}}, Metric::euclidean));
  CHECK_THROWS(LocationSet({{0, 0}, {std::nan(""), 1}}, Metric::euclidean));
  CHECK_NOTHROW(LocationSet({{0, 0}, {1e-6, 0}}, Metric::euclidean));
}

TEST_CASE("order_by_distance matches brute-force sort") {
  for (unsigned seed : {1u, 2u, 3u}) {
    LocationSet locs(random_points(200, seed), Metric::euclidean);
    const Point s0{0.3, 0.7};
    const auto ord = order_by_distance(locs, s0);
    const auto expected = brute_order(locs, s0);
    REQUIRE(ord.permutation.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK(ord.permutation[i] == expected[i]);
    CHECK(std::is_sorted(ord.distances.begin(), ord.distances.end()));
  }
}

TEST_CASE("order_by_distance breaks ties by original index") {
  // four points at equal distance from the origin
  LocationSet locs({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, Metric::euclidean);
  const auto ord = order_by_distance(locs, {0, 0});
  CHECK(ord.permutation == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("bucketed knn equals exhaustive knn") {
  for (int n : {50, 500, 3000}) {
    LocationSet locs(random_points(n, 42 + n), Metric::euclidean);
    const Point s0{0.5, 0.5};
    for (std::size_t k : {std::size_t{1}, std::size_t{10},
                          std::size_t(n) / 2, std::size_t(n)}) {
      const auto a = knn_exhaustive(locs, s0, k);
      const auto b = knn_bucketed(locs, s0, k);
      CHECK(a == b);
    }
  }
}

TEST_CASE("knn on chordal metric matches exhaustive") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ulon(-180, 180), ulat(-85, 85);
  std::vector<Point> pts;
  for (int i = 0; i < 800; ++i) pts.push_back({ulon(rng), ulat(rng)});
  LocationSet locs(pts, Metric::chordal);
  const Point s0{-100, -20};
  CHECK(knn_exhaustive(locs, s0, 25) == knn_bucketed(locs, s0, 25));
}

TEST_CASE("convex hull of a square with interior points") {
  std::vector<Point> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1},
                         {0.5, 0.5}, {0.2, 0.8}, {0.9, 0.1}};
  const auto h = convex_hull(pts);
  CHECK(h.size() == 4);
}

TEST_CASE("convex hull throws on degenerate input") {
  CHECK_THROWS(convex_hull({{0, 0}, {1, 1}, {2, 2}}));  // collinear
  CHECK_THROWS(convex_hull({{0, 0}, {1, 1}}));
}

TEST_CASE("hull filter keeps inside and boundary points") {
  LocationSet hull_pts({{0, 0}, {2, 0}, {2, 2}, {0, 2}}, Metric::euclidean);
  std::vector<Point> queries{{1, 1},      // inside
                             {0, 1},      // on an edge
                             {2, 2},      // vertex
                             {3, 1},      // outside
                             {-0.1, 1}};  // outside
  const auto kept = convex_hull_filter(queries, hull_pts);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].x == 1.0);
  CHECK(kept[1].x == 0.0);
  CHECK(kept[2].y == 2.0);
}

TEST_CASE("hull filter agrees with a dense winding check") {
  // oracle: a point is inside a convex polygon iff it is on the inner side
  // of every edge, checked directly here against the library filter
  LocationSet poly_pts(random_points(60, 99), Metric::euclidean);
  const auto h = convex_hull(poly_pts.points());
  auto queries = random_points(500, 100, -0.2, 1.2);
  const auto kept = convex_hull_filter(queries, poly_pts);
  std::vector<Point> expected;
  for (const auto& q : queries) {
    bool in = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto& a = h[i];
      const auto& b = h[(i + 1) % h.size()];
      const double cr = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
      if (cr < -1e-12) { in = false; break; }
    }
    if (in) expected.push_back(q);
  }
  REQUIRE(kept.size() == expected.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    CHECK(kept[i].x == expected[i].x);
    CHECK(kept[i].y == expected[i].y);
  }
}
