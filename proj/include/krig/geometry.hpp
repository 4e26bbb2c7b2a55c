#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace krig {

struct Point {
  double x = 0.0;  // lon (degrees) in chordal mode
  double y = 0.0;  // lat (degrees) in chordal mode
};

enum class Metric { euclidean, chordal };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

// Straight-line distance for the euclidean metric; through-sphere chord on
// the unit sphere for lon/lat inputs (range [0,2], 2 iff antipodal).
double distance(const Point& a, const Point& b, Metric metric);

// Ordered spatial coordinates sharing one distance metric.
class LocationSet {
 public:
  LocationSet(std::vector<Point> pts, Metric metric);

  const std::vector<Point>& points() const { return pts_; }
  const Point& operator[](std::size_t i) const { return pts_[i]; }
  Metric metric() const { return metric_; }
  std::size_t size() const { return pts_.size(); }

  double dist(std::size_t i, std::size_t j) const {
    return distance(pts_[i], pts_[j], metric_);
  }
  double dist_to(std::size_t i, const Point& s0) const {
    return distance(pts_[i], s0, metric_);
  }

 private:
  std::vector<Point> pts_;
  Metric metric_;
};

struct NeighborOrdering {
  Point target;
  std::vector<int> permutation;   // indices sorted by increasing distance
  std::vector<double> distances;  // nondecreasing, aligned with permutation
};

// Stable ordering; equal distances break by original index.
NeighborOrdering order_by_distance(const LocationSet& locs, const Point& s0);

// First K entries of order_by_distance. Uses an exhaustive scan up to
// N = 10^4 and a grid-bucket index above; both routes give identical
// results including tie order.
std::vector<int> knn_candidates(const LocationSet& locs, const Point& s0,
                                std::size_t K);

// Exhaustive variant, exposed so the bucketed index can be tested against it.
std::vector<int> knn_exhaustive(const LocationSet& locs, const Point& s0,
                                std::size_t K);
std::vector<int> knn_bucketed(const LocationSet& locs, const Point& s0,
                              std::size_t K);

// Convex hull of planar points (counterclockwise, no repeated last vertex).
std::vector<Point> convex_hull(const std::vector<Point>& pts);

// Grid points strictly inside or on the hull of locs; boundary retained.
std::vector<Point> convex_hull_filter(const std::vector<Point>& grid,
                                      const LocationSet& locs);

}  // namespace krig
