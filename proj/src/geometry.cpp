#include "krig/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace krig {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::array<double, 3> to_unit_sphere(const Point& p) {
  if (!(p.y >= -90.0 && p.y <= 90.0))
    throw std::domain_error("latitude out of [-90, 90]: " + std::to_string(p.y));
  if (!(p.x >= -180.0 && p.x < 360.0))
    throw std::domain_error("longitude out of [-180, 360): " + std::to_string(p.x));
  const double lon = p.x * kDegToRad;
  const double lat = p.y * kDegToRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
          std::sin(lat)};
}

}  // namespace

std::string metric_name(Metric m) {
  return m == Metric::euclidean ? "euclidean" : "chordal";
}

Metric metric_from_name(const std::string& name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "chordal") return Metric::chordal;
  throw std::invalid_argument("unknown metric: " + name);
}

double distance(const Point& a, const Point& b, Metric metric) {
  if (metric == Metric::euclidean) {
    return std::hypot(a.x - b.x, a.y - b.y);
  }
  const auto u = to_unit_sphere(a);
  const auto v = to_unit_sphere(b);
  const double dx = u[0] - v[0], dy = u[1] - v[1], dz = u[2] - v[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

LocationSet::LocationSet(std::vector<Point> pts, Metric metric)
    : pts_(std::move(pts)), metric_(metric) {
  for (const auto& p : pts_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("non-finite coordinate in LocationSet");
    if (metric_ == Metric::chordal) (void)to_unit_sphere(p);  // range check
  }
  // Duplicate detection: sort index view by x then scan a sliding window.
  // Duplicates make the covariance matrix singular downstream.
  constexpr double tol = 1e-12;
  std::vector<std::size_t> idx(pts_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pts_[a].x < pts_[b].x;
  });
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (pts_[idx[j]].x - pts_[idx[i]].x > tol) break;
      if (std::abs(pts_[idx[j]].y - pts_[idx[i]].y) <= tol)
        throw std::invalid_argument("duplicate coordinates in LocationSet");
    }
  }
}

NeighborOrdering order_by_distance(const LocationSet& locs, const Point& s0) {
  const std::size_t n = locs.size();
  NeighborOrdering out;
  out.target = s0;
  out.permutation.resize(n);
  out.distances.resize(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = locs.dist_to(i, s0);
  std::iota(out.permutation.begin(), out.permutation.end(), 0);
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](int a, int b) { return d[a] < d[b]; });
  for (std::size_t i = 0; i < n; ++i)
    out.distances[i] = d[static_cast<std::size_t>(out.permutation[i])];
  return out;
}

std::vector<int> knn_exhaustive(const LocationSet& locs, const Point& s0,
                                std::size_t K) {
  if (K > locs.size()) throw std::invalid_argument("knn: K > N");
  const std::size_t n = locs.size();
  std::vector<std::pair<double, int>> d(n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = {locs.dist_to(i, s0), static_cast<int>(i)};
  std::partial_sort(d.begin(), d.begin() + static_cast<long>(K), d.end());
  std::vector<int> out(K);
  for (std::size_t i = 0; i < K; ++i) out[i] = d[i].second;
  return out;
}

namespace {

// Uniform-bucket index over either the plane or the embedded unit sphere.
// Ring expansion stops once the closest possible point of the next ring
// cannot beat the current K-th best.
template <int Dim>
std::vector<int> knn_grid(const LocationSet& locs, const Point& s0,
                          std::size_t K) {
  const std::size_t n = locs.size();
  std::vector<std::array<double, Dim>> coords(n);
  std::array<double, Dim> q{};
  if constexpr (Dim == 2) {
    for (std::size_t i = 0; i < n; ++i)
      coords[i] = {locs[i].x, locs[i].y};
    q = {s0.x, s0.y};
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double lon = locs[i].x * kDegToRad, lat = locs[i].y * kDegToRad;
      coords[i] = {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                   std::sin(lat)};
    }
    const double lon = s0.x * kDegToRad, lat = s0.y * kDegToRad;
    q = {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
         std::sin(lat)};
  }

  std::array<double, Dim> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::max());
  hi.fill(std::numeric_limits<double>::lowest());
  for (const auto& c : coords)
    for (int k = 0; k < Dim; ++k) {
      lo[k] = std::min(lo[k], c[k]);
      hi[k] = std::max(hi[k], c[k]);
    }
  double extent = 0.0;
  for (int k = 0; k < Dim; ++k) extent = std::max(extent, hi[k] - lo[k]);
  if (extent <= 0.0) return knn_exhaustive(locs, s0, K);

  const int cells_per_axis = std::max(
      1, static_cast<int>(std::floor(std::pow(static_cast<double>(n) / 2.0,
                                              1.0 / Dim))));
  const double cell = extent / cells_per_axis;

  auto cell_of = [&](const std::array<double, Dim>& c) {
    std::array<int, Dim> ix{};
    for (int k = 0; k < Dim; ++k)
      ix[k] = std::clamp(static_cast<int>((c[k] - lo[k]) / cell), 0,
                         cells_per_axis - 1);
    return ix;
  };
  auto flat = [&](const std::array<int, Dim>& ix) {
    long f = 0;
    for (int k = 0; k < Dim; ++k) f = f * cells_per_axis + ix[k];
    return f;
  };

  std::vector<std::vector<int>> buckets(
      static_cast<std::size_t>(std::pow(cells_per_axis, Dim)));
  for (std::size_t i = 0; i < n; ++i)
    buckets[static_cast<std::size_t>(flat(cell_of(coords[i])))].push_back(
        static_cast<int>(i));

  const auto qc = cell_of(q);
  using Entry = std::pair<double, int>;
  std::vector<Entry> best;  // max-heap on (dist, index)
  auto cmp = [](const Entry& a, const Entry& b) { return a < b; };

  auto visit_cell = [&](const std::array<int, Dim>& ix) {
    for (int k = 0; k < Dim; ++k)
      if (ix[k] < 0 || ix[k] >= cells_per_axis) return;
    for (int i : buckets[static_cast<std::size_t>(flat(ix))]) {
      double d2 = 0.0;
      for (int k = 0; k < Dim; ++k) {
        const double dd = coords[static_cast<std::size_t>(i)][k] - q[k];
        d2 += dd * dd;
      }
      const Entry e{std::sqrt(d2), i};
      if (best.size() < K) {
        best.push_back(e);
        std::push_heap(best.begin(), best.end(), cmp);
      } else if (e < best.front()) {
        std::pop_heap(best.begin(), best.end(), cmp);
        best.back() = e;
        std::push_heap(best.begin(), best.end(), cmp);
      }
    }
  };

  for (int ring = 0;; ++ring) {
    // Closest approach of ring r is (r-1) whole cells away.
    if (best.size() == K && ring > 0 &&
        (ring - 1) * cell > best.front().first)
      break;
    bool any_cell = false;
    std::array<int, Dim> ix{};
    // Enumerate the shell max|ix - qc| == ring.
    std::function<void(int)> rec = [&](int dim) {
      if (dim == Dim) {
        int cheb = 0;
        for (int k = 0; k < Dim; ++k)
          cheb = std::max(cheb, std::abs(ix[k] - qc[k]));
        if (cheb == ring) {
          any_cell = true;
          visit_cell(ix);
        }
        return;
      }
      for (int v = qc[dim] - ring; v <= qc[dim] + ring; ++v) {
        ix[dim] = v;
        rec(dim + 1);
      }
    };
    rec(0);
    if (!any_cell && ring > 2 * cells_per_axis) break;  // grid exhausted
  }

  std::sort(best.begin(), best.end());
  std::vector<int> out(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) out[i] = best[i].second;
  return out;
}

}  // namespace

std::vector<int> knn_bucketed(const LocationSet& locs, const Point& s0,
                              std::size_t K) {
  if (K > locs.size()) throw std::invalid_argument("knn: K > N");
  if (locs.metric() == Metric::euclidean)
    return knn_grid<2>(locs, s0, K);
  return knn_grid<3>(locs, s0, K);
}

std::vector<int> knn_candidates(const LocationSet& locs, const Point& s0,
                                std::size_t K) {
  if (K > locs.size()) throw std::invalid_argument("knn: K > N");
  if (locs.size() <= 10000) return knn_exhaustive(locs, s0, K);
  return knn_bucketed(locs, s0, K);
}

namespace {
double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}
}  // namespace

std::vector<Point> convex_hull(const std::vector<Point>& pts) {
  std::vector<Point> p = pts;
  std::sort(p.begin(), p.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  p.erase(std::unique(p.begin(), p.end(),
                      [](const Point& a, const Point& b) {
                        return a.x == b.x && a.y == b.y;
                      }),
          p.end());
  const std::size_t n = p.size();
  if (n < 3) throw std::invalid_argument("convex_hull: need >= 3 points");

  std::vector<Point> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper chain
    while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3)
    throw std::invalid_argument("convex_hull: all points collinear");
  return hull;
}

std::vector<Point> convex_hull_filter(const std::vector<Point>& grid,
                                      const LocationSet& locs) {
  if (locs.metric() != Metric::euclidean)
    throw std::invalid_argument("convex_hull_filter: planar metric required");
  const auto hull = convex_hull(locs.points());

  // Inside-or-on test against every hull edge, tolerance scaled to edge length.
  auto inside = [&](const Point& q) {
    const std::size_t m = hull.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point& a = hull[i];
      const Point& b = hull[(i + 1) % m];
      const double c = cross(a, b, q);
      const double scale = std::hypot(b.x - a.x, b.y - a.y);
      if (c < -1e-12 * std::max(1.0, scale)) return false;
    }
    return true;
  };

  std::vector<Point> kept;
  kept.reserve(grid.size());
  for (const auto& q : grid)
    if (inside(q)) kept.push_back(q);
  return kept;
}

}  // namespace krig
