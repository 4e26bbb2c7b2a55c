#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "krig/geometry.hpp"

namespace krig {

struct Dataset {
  std::vector<Point> points;
  Metric metric = Metric::euclidean;
  Eigen::VectorXd z;
  std::string name;
  std::size_t dropped_rows = 0;  // rows discarded for missing values

  LocationSet locations() const { return LocationSet(points, metric); }
  std::size_t size() const { return points.size(); }
};

struct CsvSpec {
  std::string x_col = "x";
  std::string y_col = "y";
  std::string z_col = "z";
  char delimiter = ',';
  Metric metric = Metric::euclidean;
};

// Header-based CSV reader; malformed rows raise with their line number,
// rows with missing values in the declared columns are dropped and counted.
Dataset load_csv(const std::string& path, const CsvSpec& spec = {});

void save_csv(const Dataset& ds, const std::string& path,
              const CsvSpec& spec = {});

struct BoundingBox {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

BoundingBox bounding_box(const std::vector<Point>& pts);

// Regular nx-by-ny grid including the bbox edges; with hull_filter, points
// outside the convex hull of the dataset locations are removed.
std::vector<Point> make_grid(const BoundingBox& bbox, int nx, int ny,
                             bool hull_filter, const Dataset& ds);

}  // namespace krig
