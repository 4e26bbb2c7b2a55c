#include "krig/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace krig {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) {
    // trim whitespace and CR
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  const auto header = split(line, spec.delimiter);
  auto col_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xc = col_of(spec.x_col), yc = col_of(spec.y_col),
                    zc = col_of(spec.z_col);

  Dataset ds;
  ds.metric = spec.metric;
  ds.name = path;
  std::vector<double> zs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, spec.delimiter);
    if (fields.size() < header.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    if (fields[xc].empty() || fields[yc].empty() || fields[zc].empty()) {
      ++ds.dropped_rows;
      continue;
    }
    try {
      const double x = std::stod(fields[xc]);
      const double y = std::stod(fields[yc]);
      const double z = std::stod(fields[zc]);
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        ++ds.dropped_rows;
        continue;
      }
      ds.points.push_back({x, y});
      zs.push_back(z);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed numeric field");
    }
  }
  ds.z = Eigen::Map<Eigen::VectorXd>(zs.data(),
                                     static_cast<Eigen::Index>(zs.size()));
  (void)ds.locations();  // validates coordinates / duplicates
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path,
              const CsvSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << spec.x_col << spec.delimiter << spec.y_col << spec.delimiter
      << spec.z_col << "\n";
  char buf[128];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g%c%.12g%c%.12g\n", ds.points[i].x,
                  spec.delimiter, ds.points[i].y, spec.delimiter,
                  ds.z(static_cast<Eigen::Index>(i)));
    out << buf;
  }
}

BoundingBox bounding_box(const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("bounding_box: no points");
  BoundingBox b{pts[0].x, pts[0].x, pts[0].y, pts[0].y};
  for (const auto& p : pts) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

std::vector<Point> make_grid(const BoundingBox& bbox, int nx, int ny,
                             bool hull_filter, const Dataset& ds) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("make_grid: resolution");
  std::vector<Point> grid;
  grid.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      grid.push_back({bbox.xmin + (bbox.xmax - bbox.xmin) * i / (nx - 1),
                      bbox.ymin + (bbox.ymax - bbox.ymin) * j / (ny - 1)});
  if (hull_filter) grid = convex_hull_filter(grid, ds.locations());
  if (grid.empty()) throw std::runtime_error("make_grid: empty grid");
  return grid;
}

}  // namespace krig
