#include "forestcl/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace forestcl {

RasterField::RasterField(const Window& w, int nrows, int ncols,
                         double cellsize, Eigen::MatrixXd values,
                         double nodata)
    : window_(w), cellsize_(cellsize), nodata_(nodata),
      values_(std::move(values)) {
  if (nrows <= 0 || ncols <= 0 || !(cellsize > 0))
    throw ConfigError("RasterField: invalid grid dimensions");
  if (values_.rows() != nrows || values_.cols() != ncols)
    throw ConfigError("RasterField: values shape mismatch");
  if (std::abs(ncols * cellsize - w.width()) > cellsize ||
      std::abs(nrows * cellsize - w.height()) > cellsize)
    throw ConfigError("RasterField: grid does not tile the window");
}

RasterField RasterField::constant(const Window& w, double cellsize,
                                  double value) {
  const int nc = std::max(1, static_cast<int>(std::lround(w.width() / cellsize)));
  const int nr = std::max(1, static_cast<int>(std::lround(w.height() / cellsize)));
  return RasterField(w, nr, nc, cellsize,
                     Eigen::MatrixXd::Constant(nr, nc, value));
}

Eigen::Vector2d RasterField::cell_center(int row, int col) const {
  return {window_.xmin + (col + 0.5) * cellsize_,
          window_.ymin + (nrows() - 1 - row + 0.5) * cellsize_};
}

void RasterField::cell_of(const Eigen::Vector2d& u, int& row, int& col) const {
  if (!window_.contains(u.x(), u.y()))
    throw DataError("raster lookup: location outside window");
  col = static_cast<int>(std::floor((u.x() - window_.xmin) / cellsize_));
  col = std::min(col, ncols() - 1);  // closed east edge
  int from_south = static_cast<int>(std::floor((u.y() - window_.ymin) / cellsize_));
  from_south = std::min(from_south, nrows() - 1);  // closed north edge
  row = nrows() - 1 - from_south;
}

double RasterField::lookup(const Eigen::Vector2d& u) const {
  int row, col;
  cell_of(u, row, col);
  const double v = values_(row, col);
  if (v == nodata_)
    throw DataError("raster lookup: nodata cell at (" +
                    std::to_string(u.x()) + ", " + std::to_string(u.y()) + ")");
  return v;
}

double lookup(const RasterField& field, const Eigen::Vector2d& u) {
  return field.lookup(u);
}

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

RasterField read_ascii_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open raster file: " + path);
  int ncols = -1, nrows = -1;
  double xll = 0, yll = 0, cellsize = 0, nodata = -9999.0;
  // Six header lines, order as written by write_ascii_grid but accepted
  // in any order.
  for (int i = 0; i < 6; ++i) {
    std::string key;
    if (!(in >> key)) throw DataError("raster header truncated: " + path);
    const std::string k = lower(key);
    if (k == "ncols") in >> ncols;
    else if (k == "nrows") in >> nrows;
    else if (k == "xllcorner") in >> xll;
    else if (k == "yllcorner") in >> yll;
    else if (k == "cellsize") in >> cellsize;
    else if (k == "nodata_value") in >> nodata;
    else throw DataError("unknown raster header key '" + key + "' in " + path);
  }
  if (ncols <= 0 || nrows <= 0 || !(cellsize > 0))
    throw DataError("invalid raster header in " + path);
  Eigen::MatrixXd vals(nrows, ncols);
  for (int r = 0; r < nrows; ++r)
    for (int c = 0; c < ncols; ++c)
      if (!(in >> vals(r, c)))
        throw DataError("raster values truncated in " + path);
  const Window w(xll, xll + ncols * cellsize, yll, yll + nrows * cellsize);
  return RasterField(w, nrows, ncols, cellsize, std::move(vals), nodata);
}

void write_ascii_grid(const RasterField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write raster file: " + path);
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "ncols " << field.ncols() << "\n";
  out << "nrows " << field.nrows() << "\n";
  out << "xllcorner " << fmt(field.window().xmin) << "\n";
  out << "yllcorner " << fmt(field.window().ymin) << "\n";
  out << "cellsize " << fmt(field.cellsize()) << "\n";
  out << "NODATA_value " << fmt(field.nodata()) << "\n";
  for (int r = 0; r < field.nrows(); ++r) {
    for (int c = 0; c < field.ncols(); ++c) {
      if (c) out << ' ';
      out << fmt(field.values()(r, c));
    }
    out << "\n";
  }
  if (!out) throw DataError("write failure for raster file: " + path);
}

}  // namespace forestcl
