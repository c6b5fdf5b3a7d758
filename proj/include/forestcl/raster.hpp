#pragma once

#include <Eigen/Dense>
#include <string>

#include "forestcl/geometry.hpp"

namespace forestcl {

// Gridded real-valued spatial field on a rectangular window. Values are
// stored with row 0 = northernmost row (top), matching the ASCII grid
// file layout. Cells are square with side `cellsize` metres.
class RasterField {
 public:
  RasterField() = default;
  RasterField(const Window& w, int nrows, int ncols, double cellsize,
              Eigen::MatrixXd values, double nodata = -9999.0);

  // Constant raster covering `w` at the given resolution.
  static RasterField constant(const Window& w, double cellsize, double value);

  const Window& window() const { return window_; }
  int nrows() const { return static_cast<int>(values_.rows()); }
  int ncols() const { return static_cast<int>(values_.cols()); }
  double cellsize() const { return cellsize_; }
  double nodata() const { return nodata_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  // Center of cell (row, col), row 0 = north.
  Eigen::Vector2d cell_center(int row, int col) const;

  // Nearest-cell (piecewise constant) lookup. Cell boundaries follow the
  // floor rule: a location on a shared edge belongs to the cell with the
  // larger column / the more southern row index. Throws DataError for
  // locations outside the window or nodata cells.
  double lookup(const Eigen::Vector2d& u) const;

  // Cell indices for a location inside the window.
  void cell_of(const Eigen::Vector2d& u, int& row, int& col) const;

 private:
  Window window_{0, 1, 0, 1};
  double cellsize_ = 1.0;
  double nodata_ = -9999.0;
  Eigen::MatrixXd values_;
};

double lookup(const RasterField& field, const Eigen::Vector2d& u);

// ESRI-style ASCII grid I/O. Header: ncols, nrows, xllcorner, yllcorner,
// cellsize, NODATA_value; then rows of space-separated values, top row =
// north. Values are written with 17 significant digits so that
// write/read round-trips are bit-exact for doubles.
RasterField read_ascii_grid(const std::string& path);
void write_ascii_grid(const RasterField& field, const std::string& path);

}  // namespace forestcl
