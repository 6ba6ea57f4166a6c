#ifndef ORTHOVIEW_ORTHO_HPP
#define ORTHOVIEW_ORTHO_HPP

#include <array>
#include <string>
#include <vector>

#include "orthoview/cloud_io.hpp"

namespace orthoview {

enum class View { front, top, right };

const char* view_name(View view);

/// Fixed-resolution orthographic depth raster of a canonicalized cloud.
/// Cell values live in [0,1]: 0 means empty, occupied cells carry
/// 1 - depth_of_nearest_point clamped to at least 1e-6 ("near is bright").
/// Row 0 is the top of the image (vertical coordinate +1).
struct ViewGrid {
    View view = View::front;
    int width = 0;  // columns
    int height = 0; // rows
    std::vector<double> values; // row-major

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
    double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
};

/// Axis layout of a view over canonical coordinates:
///   front: horizontal Y, vertical Z, depth X
///   top:   horizontal X, vertical Y, depth Z
///   right: horizontal X, vertical Z, depth Y
/// Depth is remapped from [-1,1] to [0,1]; the -1 end is nearest.
struct ViewAxes {
    int horizontal;
    int vertical;
    int depth;
};
ViewAxes view_axes(View view);

/// Cell index mapping over [-1,1], half-open cells closed at the +1 edge.
int cell_from_horizontal(double h, int width);
int cell_from_vertical(double v, int height);

/// Rasterizes one view of a canonicalized cloud (coordinates in [-1,1]).
/// Requires width, height >= 4.
ViewGrid project(const PointCloud& canonical, View view, int width, int height);

/// front, top, right in that fixed order, same resolution.
std::array<ViewGrid, 3> project_all(const PointCloud& canonical, int width, int height);

/// Row-major CSV, one grid row per line.
std::string grid_to_csv(const ViewGrid& grid);

/// 8-bit ASCII PGM (P2), cell value * 255 rounded.
std::string grid_to_pgm(const ViewGrid& grid);

} // namespace orthoview

#endif
