#include "orthoview/ortho.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

namespace orthoview {

const char* view_name(View view) {
    switch (view) {
        case View::front: return "front";
        case View::top: return "top";
        case View::right: return "right";
    }
    return "?";
}

ViewAxes view_axes(View view) {
    switch (view) {
        case View::front: return {1, 2, 0};
        case View::top: return {0, 1, 2};
        case View::right: return {0, 2, 1};
    }
    return {0, 1, 2};
}

int cell_from_horizontal(double h, int width) {
    const int c = static_cast<int>(std::floor((h + 1.0) * 0.5 * width));
    return std::clamp(c, 0, width - 1);
}

int cell_from_vertical(double v, int height) {
    const int r = static_cast<int>(std::floor((1.0 - v) * 0.5 * height));
    return std::clamp(r, 0, height - 1);
}

ViewGrid project(const PointCloud& canonical, View view, int width, int height) {
    if (canonical.empty()) throw EmptyCloud("project: empty cloud");
    if (width < 4 || height < 4) throw BadResolution("project: resolution must be >= 4x4");

    const ViewAxes ax = view_axes(view);
    ViewGrid grid;
    grid.view = view;
    grid.width = width;
    grid.height = height;
    grid.values.assign(static_cast<std::size_t>(width) * height, 0.0);

    // Track the minimum depth per cell; convert to brightness afterwards.
    std::vector<double> min_depth(grid.values.size(),
                                  std::numeric_limits<double>::infinity());
    for (const auto& p : canonical.points) {
        const int col = cell_from_horizontal(p[ax.horizontal], width);
        const int row = cell_from_vertical(p[ax.vertical], height);
        const double depth = (p[ax.depth] + 1.0) * 0.5;
        auto& cell = min_depth[static_cast<std::size_t>(row) * width + col];
        cell = std::min(cell, depth);
    }
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        if (std::isinf(min_depth[i])) continue;
        grid.values[i] = std::max(1.0 - min_depth[i], 1e-6);
    }
    return grid;
}

std::array<ViewGrid, 3> project_all(const PointCloud& canonical, int width, int height) {
    return {project(canonical, View::front, width, height),
            project(canonical, View::top, width, height),
            project(canonical, View::right, width, height)};
}

namespace {

void append_value(std::string& out, double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), res.ptr);
}

} // namespace

std::string grid_to_csv(const ViewGrid& grid) {
    std::string out;
    out.reserve(grid.values.size() * 8);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (c > 0) out.push_back(',');
            append_value(out, grid.at(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

std::string grid_to_pgm(const ViewGrid& grid) {
    std::string out = "P2\n" + std::to_string(grid.width) + " " +
                      std::to_string(grid.height) + "\n255\n";
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (c > 0) out.push_back(' ');
            out += std::to_string(std::lround(grid.at(r, c) * 255.0));
        }
        out.push_back('\n');
    }
    return out;
}

} // namespace orthoview
