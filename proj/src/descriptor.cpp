#include "orthoview/descriptor.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace orthoview {

std::string FeatureConfig::descriptor_id() const {
    return "block-grad:r" + std::to_string(resolution_w) + "x" +
           std::to_string(resolution_h) + ":b" + std::to_string(blocks);
}

void FeatureConfig::validate() const {
    if (resolution_w < 4 || resolution_h < 4) {
        throw BadResolution("feature config: resolution must be >= 4x4");
    }
    if (blocks < 1 || resolution_w % blocks != 0 || resolution_h % blocks != 0) {
        throw BadConfig("feature config: blocks must divide both resolution axes");
    }
}

namespace {

constexpr int kOrientationBins = 8;
constexpr int kBlockFeatureLen = 2 + kOrientationBins;

int orientation_bin(double gx, double gy) {
    const double theta = std::atan2(gy, gx); // (-pi, pi]
    const int bin = static_cast<int>(std::floor((theta + M_PI) / (2.0 * M_PI) * kOrientationBins));
    return std::clamp(bin, 0, kOrientationBins - 1);
}

} // namespace

ViewFeature describe_view(const ViewGrid& grid, int blocks) {
    const int w = grid.width;
    const int h = grid.height;
    if (blocks < 1 || w % blocks != 0 || h % blocks != 0) {
        throw BadConfig("describe_view: blocks must divide the grid resolution");
    }
    const int bw = w / blocks; // cells per block, horizontal
    const int bh = h / blocks;
    const double cells_per_block = static_cast<double>(bw) * bh;

    ViewFeature feature;
    feature.descriptor_id = "block-grad:r" + std::to_string(w) + "x" + std::to_string(h) +
                            ":b" + std::to_string(blocks);
    feature.values.assign(static_cast<std::size_t>(blocks) * blocks * kBlockFeatureLen, 0.0);

    // One row-major pass; every cell lands in exactly one block accumulator.
    for (int r = 0; r < h; ++r) {
        const int br = r / bh;
        for (int c = 0; c < w; ++c) {
            const int bc = c / bw;
            double* block = feature.values.data() +
                            static_cast<std::size_t>(br * blocks + bc) * kBlockFeatureLen;
            const double v = grid.at(r, c);
            block[0] += v;
            if (v > 0.0) block[1] += 1.0;
            const double gx = (c > 0 && c < w - 1) ? 0.5 * (grid.at(r, c + 1) - grid.at(r, c - 1)) : 0.0;
            const double gy = (r > 0 && r < h - 1) ? 0.5 * (grid.at(r + 1, c) - grid.at(r - 1, c)) : 0.0;
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag > 0.0) block[2 + orientation_bin(gx, gy)] += mag;
        }
    }
    for (int b = 0; b < blocks * blocks; ++b) {
        double* block = feature.values.data() + static_cast<std::size_t>(b) * kBlockFeatureLen;
        block[0] /= cells_per_block;
        block[1] /= cells_per_block;
    }
    return feature;
}

ViewFeature load_external_view_feature(const std::filesystem::path& path,
                                       std::size_t expected_dim) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open feature file '" + path.string() + "'");
    ViewFeature feature;
    feature.descriptor_id = "external:" + path.stem().string();
    std::string token;
    while (in >> token) {
        // Commas are separators, not part of the number.
        std::erase(token, ',');
        if (token.empty()) continue;
        double v = 0.0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
            throw NonFiniteValue("feature file '" + path.string() + "': bad value '" + token + "'");
        }
        if (!std::isfinite(v)) {
            throw NonFiniteValue("feature file '" + path.string() + "': non-finite value");
        }
        feature.values.push_back(v);
    }
    if (feature.values.size() != expected_dim) {
        throw DimensionMismatch("feature file '" + path.string() + "' has " +
                                std::to_string(feature.values.size()) + " values, expected " +
                                std::to_string(expected_dim));
    }
    return feature;
}

std::vector<double> elementwise_max(const std::vector<double>& a,
                                    const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("elementwise_max: dimensions differ");
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
    return out;
}

GlobalFeature pool_max(const ViewFeature& front, const ViewFeature& top,
                       const ViewFeature& right) {
    if (front.dim() != top.dim() || front.dim() != right.dim() || front.dim() == 0) {
        throw DimensionMismatch("pool_max: view feature dimensions differ");
    }
    const bool all_external = front.descriptor_id.starts_with("external:") &&
                              top.descriptor_id.starts_with("external:") &&
                              right.descriptor_id.starts_with("external:");
    std::string id;
    if (front.descriptor_id == top.descriptor_id && front.descriptor_id == right.descriptor_id) {
        id = front.descriptor_id;
    } else if (all_external) {
        // Per-view external files carry their own basenames; the pooled object
        // feature is identified by the extractor family and dimension only.
        id = "external:d" + std::to_string(front.dim());
    } else {
        throw DimensionMismatch("pool_max: view features come from different descriptors");
    }

    GlobalFeature out;
    out.descriptor_id = std::move(id);
    out.values = elementwise_max(elementwise_max(front.values, top.values), right.values);

    double sq = 0.0;
    for (double v : out.values) sq += v * v;
    if (sq <= 0.0) throw ZeroVector("pool_max: all view features are zero");
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : out.values) v *= inv;
    return out;
}

PipelineResult run_pipeline(const PointCloud& cloud, const FeatureConfig& config) {
    config.validate();
    PipelineResult result;
    result.frame = compute_reference_frame(cloud);
    if (frame_is_isotropic(result.frame)) {
        throw DegenerateCloud(
            "degenerate reference frame: eigenvalue spectrum is isotropic (symmetric object)");
    }
    auto canonical = canonicalize_with_scale(cloud, result.frame);
    result.scale = canonical.scale;
    result.canonical = std::move(canonical.cloud);
    result.grids = project_all(result.canonical, config.resolution_w, config.resolution_h);
    const ViewFeature f = describe_view(result.grids[0], config.blocks);
    const ViewFeature t = describe_view(result.grids[1], config.blocks);
    const ViewFeature r = describe_view(result.grids[2], config.blocks);
    result.feature = pool_max(f, t, r);
    return result;
}

GlobalFeature global_feature(const PointCloud& cloud, const FeatureConfig& config) {
    return run_pipeline(cloud, config).feature;
}

std::string feature_to_text(const std::vector<double>& values) {
    std::string out;
    out.reserve(values.size() * 20);
    std::array<char, 32> buf{};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out.push_back(' ');
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), values[i]);
        out.append(buf.data(), res.ptr);
    }
    out.push_back('\n');
    return out;
}

} // namespace orthoview
