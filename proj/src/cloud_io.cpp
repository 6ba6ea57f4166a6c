#include "orthoview/cloud_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "orthoview/detail/rng.hpp"

namespace orthoview {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_double(std::string_view tok, const char* what) {
    double value = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        // from_chars accepts "nan"/"inf" spellings; they reach the finite check below.
        throw MalformedHeader(std::string(what) + ": not a number: '" + std::string(tok) + "'");
    }
    return value;
}

long parse_count(std::string_view tok, const char* what) {
    long value = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || value < 0) {
        throw MalformedHeader(std::string(what) + ": bad count '" + std::string(tok) + "'");
    }
    return value;
}

void append_point(PointCloud& cloud, double x, double y, double z) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        throw NonFiniteValue("non-finite coordinate in point " +
                             std::to_string(cloud.points.size()));
    }
    cloud.points.emplace_back(x, y, z);
}

/// Consumes lines from `text`; '\r' is stripped so CRLF files parse too.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    bool next(std::string_view& line) {
        if (pos_ >= text_.size()) return false;
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        line = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return true;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

PointCloud parse_xyz(std::string_view text, std::string source_id) {
    PointCloud cloud;
    cloud.source_id = std::move(source_id);
    LineReader reader(text);
    std::string_view line;
    while (reader.next(line)) {
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0].front() == '#') continue;
        if (toks.size() != 3) {
            throw MalformedHeader("xyz: expected 3 values per line, got " +
                                  std::to_string(toks.size()));
        }
        append_point(cloud, parse_double(toks[0], "xyz"), parse_double(toks[1], "xyz"),
                     parse_double(toks[2], "xyz"));
    }
    return cloud;
}

PointCloud parse_pcd(std::string_view text, std::string source_id) {
    LineReader reader(text);
    std::string_view line;

    std::vector<std::string> fields;
    long width = -1, height = -1, points = -1;
    bool data_seen = false;

    while (reader.next(line)) {
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0].front() == '#') continue;
        const std::string key = lower(std::string(toks[0]));
        if (key == "version" || key == "viewpoint" || key == "size" || key == "type" ||
            key == "count") {
            continue; // coordinates are re-parsed as doubles regardless of declared width
        } else if (key == "fields") {
            fields.assign(toks.begin() + 1, toks.end());
        } else if (key == "width") {
            if (toks.size() != 2) throw MalformedHeader("pcd: WIDTH wants one value");
            width = parse_count(toks[1], "pcd WIDTH");
        } else if (key == "height") {
            if (toks.size() != 2) throw MalformedHeader("pcd: HEIGHT wants one value");
            height = parse_count(toks[1], "pcd HEIGHT");
        } else if (key == "points") {
            if (toks.size() != 2) throw MalformedHeader("pcd: POINTS wants one value");
            points = parse_count(toks[1], "pcd POINTS");
        } else if (key == "data") {
            if (toks.size() != 2 || lower(std::string(toks[1])) != "ascii") {
                throw MalformedHeader("pcd: only DATA ascii is supported");
            }
            data_seen = true;
            break;
        } else {
            throw MalformedHeader("pcd: unknown header key '" + key + "'");
        }
    }

    if (!data_seen) throw MalformedHeader("pcd: missing DATA ascii");
    if (fields.empty()) throw MalformedHeader("pcd: missing FIELDS");
    if (points < 0) {
        if (width < 0 || height < 0) throw MalformedHeader("pcd: missing POINTS");
        points = width * height;
    }
    if (width >= 0 && height >= 0 && width * height != points) {
        throw MalformedHeader("pcd: WIDTH*HEIGHT disagrees with POINTS");
    }

    int ix = -1, iy = -1, iz = -1;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string f = lower(fields[i]);
        if (f == "x") ix = static_cast<int>(i);
        if (f == "y") iy = static_cast<int>(i);
        if (f == "z") iz = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0) throw MalformedHeader("pcd: FIELDS must include x y z");

    PointCloud cloud;
    cloud.source_id = std::move(source_id);
    cloud.points.reserve(static_cast<std::size_t>(points));
    while (reader.next(line)) {
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0].front() == '#') continue;
        if (toks.size() != fields.size()) {
            throw MalformedHeader("pcd: row has " + std::to_string(toks.size()) +
                                  " values, FIELDS declares " + std::to_string(fields.size()));
        }
        append_point(cloud, parse_double(toks[ix], "pcd"), parse_double(toks[iy], "pcd"),
                     parse_double(toks[iz], "pcd"));
    }
    if (static_cast<long>(cloud.points.size()) != points) {
        throw CountMismatch("pcd: header declares " + std::to_string(points) + " points, file has " +
                            std::to_string(cloud.points.size()));
    }
    return cloud;
}

PointCloud parse_ply(std::string_view text, std::string source_id) {
    LineReader reader(text);
    std::string_view line;

    if (!reader.next(line) || split_ws(line) != std::vector<std::string_view>{"ply"}) {
        throw MalformedHeader("ply: missing 'ply' magic");
    }

    long vertex_count = -1;
    int ix = -1, iy = -1, iz = -1;
    int property_count = 0;
    bool in_vertex_element = false;
    bool format_seen = false;
    bool header_done = false;

    while (reader.next(line)) {
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0] == "comment") continue;
        if (toks[0] == "format") {
            if (toks.size() < 2 || toks[1] != "ascii") {
                throw MalformedHeader("ply: only 'format ascii' is supported");
            }
            format_seen = true;
        } else if (toks[0] == "element") {
            if (toks.size() != 3) throw MalformedHeader("ply: bad element line");
            in_vertex_element = (toks[1] == "vertex");
            if (in_vertex_element) vertex_count = parse_count(toks[2], "ply vertex");
        } else if (toks[0] == "property") {
            if (!in_vertex_element) continue;
            if (toks.size() >= 2 && toks[1] == "list") {
                throw MalformedHeader("ply: list properties in vertex element unsupported");
            }
            if (toks.size() != 3) throw MalformedHeader("ply: bad property line");
            const std::string name = lower(std::string(toks[2]));
            if (name == "x") ix = property_count;
            if (name == "y") iy = property_count;
            if (name == "z") iz = property_count;
            ++property_count;
        } else if (toks[0] == "end_header") {
            header_done = true;
            break;
        } else {
            throw MalformedHeader("ply: unknown header line '" + std::string(toks[0]) + "'");
        }
    }

    if (!header_done) throw MalformedHeader("ply: missing end_header");
    if (!format_seen) throw MalformedHeader("ply: missing format line");
    if (vertex_count < 0) throw MalformedHeader("ply: missing 'element vertex'");
    if (ix < 0 || iy < 0 || iz < 0) {
        throw MalformedHeader("ply: vertex element must have x y z properties");
    }

    PointCloud cloud;
    cloud.source_id = std::move(source_id);
    cloud.points.reserve(static_cast<std::size_t>(vertex_count));
    while (static_cast<long>(cloud.points.size()) < vertex_count && reader.next(line)) {
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (static_cast<int>(toks.size()) != property_count) {
            throw MalformedHeader("ply: vertex row has " + std::to_string(toks.size()) +
                                  " values, header declares " + std::to_string(property_count));
        }
        append_point(cloud, parse_double(toks[ix], "ply"), parse_double(toks[iy], "ply"),
                     parse_double(toks[iz], "ply"));
    }
    // Data after the vertex rows (faces etc.) is ignored.
    if (static_cast<long>(cloud.points.size()) != vertex_count) {
        throw CountMismatch("ply: header declares " + std::to_string(vertex_count) +
                            " vertices, file has " + std::to_string(cloud.points.size()));
    }
    return cloud;
}

void format_value(std::string& out, double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), res.ptr);
}

void format_row(std::string& out, const Eigen::Vector3d& p) {
    format_value(out, p.x());
    out.push_back(' ');
    format_value(out, p.y());
    out.push_back(' ');
    format_value(out, p.z());
    out.push_back('\n');
}

void require_writable(const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyCloud("write_cloud: empty cloud");
    for (const auto& p : cloud.points) {
        if (!p.allFinite()) throw NonFiniteValue("write_cloud: non-finite coordinate");
    }
}

} // namespace

void RigidScaleTransform::validate() const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
        throw InvalidTransform("rotation is not orthonormal");
    }
    if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
        throw InvalidTransform("rotation determinant is not +1");
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidTransform("scale must be a positive finite number");
    }
}

RigidScaleTransform RigidScaleTransform::compose(const RigidScaleTransform& inner) const {
    RigidScaleTransform out;
    out.rotation = rotation * inner.rotation;
    out.translation = scale * (rotation * inner.translation) + translation;
    out.scale = scale * inner.scale;
    return out;
}

CloudFormat format_from_extension(const std::filesystem::path& path) {
    const std::string ext = lower(path.extension().string());
    if (ext == ".pcd") return CloudFormat::pcd_ascii;
    if (ext == ".ply") return CloudFormat::ply_ascii;
    if (ext == ".xyz" || ext == ".txt") return CloudFormat::xyz;
    throw MalformedHeader("unrecognized cloud extension '" + ext + "'");
}

PointCloud parse_cloud(std::string_view text, CloudFormat format, std::string source_id) {
    switch (format) {
        case CloudFormat::pcd_ascii: return parse_pcd(text, std::move(source_id));
        case CloudFormat::ply_ascii: return parse_ply(text, std::move(source_id));
        case CloudFormat::xyz: return parse_xyz(text, std::move(source_id));
    }
    throw MalformedHeader("unknown cloud format");
}

std::string write_cloud(const PointCloud& cloud, CloudFormat format) {
    require_writable(cloud);
    const std::string n = std::to_string(cloud.points.size());
    std::string out;
    out.reserve(cloud.points.size() * 32 + 256);
    switch (format) {
        case CloudFormat::pcd_ascii:
            out += "VERSION 0.7\n";
            out += "FIELDS x y z\n";
            out += "SIZE 8 8 8\n";
            out += "TYPE F F F\n";
            out += "COUNT 1 1 1\n";
            out += "WIDTH " + n + "\n";
            out += "HEIGHT 1\n";
            out += "VIEWPOINT 0 0 0 1 0 0 0\n";
            out += "POINTS " + n + "\n";
            out += "DATA ascii\n";
            break;
        case CloudFormat::ply_ascii:
            out += "ply\n";
            out += "format ascii 1.0\n";
            out += "element vertex " + n + "\n";
            out += "property double x\n";
            out += "property double y\n";
            out += "property double z\n";
            out += "end_header\n";
            break;
        case CloudFormat::xyz:
            break;
    }
    for (const auto& p : cloud.points) format_row(out, p);
    return out;
}

PointCloud read_cloud_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream body;
    body << in.rdbuf();
    return parse_cloud(body.str(), format_from_extension(path), path.filename().string());
}

void write_cloud_file(const PointCloud& cloud, const std::filesystem::path& path) {
    const std::string body = write_cloud(cloud, format_from_extension(path));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << body;
}

namespace {

using detail::uniform01;

Eigen::Vector3d sample_box_surface(std::mt19937_64& rng, const Eigen::Vector3d& half) {
    // Pick a face pair with probability proportional to its area, then a
    // uniform point on that face at +/- the half extent.
    const double ax = half.y() * half.z();
    const double ay = half.x() * half.z();
    const double az = half.x() * half.y();
    const double pick = uniform01(rng) * (ax + ay + az);
    const double side = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    const double u = detail::uniform(rng, -1.0, 1.0);
    const double v = detail::uniform(rng, -1.0, 1.0);
    if (pick < ax) return {side * half.x(), u * half.y(), v * half.z()};
    if (pick < ax + ay) return {u * half.x(), side * half.y(), v * half.z()};
    return {u * half.x(), v * half.y(), side * half.z()};
}

Eigen::Vector3d sample_cylinder_surface(std::mt19937_64& rng, double radius, double height) {
    const double lateral = 2.0 * M_PI * radius * height;
    const double caps = 2.0 * M_PI * radius * radius;
    const double pick = uniform01(rng) * (lateral + caps);
    const double ang = detail::uniform(rng, 0.0, 2.0 * M_PI);
    if (pick < lateral) {
        const double z = detail::uniform(rng, -0.5 * height, 0.5 * height);
        return {radius * std::cos(ang), radius * std::sin(ang), z};
    }
    const double r = radius * std::sqrt(uniform01(rng));
    const double z = uniform01(rng) < 0.5 ? -0.5 * height : 0.5 * height;
    return {r * std::cos(ang), r * std::sin(ang), z};
}

Eigen::Vector3d sample_sphere_surface(std::mt19937_64& rng, double radius,
                                      detail::NormalSampler& normal) {
    Eigen::Vector3d dir(normal(rng), normal(rng), normal(rng));
    double n = dir.norm();
    while (n < 1e-12) {
        dir = {normal(rng), normal(rng), normal(rng)};
        n = dir.norm();
    }
    return radius / n * dir;
}

} // namespace

PointCloud generate_shape(const ShapeSpec& spec, std::size_t n_points, double noise_sigma,
                          std::uint64_t seed) {
    using Kind = ShapeSpec::Kind;
    if (n_points < 50) throw InvalidDimension("generate_shape: n_points must be >= 50");
    if (!(noise_sigma >= 0.0)) throw InvalidDimension("generate_shape: negative noise_sigma");

    const int dims_used = spec.kind == Kind::box ? 3 : (spec.kind == Kind::sphere ? 1 : 2);
    for (int i = 0; i < dims_used; ++i) {
        if (!(spec.dims[i] > 0.0)) {
            throw InvalidDimension("generate_shape: dimensions must be positive");
        }
    }

    std::mt19937_64 rng(seed);
    detail::NormalSampler normal;
    PointCloud cloud;
    cloud.points.reserve(n_points);

    switch (spec.kind) {
        case Kind::box: {
            const Eigen::Vector3d half = 0.5 * spec.dims;
            for (std::size_t i = 0; i < n_points; ++i) {
                cloud.points.push_back(sample_box_surface(rng, half));
            }
            break;
        }
        case Kind::cylinder: {
            for (std::size_t i = 0; i < n_points; ++i) {
                cloud.points.push_back(sample_cylinder_surface(rng, spec.dims[0], spec.dims[1]));
            }
            break;
        }
        case Kind::sphere: {
            for (std::size_t i = 0; i < n_points; ++i) {
                cloud.points.push_back(sample_sphere_surface(rng, spec.dims[0], normal));
            }
            break;
        }
        case Kind::lshape: {
            // Union of two box surfaces forming an L in the xy-plane, extruded
            // by `thickness` in z; recentred on the exact area-weighted centroid.
            const double arm = spec.dims[0];
            const double t = spec.dims[1];
            if (!(t < arm)) {
                throw InvalidDimension("generate_shape: lshape thickness must be < arm");
            }
            const Eigen::Vector3d ext1(arm, t, t);        // along +x
            const Eigen::Vector3d ext2(t, arm - t, t);    // upward continuation
            const Eigen::Vector3d c1(0.5 * arm, 0.5 * t, 0.5 * t);
            const Eigen::Vector3d c2(0.5 * t, t + 0.5 * (arm - t), 0.5 * t);
            auto area = [](const Eigen::Vector3d& e) {
                return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
            };
            const double a1 = area(ext1);
            const double a2 = area(ext2);
            const Eigen::Vector3d centroid = (a1 * c1 + a2 * c2) / (a1 + a2);
            for (std::size_t i = 0; i < n_points; ++i) {
                const bool first = uniform01(rng) * (a1 + a2) < a1;
                const Eigen::Vector3d& ext = first ? ext1 : ext2;
                const Eigen::Vector3d& c = first ? c1 : c2;
                cloud.points.push_back(c - centroid + sample_box_surface(rng, 0.5 * ext));
            }
            break;
        }
    }

    if (noise_sigma > 0.0) {
        for (auto& p : cloud.points) {
            p.x() += noise_sigma * normal(rng);
            p.y() += noise_sigma * normal(rng);
            p.z() += noise_sigma * normal(rng);
        }
    }
    return cloud;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidScaleTransform& t) {
    if (cloud.empty()) throw EmptyCloud("apply_transform: empty cloud");
    t.validate();
    PointCloud out;
    out.source_id = cloud.source_id;
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points) {
        out.points.push_back(t.scale * (t.rotation * p) + t.translation);
    }
    return out;
}

} // namespace orthoview
