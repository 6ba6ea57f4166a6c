#include "orthoview/frame.hpp"

#include <cmath>

namespace orthoview {

void ReferenceFrame::validate() const {
    const Eigen::Matrix3d gram = axes.transpose() * axes;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
        throw DegenerateCloud("reference frame axes are not orthonormal");
    }
    if (std::abs(axes.determinant() - 1.0) > 1e-9) {
        throw DegenerateCloud("reference frame is not right-handed");
    }
    if (!(eigenvalues[0] >= eigenvalues[1] && eigenvalues[1] >= eigenvalues[2] &&
          eigenvalues[2] >= 0.0)) {
        throw DegenerateCloud("reference frame eigenvalues not sorted descending");
    }
}

Eigen::Vector3d centroid(const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyCloud("centroid: empty cloud");
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& p : cloud.points) sum += p;
    return sum / static_cast<double>(cloud.points.size());
}

namespace {

/// Majority-of-projections sign rule. Returns -1 when the axis must flip.
double axis_sign(const PointCloud& cloud, const Eigen::Vector3d& origin,
                 const Eigen::Vector3d& axis) {
    long positive = 0, negative = 0;
    double cubed = 0.0;
    for (const auto& p : cloud.points) {
        const double proj = axis.dot(p - origin);
        if (proj > 0.0) ++positive;
        else if (proj < 0.0) ++negative;
        cubed += proj * proj * proj;
    }
    if (positive > negative) return 1.0;
    if (positive < negative) return -1.0;
    if (cubed > 0.0) return 1.0;
    if (cubed < 0.0) return -1.0;
    return 1.0; // exact zero: keep the eigendecomposition sign
}

} // namespace

ReferenceFrame compute_reference_frame(const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyCloud("compute_reference_frame: empty cloud");

    const Eigen::Vector3d mean = centroid(cloud);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : cloud.points) {
        const Eigen::Vector3d d = p - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(cloud.points.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw DegenerateCloud("compute_reference_frame: eigendecomposition failed");
    }

    // Eigen reports ascending order; reverse to descending for X, Y, Z.
    Eigen::Vector3d lambda;
    Eigen::Matrix3d vectors;
    for (int i = 0; i < 3; ++i) {
        lambda[i] = std::max(solver.eigenvalues()[2 - i], 0.0);
        vectors.col(i) = solver.eigenvectors().col(2 - i);
    }

    if (lambda[0] <= 0.0 || lambda[1] / lambda[0] < 1e-6) {
        throw DegenerateCloud("compute_reference_frame: cloud is effectively collinear");
    }

    ReferenceFrame frame;
    frame.origin = mean;
    frame.eigenvalues = lambda;
    frame.axes.col(0) = axis_sign(cloud, mean, vectors.col(0)) * vectors.col(0);
    frame.axes.col(1) = axis_sign(cloud, mean, vectors.col(1)) * vectors.col(1);
    frame.axes.col(2) = frame.axes.col(0).cross(frame.axes.col(1));
    frame.validate();
    return frame;
}

Canonicalized canonicalize_with_scale(const PointCloud& cloud, const ReferenceFrame& frame) {
    if (cloud.empty()) throw EmptyCloud("canonicalize: empty cloud");
    Canonicalized out;
    out.cloud.source_id = cloud.source_id;
    out.cloud.points.reserve(cloud.points.size());
    double max_abs = 0.0;
    for (const auto& p : cloud.points) {
        const Eigen::Vector3d q = frame.axes.transpose() * (p - frame.origin);
        max_abs = std::max(max_abs, q.cwiseAbs().maxCoeff());
        out.cloud.points.push_back(q);
    }
    if (max_abs > 0.0) {
        for (auto& q : out.cloud.points) q /= max_abs;
        out.scale = max_abs;
    }
    return out;
}

PointCloud canonicalize(const PointCloud& cloud, const ReferenceFrame& frame) {
    return canonicalize_with_scale(cloud, frame).cloud;
}

bool frame_is_isotropic(const ReferenceFrame& frame, double ratio) {
    const double l1 = frame.eigenvalues[0];
    const double l2 = frame.eigenvalues[1];
    const double l3 = frame.eigenvalues[2];
    if (l2 <= 0.0 || l3 <= 0.0) return false;
    return l1 / l2 < ratio && l2 / l3 < ratio;
}

} // namespace orthoview
