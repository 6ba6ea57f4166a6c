#ifndef ORTHOVIEW_FRAME_HPP
#define ORTHOVIEW_FRAME_HPP

#include <Eigen/Dense>

#include "orthoview/cloud_io.hpp"

namespace orthoview {

/// Object reference frame: centroid origin plus right-handed orthonormal PCA
/// axes, eigenvalues sorted descending. Canonicalizing into this frame makes
/// downstream features pose-independent.
struct ReferenceFrame {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Matrix3d axes = Eigen::Matrix3d::Identity(); // columns are X, Y, Z
    Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero(); // descending, m^2

    /// Throws DegenerateCloud if the type invariants are violated.
    void validate() const;
};

/// Arithmetic mean of the points.
Eigen::Vector3d centroid(const PointCloud& cloud);

/// PCA of the centered covariance, eigenvectors sorted by descending
/// eigenvalue. Axis signs are disambiguated deterministically: X and Y are
/// flipped so that at least half of the points project positively (ties fall
/// back to the sign of the summed cubed projections; an exact zero keeps the
/// eigendecomposition sign). Z is then X x Y for right-handedness.
/// Throws DegenerateCloud for effectively collinear input (lambda2/lambda1 < 1e-6).
ReferenceFrame compute_reference_frame(const PointCloud& cloud);

/// Points mapped into the frame (axes^T * (p - origin)) and uniformly scaled
/// so the maximum absolute coordinate is 1.
PointCloud canonicalize(const PointCloud& cloud, const ReferenceFrame& frame);

/// canonicalize plus the scale factor that was divided out. Needed wherever a
/// pose has to travel between world and canonical coordinates.
struct Canonicalized {
    PointCloud cloud;
    double scale = 1.0; // max |axes^T (p - origin)| over the input
};
Canonicalized canonicalize_with_scale(const PointCloud& cloud, const ReferenceFrame& frame);

/// True when the eigenvalue spectrum is nearly isotropic (both gap ratios
/// below `ratio`), i.e. the frame carries no orientation information. Spheres
/// and near-cubes land here.
bool frame_is_isotropic(const ReferenceFrame& frame, double ratio = 1.05);

} // namespace orthoview

#endif
