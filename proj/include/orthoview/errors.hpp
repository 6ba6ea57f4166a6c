#ifndef ORTHOVIEW_ERRORS_HPP
#define ORTHOVIEW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace orthoview {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// cloud_io
struct MalformedHeader : Error { using Error::Error; };
struct CountMismatch : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };
struct EmptyCloud : Error { using Error::Error; };
struct InvalidDimension : Error { using Error::Error; };
struct InvalidTransform : Error { using Error::Error; };

// frame
struct DegenerateCloud : Error { using Error::Error; };

// ortho
struct BadResolution : Error { using Error::Error; };

// descriptor
struct BadConfig : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };

// memory
struct UnknownLabel : Error { using Error::Error; };

// protocol
struct DatasetTooSmall : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct NoPredictions : Error { using Error::Error; };
struct NoWindows : Error { using Error::Error; };

// grasp
struct EmptyStore : Error { using Error::Error; };
struct PoseOutsideObject : Error { using Error::Error; };

} // namespace orthoview

#endif
