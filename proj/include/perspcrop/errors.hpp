#pragma once

#include <stdexcept>
#include <string>

namespace perspcrop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input failed validation (bad intrinsics, malformed file, unknown option, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NonPositiveDepth : public Error {
public:
    explicit NonPositiveDepth(double z)
        : Error("point has non-positive depth z=" + std::to_string(z)) {}
};

class PointAtInfinity : public Error {
public:
    explicit PointAtInfinity(double w)
        : Error("homogeneous point at infinity (w=" + std::to_string(w) + ")") {}
};

class DegenerateBoundingBox : public Error {
public:
    DegenerateBoundingBox(double width, double height)
        : Error("degenerate keypoint bounding box " + std::to_string(width) + "x" +
                std::to_string(height)) {}
};

class RejectionExhausted : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

} // namespace perspcrop
