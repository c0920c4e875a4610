#pragma once

#include <stdexcept>
#include <string>

namespace monostereo {

/// Raster/volume dimensions of two arguments disagree.
struct SizeMismatch : std::runtime_error {
    explicit SizeMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Feature dimensions of two feature maps disagree.
struct FeatureDimMismatch : std::runtime_error {
    explicit FeatureDimMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// A renderer was handed an empty scene.
struct SceneEmpty : std::runtime_error {
    explicit SceneEmpty(const std::string& what) : std::runtime_error(what) {}
};

/// A space-time matcher was handed a sequence with no frames.
struct EmptySequence : std::runtime_error {
    explicit EmptySequence(const std::string& what) : std::runtime_error(what) {}
};

/// Ground truth has no valid pixel to evaluate against.
struct EmptyGroundTruth : std::runtime_error {
    explicit EmptyGroundTruth(const std::string& what) : std::runtime_error(what) {}
};

/// A file header could not be parsed.
struct MalformedHeader : std::runtime_error {
    explicit MalformedHeader(const std::string& what) : std::runtime_error(what) {}
};

/// A file payload ended before the header-declared size.
struct TruncatedPayload : std::runtime_error {
    explicit TruncatedPayload(const std::string& what) : std::runtime_error(what) {}
};

/// A guidance file required by the pipeline is absent.
struct GuideMissing : std::runtime_error {
    explicit GuideMissing(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration or calibration failed validation.
struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

} // namespace monostereo
