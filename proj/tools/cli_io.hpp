#pragma once

// File-level helpers shared by the subcommands: extension-based format
// dispatch for fields, disparities, depths and images.

#include <corrkit/core.hpp>
#include <corrkit/errors.hpp>

#include <string>
#include <vector>

namespace corrkit::cli {

/// Bad command-line input; mapped to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Lower-case extension without the dot, or the explicit hint when non-empty.
std::string format_of(const std::string& path, const std::string& hint = {});

DisplacementField load_flow(const std::string& path, const std::string& hint = {});
void save_flow(const std::string& path, const DisplacementField& field, const std::string& hint = {});

DisparityMap load_disparity(const std::string& path, const std::string& hint = {});
void save_disparity(const std::string& path, const DisparityMap& disparity, const std::string& hint = {});

DepthMap load_depth(const std::string& path, const std::string& hint = {});
void save_depth(const std::string& path, const DepthMap& depth, const std::string& hint = {});

/// PNG (8/16-bit gray or RGB) or PGM (P2/P5); intensities scaled to [0, 1].
Image load_image(const std::string& path);
/// Binary PGM, 8-bit, values in [0, 1] clamped.
void save_pgm(const std::string& path, const Image& image);

/// Reference and target camera from a camera text file.
std::pair<CameraModel, CameraModel> load_camera_pair(const std::string& path);

} // namespace corrkit::cli
