#pragma once

// On-disk annotation formats. Every reader takes a byte (or text) buffer and
// either returns a value or throws FormatError/ParseError; none of them reads
// past the end of the buffer.

#include <corrkit/core.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corrkit {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// ---------------------------------------------------------------------------
// Middlebury .flo: "PIEH" (float 202021.25), int32 width, int32 height, then
// interleaved (u, v) float32 rows top to bottom, all little-endian.

inline constexpr float kFloMagic = 202021.25f;
/// Components with magnitude above this (or NaN) are unknown flow.
inline constexpr double kFloUnknownThreshold = 1e9;

DisplacementField read_flo(ByteView bytes);
/// Invalid pixels are written as NaN in both components.
Bytes write_flo(const DisplacementField& field);

// ---------------------------------------------------------------------------
// PFM: "Pf" (1 channel) or "PF" (3 channels), "width height", scale whose
// sign gives endianness (negative = little-endian), float32 rows bottom to top.

/// Raw PFM raster with rows stored top-down and samples interleaved.
struct PfmImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    float scale = 1.0f; // magnitude only; endianness is a write option
    std::vector<float> data;
};

PfmImage decode_pfm(ByteView bytes);
Bytes encode_pfm(const PfmImage& image, bool little_endian = true);

/// +inf, NaN and negative values decode to invalid pixels.
DisparityMap read_pfm_disparity(ByteView bytes);
/// Invalid pixels are written as +inf.
Bytes write_pfm(const DisparityMap& disparity);

/// +inf, NaN and non-positive values decode to invalid pixels.
DepthMap read_pfm_depth(ByteView bytes);
Bytes write_pfm(const DepthMap& depth);

/// 1- or 3-channel feature grids.
FeatureMap read_pfm_features(ByteView bytes);
Bytes write_pfm(const FeatureMap& features);

// ---------------------------------------------------------------------------
// PNG rasters (8- or 16-bit gray or RGB). Palette and sub-byte gray are
// expanded to 8 bits; alpha is dropped on read.

struct PngImage {
    int width = 0;
    int height = 0;
    int channels = 1;   // 1 = gray, 3 = RGB
    int bit_depth = 8;  // 8 or 16
    std::vector<std::uint16_t> samples; // interleaved, row-major
};

PngImage decode_png(ByteView bytes);
Bytes encode_png(const PngImage& image);

// KITTI 16-bit PNG annotations.
//   disparity: 1 channel, value = round(d * 256), 0 = invalid
//   flow:      3 channels, (round(u * 64) + 2^15, round(v * 64) + 2^15, valid)

DisparityMap read_kitti_disp(ByteView png16);
/// Throws ArgumentError for disparities that do not fit the 16-bit encoding.
Bytes write_kitti_disp(const DisparityMap& disparity);
DisplacementField read_kitti_flow(ByteView png16x3);
/// Throws ArgumentError for |component| >= 512 px.
Bytes write_kitti_flow(const DisplacementField& field);

// Raw-sample layer used by the KITTI codecs.
PngImage encode_kitti_disp_samples(const DisparityMap& disparity);
DisparityMap decode_kitti_disp_samples(const PngImage& image);
PngImage encode_kitti_flow_samples(const DisplacementField& field);
DisplacementField decode_kitti_flow_samples(const PngImage& image);

// ---------------------------------------------------------------------------
// Camera text format: one record per non-empty, non-comment ('#') line with 17
// numbers: fx fy cx cy skew, R row-major (9), T (3).

/// Rotations within 1e-6 of orthonormal are accepted (and re-projected onto
/// SO(3) when they miss the 1e-9 CameraModel tolerance); worse is a ParseError.
std::vector<CameraModel> read_cameras(std::string_view text);
std::string write_cameras(std::span<const CameraModel> cameras);

inline constexpr double kCameraFileRotationTolerance = 1e-6;

// ---------------------------------------------------------------------------
// File helpers.

Bytes read_file(const std::string& path);
void write_file(const std::string& path, ByteView bytes);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

} // namespace corrkit
