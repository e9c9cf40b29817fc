#pragma once

// Inspection rasters. Mappings are fixed so output bytes are stable.

#include <corrkit/core.hpp>
#include <corrkit/formats.hpp>

#include <span>

namespace corrkit {

/// Standard flow color wheel (hue = direction, saturation = magnitude over
/// max_radius). max_radius <= 0 picks the largest valid magnitude. Invalid
/// pixels are black.
PngImage flow_to_color(const DisplacementField& flow, double max_radius = 0.0);

/// 8-bit gray ramp of values clamped to [lo, hi]; non-finite values map to 0.
/// lo == hi selects the finite min/max of the data.
PngImage heatmap(int width, int height, std::span<const double> values, double lo = 0.0, double hi = 0.0);

PngImage confidence_to_png(const ConfidenceMap& confidence);

} // namespace corrkit
