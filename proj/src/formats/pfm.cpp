#include <corrkit/formats.hpp>

#include "byte_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace corrkit {

namespace {

bool is_space(std::uint8_t c)
{
    return c == ' ' || c == '\n' || c == '\r' || c == '\t';
}

// Header tokens are separated by arbitrary whitespace; the scale token is
// followed by exactly one whitespace byte before the raster.
class HeaderLexer {
public:
    explicit HeaderLexer(ByteView bytes) : bytes_(bytes) {}

    std::string_view token(const char* what)
    {
        while (pos_ < bytes_.size() && is_space(bytes_[pos_])) {
            ++pos_;
        }
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && pos_ - start < 64) {
            ++pos_;
        }
        if (pos_ == start) {
            throw FormatError(std::string("PFM: missing ") + what, start);
        }
        if (pos_ == bytes_.size()) {
            throw FormatError(std::string("PFM: truncated header after ") + what, pos_);
        }
        if (!is_space(bytes_[pos_])) {
            throw FormatError(std::string("PFM: oversized ") + what + " token", start);
        }
        return {reinterpret_cast<const char*>(bytes_.data()) + start, pos_ - start};
    }

    int integer(const char* what)
    {
        const std::size_t at = pos_;
        const auto tok = token(what);
        int value = 0;
        const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || end != tok.data() + tok.size()) {
            throw FormatError(std::string("PFM: non-numeric ") + what, at);
        }
        return value;
    }

    double real(const char* what)
    {
        const std::size_t at = pos_;
        const std::string tok(token(what));
        char* end = nullptr;
        const double value = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size() || !std::isfinite(value)) {
            throw FormatError(std::string("PFM: non-numeric ") + what, at);
        }
        return value;
    }

    /// Consumes the single separator byte after the last token.
    std::size_t payload_start() const { return pos_ + 1; }

private:
    ByteView bytes_;
    std::size_t pos_ = 0;
};

std::string format_scale(float scale, bool little_endian)
{
    char buf[64];
    const double s = little_endian ? -static_cast<double>(scale) : static_cast<double>(scale);
    std::snprintf(buf, sizeof buf, "%.1f", s);
    // Keep non-unit scales exact.
    if (std::strtod(buf, nullptr) != s) {
        std::snprintf(buf, sizeof buf, "%.9g", s);
    }
    return buf;
}

PfmImage single_channel(int width, int height, std::span<const double> values, std::span<const std::uint8_t> valid)
{
    PfmImage img;
    img.width = width;
    img.height = height;
    img.channels = 1;
    img.data.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        img.data[i] = valid[i] ? static_cast<float>(values[i]) : std::numeric_limits<float>::infinity();
    }
    return img;
}

PfmImage require_single(PfmImage img)
{
    if (img.channels != 1) {
        throw FormatError("PFM: expected a 1-channel (Pf) map", 0);
    }
    return img;
}

} // namespace

PfmImage decode_pfm(ByteView bytes)
{
    HeaderLexer lex(bytes);
    const auto magic = lex.token("magic");
    int channels = 0;
    if (magic == "Pf") {
        channels = 1;
    } else if (magic == "PF") {
        channels = 3;
    } else {
        throw FormatError("PFM: header must be Pf or PF", 0);
    }
    const int width = lex.integer("width");
    const int height = lex.integer("height");
    if (width < 1 || height < 1) {
        throw FormatError("PFM: non-positive dimensions", 0);
    }
    const double scale = lex.real("scale");
    if (scale == 0.0) {
        throw FormatError("PFM: zero scale", 0);
    }
    const bool little_endian = scale < 0.0;

    const auto count = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height) * channels;
    detail::ByteReader in(bytes, lex.payload_start());
    if (count > std::numeric_limits<int>::max() / 4 || count * 4 > in.remaining()) {
        throw FormatError("PFM: payload shorter than header dimensions", lex.payload_start());
    }

    PfmImage img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.scale = static_cast<float>(std::abs(scale));
    img.data.resize(static_cast<std::size_t>(count));
    const std::size_t row = static_cast<std::size_t>(width) * channels;
    for (int r = height - 1; r >= 0; --r) {
        float* dst = img.data.data() + static_cast<std::size_t>(r) * row;
        for (std::size_t k = 0; k < row; ++k) {
            dst[k] = in.f32(little_endian, "PFM payload");
        }
    }
    return img;
}

Bytes encode_pfm(const PfmImage& image, bool little_endian)
{
    if (image.channels != 1 && image.channels != 3) {
        throw ArgumentError("encode_pfm: channels must be 1 or 3");
    }
    if (image.width < 1 || image.height < 1
        || image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
        throw ArgumentError("encode_pfm: dimensions do not match data");
    }
    const std::string header = std::string(image.channels == 1 ? "Pf" : "PF") + "\n" + std::to_string(image.width)
                               + " " + std::to_string(image.height) + "\n"
                               + format_scale(image.scale, little_endian) + "\n";
    Bytes out(header.begin(), header.end());
    out.reserve(out.size() + image.data.size() * 4);
    const std::size_t row = static_cast<std::size_t>(image.width) * image.channels;
    for (int r = image.height - 1; r >= 0; --r) {
        const float* src = image.data.data() + static_cast<std::size_t>(r) * row;
        for (std::size_t k = 0; k < row; ++k) {
            detail::put_f32(out, src[k], little_endian);
        }
    }
    return out;
}

DisparityMap read_pfm_disparity(ByteView bytes)
{
    const PfmImage img = require_single(decode_pfm(bytes));
    std::vector<double> d(img.data.size());
    Mask valid(img.data.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = img.data[i];
        valid[i] = std::isfinite(img.data[i]) && img.data[i] >= 0.0f;
    }
    return {img.width, img.height, std::move(d), std::move(valid)};
}

Bytes write_pfm(const DisparityMap& disparity)
{
    return encode_pfm(single_channel(disparity.width(), disparity.height(), disparity.values(), disparity.mask()));
}

DepthMap read_pfm_depth(ByteView bytes)
{
    const PfmImage img = require_single(decode_pfm(bytes));
    std::vector<double> z(img.data.size());
    Mask valid(img.data.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = img.data[i];
        valid[i] = std::isfinite(img.data[i]) && img.data[i] > 0.0f;
    }
    return {img.width, img.height, std::move(z), std::move(valid), DepthVariant::Source};
}

Bytes write_pfm(const DepthMap& depth)
{
    return encode_pfm(single_channel(depth.width(), depth.height(), depth.values(), depth.mask()));
}

FeatureMap read_pfm_features(ByteView bytes)
{
    const PfmImage img = decode_pfm(bytes);
    std::vector<double> data(img.data.begin(), img.data.end());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw FormatError("PFM: non-finite feature value", 0);
        }
    }
    return {img.width, img.height, img.channels, std::move(data)};
}

Bytes write_pfm(const FeatureMap& features)
{
    PfmImage img;
    img.width = features.width();
    img.height = features.height();
    img.channels = features.channels();
    img.data.assign(features.data().begin(), features.data().end());
    return encode_pfm(img);
}

} // namespace corrkit
