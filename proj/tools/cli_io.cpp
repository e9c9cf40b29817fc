#include "cli_io.hpp"

#include <corrkit/formats.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>

namespace corrkit::cli {

std::string format_of(const std::string& path, const std::string& hint)
{
    std::string ext = hint.empty() ? std::filesystem::path(path).extension().string() : hint;
    if (!ext.empty() && ext.front() == '.') {
        ext.erase(0, 1);
    }
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

DisplacementField load_flow(const std::string& path, const std::string& hint)
{
    const auto fmt = format_of(path, hint);
    if (fmt == "flo") return read_flo(read_file(path));
    if (fmt == "png") return read_kitti_flow(read_file(path));
    throw UsageError("unsupported flow format '" + fmt + "' for " + path + " (expected flo or png)");
}

void save_flow(const std::string& path, const DisplacementField& field, const std::string& hint)
{
    const auto fmt = format_of(path, hint);
    if (fmt == "flo") return write_file(path, write_flo(field));
    if (fmt == "png") return write_file(path, write_kitti_flow(field));
    throw UsageError("unsupported flow format '" + fmt + "' for " + path + " (expected flo or png)");
}

DisparityMap load_disparity(const std::string& path, const std::string& hint)
{
    const auto fmt = format_of(path, hint);
    if (fmt == "pfm") return read_pfm_disparity(read_file(path));
    if (fmt == "png") return read_kitti_disp(read_file(path));
    throw UsageError("unsupported disparity format '" + fmt + "' for " + path + " (expected pfm or png)");
}

void save_disparity(const std::string& path, const DisparityMap& disparity, const std::string& hint)
{
    const auto fmt = format_of(path, hint);
    if (fmt == "pfm") return write_file(path, write_pfm(disparity));
    if (fmt == "png") return write_file(path, write_kitti_disp(disparity));
    throw UsageError("unsupported disparity format '" + fmt + "' for " + path + " (expected pfm or png)");
}

DepthMap load_depth(const std::string& path, const std::string& hint)
{
    const auto fmt = format_of(path, hint);
    if (fmt == "pfm") return read_pfm_depth(read_file(path));
    throw UsageError("unsupported depth format '" + fmt + "' for " + path + " (expected pfm)");
}

void save_depth(const std::string& path, const DepthMap& depth, const std::string& hint)
{
    const auto fmt = format_of(path, hint);
    if (fmt == "pfm") return write_file(path, write_pfm(depth));
    throw UsageError("unsupported depth format '" + fmt + "' for " + path + " (expected pfm)");
}

namespace {

Image decode_pgm(const Bytes& b, const std::string& path)
{
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < b.size()) {
            if (b[pos] == '#') {
                while (pos < b.size() && b[pos] != '\n') ++pos;
            } else if (std::isspace(b[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto number = [&]() -> long {
        skip_space();
        long x = 0;
        const std::size_t start = pos;
        while (pos < b.size() && std::isdigit(b[pos]) && x < 1000000) {
            x = x * 10 + (b[pos++] - '0');
        }
        if (pos == start) throw FormatError(path + ": malformed PGM header", pos);
        return x;
    };
    if (b.size() < 2 || b[0] != 'P' || (b[1] != '5' && b[1] != '2')) {
        throw FormatError(path + ": not a PGM file", 0);
    }
    const bool binary = b[1] == '5';
    pos = 2;
    const long w = number(), h = number(), maxval = number();
    if (w < 1 || h < 1 || w > 32768 || h > 32768 || maxval < 1 || maxval > 65535) {
        throw FormatError(path + ": PGM dimensions or maxval out of range", pos);
    }
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> px(n);
    if (binary) {
        ++pos; // single whitespace after maxval
        const std::size_t bps = maxval > 255 ? 2 : 1;
        if (b.size() < pos || b.size() - pos < n * bps) throw FormatError(path + ": truncated PGM data", b.size());
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned v = bps == 2 ? (b[pos + 2 * i] << 8 | b[pos + 2 * i + 1]) : b[pos + i];
            px[i] = static_cast<double>(v) / maxval;
        }
    } else {
        for (auto& x : px) {
            x = static_cast<double>(number()) / maxval;
        }
    }
    return {static_cast<int>(w), static_cast<int>(h), std::move(px)};
}

} // namespace

Image load_image(const std::string& path)
{
    const Bytes bytes = read_file(path);
    const auto fmt = format_of(path);
    if (fmt == "pgm" || fmt == "pnm") {
        return decode_pgm(bytes, path);
    }
    if (fmt != "png") {
        throw UsageError("unsupported image format '" + fmt + "' for " + path + " (expected png or pgm)");
    }
    const PngImage png = decode_png(bytes);
    const double maxval = png.bit_depth == 16 ? 65535.0 : 255.0;
    std::vector<double> px(png.samples.size());
    std::transform(png.samples.begin(), png.samples.end(), px.begin(), [&](std::uint16_t s) { return s / maxval; });
    if (png.channels == 3) {
        return grayscale_from_rgb(png.width, png.height, px);
    }
    return {png.width, png.height, std::move(px)};
}

void save_pgm(const std::string& path, const Image& image)
{
    const std::string header =
        "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    Bytes out(header.begin(), header.end());
    for (double x : image.pixels()) {
        out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)));
    }
    write_file(path, out);
}

std::pair<CameraModel, CameraModel> load_camera_pair(const std::string& path)
{
    auto cams = read_cameras(read_text_file(path));
    if (cams.size() != 2) {
        throw UsageError(path + ": expected 2 cameras (reference, target), found " + std::to_string(cams.size()));
    }
    return {cams[0], cams[1]};
}

} // namespace corrkit::cli
