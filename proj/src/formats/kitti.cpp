#include <corrkit/formats.hpp>

#include <cmath>

namespace corrkit {

namespace {

constexpr double kDispScale = 256.0;
constexpr double kFlowScale = 64.0;
constexpr int kFlowOffset = 1 << 15;

void require_layout(const PngImage& image, int channels, const char* what)
{
    if (image.bit_depth != 16) {
        throw FormatError(std::string(what) + ": expected a 16-bit PNG", 0);
    }
    if (image.channels != channels) {
        throw FormatError(std::string(what) + ": expected " + std::to_string(channels) + " channel(s), got "
                              + std::to_string(image.channels),
                          0);
    }
}

std::uint16_t encode_flow_component(double x)
{
    const long q = std::lround(x * kFlowScale) + kFlowOffset;
    if (q < 0 || q > 0xffff) {
        throw ArgumentError("write_kitti_flow: component " + std::to_string(x) + " outside the 16-bit range");
    }
    return static_cast<std::uint16_t>(q);
}

} // namespace

PngImage encode_kitti_disp_samples(const DisparityMap& disparity)
{
    PngImage img;
    img.width = disparity.width();
    img.height = disparity.height();
    img.channels = 1;
    img.bit_depth = 16;
    img.samples.assign(disparity.size(), 0);
    for (std::size_t i = 0; i < disparity.size(); ++i) {
        if (!disparity.valid_at(i)) {
            continue;
        }
        const long q = std::lround(disparity.values()[i] * kDispScale);
        if (q > 0xffff) {
            throw ArgumentError("write_kitti_disp: disparity " + std::to_string(disparity.values()[i])
                                + " outside the 16-bit range");
        }
        img.samples[i] = static_cast<std::uint16_t>(q);
    }
    return img;
}

DisparityMap decode_kitti_disp_samples(const PngImage& image)
{
    require_layout(image, 1, "KITTI disparity");
    std::vector<double> d(image.samples.size());
    Mask valid(image.samples.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        valid[i] = image.samples[i] != 0;
        d[i] = image.samples[i] / kDispScale;
    }
    return {image.width, image.height, std::move(d), std::move(valid)};
}

PngImage encode_kitti_flow_samples(const DisplacementField& field)
{
    PngImage img;
    img.width = field.width();
    img.height = field.height();
    img.channels = 3;
    img.bit_depth = 16;
    img.samples.assign(3 * field.size(), 0);
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (!field.valid_at(i)) {
            continue;
        }
        img.samples[3 * i] = encode_flow_component(field.du_values()[i]);
        img.samples[3 * i + 1] = encode_flow_component(field.dv_values()[i]);
        img.samples[3 * i + 2] = 1;
    }
    return img;
}

DisplacementField decode_kitti_flow_samples(const PngImage& image)
{
    require_layout(image, 3, "KITTI flow");
    const std::size_t n = image.samples.size() / 3;
    std::vector<double> du(n), dv(n);
    Mask valid(n);
    for (std::size_t i = 0; i < n; ++i) {
        valid[i] = image.samples[3 * i + 2] != 0;
        du[i] = (static_cast<int>(image.samples[3 * i]) - kFlowOffset) / kFlowScale;
        dv[i] = (static_cast<int>(image.samples[3 * i + 1]) - kFlowOffset) / kFlowScale;
    }
    return {image.width, image.height, std::move(du), std::move(dv), std::move(valid)};
}

DisparityMap read_kitti_disp(ByteView png16)
{
    return decode_kitti_disp_samples(decode_png(png16));
}

Bytes write_kitti_disp(const DisparityMap& disparity)
{
    return encode_png(encode_kitti_disp_samples(disparity));
}

DisplacementField read_kitti_flow(ByteView png16x3)
{
    return decode_kitti_flow_samples(decode_png(png16x3));
}

Bytes write_kitti_flow(const DisplacementField& field)
{
    return encode_png(encode_kitti_flow_samples(field));
}

} // namespace corrkit
