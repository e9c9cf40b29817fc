#include <corrkit/formats.hpp>

#include "byte_io.hpp"

#include <cmath>
#include <limits>

namespace corrkit {

namespace {

bool unknown_component(float x)
{
    return std::isnan(x) || std::abs(static_cast<double>(x)) > kFloUnknownThreshold;
}

} // namespace

DisplacementField read_flo(ByteView bytes)
{
    detail::ByteReader in(bytes);
    in.require(4, ".flo magic");
    const float magic = in.f32(true, ".flo magic");
    if (magic != kFloMagic) {
        throw FormatError(".flo: bad magic", 0);
    }
    const std::int32_t width = in.i32le(".flo width");
    const std::int32_t height = in.i32le(".flo height");
    if (width < 1 || height < 1) {
        throw FormatError(".flo: non-positive dimensions", 4);
    }
    const auto count = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
    if (count > std::numeric_limits<int>::max() / 8 || count * 8 > in.remaining()) {
        throw FormatError(".flo: payload shorter than " + std::to_string(width) + "x" + std::to_string(height)
                              + " flow",
                          in.pos());
    }

    const auto n = static_cast<std::size_t>(count);
    std::vector<double> du(n), dv(n);
    Mask valid(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float u = in.f32(true, ".flo payload");
        const float v = in.f32(true, ".flo payload");
        valid[i] = !(unknown_component(u) || unknown_component(v));
        du[i] = u;
        dv[i] = v;
    }
    return {width, height, std::move(du), std::move(dv), std::move(valid)};
}

Bytes write_flo(const DisplacementField& field)
{
    Bytes out;
    out.reserve(12 + 8 * field.size());
    detail::put_f32(out, kFloMagic, true);
    detail::put_u32(out, static_cast<std::uint32_t>(field.width()), true);
    detail::put_u32(out, static_cast<std::uint32_t>(field.height()), true);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    for (std::size_t i = 0; i < field.size(); ++i) {
        const bool ok = field.valid_at(i);
        detail::put_f32(out, ok ? static_cast<float>(field.du_values()[i]) : nan, true);
        detail::put_f32(out, ok ? static_cast<float>(field.dv_values()[i]) : nan, true);
    }
    return out;
}

} // namespace corrkit
