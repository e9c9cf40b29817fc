#pragma once

#include <corrkit/errors.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace corrkit::detail {

/// Bounds-checked little/big-endian cursor over a byte buffer.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t pos = 0) : bytes_(bytes), pos_(pos) {}

    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    void require(std::size_t n, const char* what) const
    {
        if (remaining() < n) {
            throw FormatError(std::string("truncated ") + what, pos_);
        }
    }

    std::uint32_t u32(bool little_endian, const char* what)
    {
        require(4, what);
        const auto* p = bytes_.data() + pos_;
        pos_ += 4;
        if (little_endian) {
            return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16
                   | std::uint32_t(p[3]) << 24;
        }
        return std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24;
    }

    std::int32_t i32le(const char* what) { return static_cast<std::int32_t>(u32(true, what)); }
    float f32(bool little_endian, const char* what) { return std::bit_cast<float>(u32(little_endian, what)); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
};

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t x, bool little_endian)
{
    if (little_endian) {
        out.insert(out.end(), {std::uint8_t(x), std::uint8_t(x >> 8), std::uint8_t(x >> 16), std::uint8_t(x >> 24)});
    } else {
        out.insert(out.end(), {std::uint8_t(x >> 24), std::uint8_t(x >> 16), std::uint8_t(x >> 8), std::uint8_t(x)});
    }
}

inline void put_f32(std::vector<std::uint8_t>& out, float x, bool little_endian)
{
    put_u32(out, std::bit_cast<std::uint32_t>(x), little_endian);
}

} // namespace corrkit::detail
