#include <corrkit/formats.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

using namespace corrkit;

namespace {

// Random field whose values are exactly representable as float32.
DisplacementField float_field(int w, int h, std::mt19937_64& rng, double invalid = 0.1)
{
    auto f = oracle::random_field(w, h, rng, 300.0, invalid);
    std::vector<double> du(f.du_values().begin(), f.du_values().end());
    std::vector<double> dv(f.dv_values().begin(), f.dv_values().end());
    for (auto& x : du) x = static_cast<float>(x);
    for (auto& x : dv) x = static_cast<float>(x);
    return {w, h, du, dv, f.mask()};
}

bool same_bits(double a, double b)
{
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) || (std::isnan(a) && std::isnan(b));
}

Bytes bytes_of(std::string_view s)
{
    return Bytes(s.begin(), s.end());
}

void append_f32(Bytes& b, float x)
{
    std::uint8_t raw[4];
    std::memcpy(raw, &x, 4);
    b.insert(b.end(), raw, raw + 4); // host is little-endian
}

// ---- .flo -------------------------------------------------------------------

TEST(Flo, SinglePixelBytes)
{
    const auto f = make_displacement_field(1, 1, Displacement{1.5, -2.0});
    const Bytes expect{0x50, 0x49, 0x45, 0x48, 1, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0xC0, 0x3F, 0x00, 0x00, 0x00, 0xC0};
    EXPECT_EQ(write_flo(f), expect);
}

TEST(Flo, RoundTripRandom)
{
    std::mt19937_64 rng(1);
    const auto f = float_field(16, 8, rng);
    const auto g = read_flo(write_flo(f));
    ASSERT_EQ(g.width(), 16);
    ASSERT_EQ(g.height(), 8);
    EXPECT_EQ(g.mask(), f.mask());
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_TRUE(same_bits(f.du_values()[i], g.du_values()[i]));
        EXPECT_TRUE(same_bits(f.dv_values()[i], g.dv_values()[i]));
    }
}

TEST(Flo, BadMagic)
{
    auto b = write_flo(make_displacement_field(1, 1, Displacement{}));
    std::memcpy(b.data(), "XXXX", 4);
    EXPECT_THROW(read_flo(b), FormatError);
}

TEST(Flo, TruncatedPayloadReportsOffset)
{
    auto b = write_flo(make_displacement_field(2, 2, Displacement{}));
    b.resize(b.size() - 3);
    try {
        read_flo(b);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_GE(e.offset(), 12u);
    }
}

TEST(Flo, HugeDimensionsRejected)
{
    Bytes b = write_flo(make_displacement_field(1, 1, Displacement{}));
    b[4] = 0xff;
    b[5] = 0xff;
    b[6] = 0xff;
    b[7] = 0x7f;
    EXPECT_THROW(read_flo(b), FormatError);
}

TEST(Flo, UnknownThreshold)
{
    Bytes b = bytes_of("PIEH");
    b.insert(b.end(), {2, 0, 0, 0, 1, 0, 0, 0});
    append_f32(b, 2e9f);
    append_f32(b, 0.0f);
    append_f32(b, 1.0f);
    append_f32(b, 2.0f);
    const auto f = read_flo(b);
    EXPECT_FALSE(f.valid(0, 0));
    EXPECT_TRUE(f.valid(1, 0));
}

// ---- PFM --------------------------------------------------------------------

TEST(Pfm, HeaderGrammar)
{
    Bytes b = bytes_of("Pf\n2 1\n-1.0\n");
    append_f32(b, 3.0f);
    append_f32(b, 4.5f);
    const auto d = read_pfm_disparity(b);
    EXPECT_EQ(d.width(), 2);
    EXPECT_EQ(d.height(), 1);
    EXPECT_EQ(d.d(0, 0), 3.0);
    EXPECT_EQ(d.d(1, 0), 4.5);
}

TEST(Pfm, InfinityIsInvalid)
{
    Bytes b = bytes_of("Pf\n1 1\n-1.0\n");
    append_f32(b, std::numeric_limits<float>::infinity());
    EXPECT_FALSE(read_pfm_disparity(b).valid(0, 0));
}

TEST(Pfm, RowsAreBottomToTop)
{
    Bytes b = bytes_of("Pf\n1 2\n-1.0\n");
    append_f32(b, 1.0f); // bottom row
    append_f32(b, 2.0f);
    const auto d = read_pfm_disparity(b);
    EXPECT_EQ(d.d(0, 0), 2.0);
    EXPECT_EQ(d.d(0, 1), 1.0);
}

TEST(Pfm, BigEndianScale)
{
    Bytes b = bytes_of("Pf\n1 1\n1.0\n");
    const float x = 6.25f;
    std::uint8_t raw[4];
    std::memcpy(raw, &x, 4);
    b.insert(b.end(), {raw[3], raw[2], raw[1], raw[0]});
    EXPECT_EQ(read_pfm_disparity(b).d(0, 0), 6.25);
}

TEST(Pfm, RoundTripBitIdentical)
{
    std::mt19937_64 rng(2);
    const auto d = oracle::random_disparity(8, 8, rng, 64.0, 0.1);
    const Bytes once = write_pfm(d);
    const auto back = read_pfm_disparity(once);
    EXPECT_EQ(write_pfm(back), once);
    EXPECT_EQ(back.mask(), d.mask());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.valid_at(i)) EXPECT_EQ(back.values()[i], static_cast<float>(d.values()[i]));
    }
}

TEST(Pfm, MalformedHeaders)
{
    EXPECT_THROW(decode_pfm(bytes_of("PX\n1 1\n-1.0\n    ")), FormatError);
    EXPECT_THROW(decode_pfm(bytes_of("Pf\n1 1\nabc\n    ")), FormatError);
    EXPECT_THROW(decode_pfm(bytes_of("Pf\n0 1\n-1.0\n")), FormatError);
    EXPECT_THROW(decode_pfm(bytes_of("Pf\n2 2\n-1.0\n1234")), FormatError);
}

TEST(Pfm, ThreeChannelFeatures)
{
    std::mt19937_64 rng(4);
    std::vector<double> data(5 * 3 * 3);
    for (auto& x : data) x = static_cast<float>(std::uniform_real_distribution<double>(-1, 1)(rng));
    const FeatureMap f(5, 3, 3, data);
    const auto g = read_pfm_features(write_pfm(f));
    ASSERT_EQ(g.channels(), 3);
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(g.data()[i], data[i]);
}

TEST(Pfm, DepthRoundTrip)
{
    std::mt19937_64 rng(6);
    const auto z = oracle::random_depth(6, 5, rng, 1.0, 50.0, 0.2);
    const auto back = read_pfm_depth(write_pfm(z));
    EXPECT_EQ(back.mask(), z.mask());
    EXPECT_EQ(write_pfm(back), write_pfm(z));
}

// ---- KITTI ------------------------------------------------------------------

TEST(Kitti, FlowZeroEncoding)
{
    const auto img = encode_kitti_flow_samples(make_displacement_field(1, 1, Displacement{0, 0}));
    ASSERT_EQ(img.samples.size(), 3u);
    EXPECT_EQ(img.samples[0], 32768);
    EXPECT_EQ(img.samples[1], 32768);
    EXPECT_EQ(img.samples[2], 1);
}

TEST(Kitti, DisparityEncoding)
{
    const auto img = encode_kitti_disp_samples(DisparityMap(2, 1, {5.0, 1.0}, {1, 0}));
    EXPECT_EQ(img.samples[0], 1280);
    EXPECT_EQ(img.samples[1], 0);
    const auto back = decode_kitti_disp_samples(img);
    EXPECT_TRUE(back.valid(0, 0));
    EXPECT_FALSE(back.valid(1, 0));
}

TEST(Kitti, FlowRoundTripQuantization)
{
    std::mt19937_64 rng(9);
    const auto f = oracle::random_field(31, 17, rng, 400.0, 0.15);
    const auto g = read_kitti_flow(write_kitti_flow(f));
    EXPECT_EQ(g.mask(), f.mask());
    double worst = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.valid_at(i)) {
            worst = std::max(worst, std::abs(f.du_values()[i] - g.du_values()[i]));
            worst = std::max(worst, std::abs(f.dv_values()[i] - g.dv_values()[i]));
        }
    EXPECT_LE(worst, 1.0 / 128.0);
}

TEST(Kitti, DisparityRoundTripQuantization)
{
    std::mt19937_64 rng(10);
    auto d = oracle::random_disparity(23, 11, rng, 200.0, 0.1);
    const auto g = read_kitti_disp(write_kitti_disp(d));
    double worst = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.valid_at(i) && g.valid_at(i)) worst = std::max(worst, std::abs(d.values()[i] - g.values()[i]));
    EXPECT_LE(worst, 1.0 / 512.0);
}

TEST(Kitti, RejectsWrongDepthOrChannels)
{
    PngImage eight{2, 2, 1, 8, std::vector<std::uint16_t>(4, 10)};
    EXPECT_THROW(read_kitti_disp(encode_png(eight)), FormatError);
    PngImage gray16{2, 2, 1, 16, std::vector<std::uint16_t>(4, 10)};
    EXPECT_THROW(read_kitti_flow(encode_png(gray16)), FormatError);
    EXPECT_NO_THROW(read_kitti_disp(encode_png(gray16)));
}

TEST(Kitti, OutOfRangeRejectedOnWrite)
{
    EXPECT_THROW(write_kitti_disp(DisparityMap(1, 1, {300.0}, {1})), ArgumentError);
    EXPECT_THROW(write_kitti_flow(make_displacement_field(1, 1, Displacement{600.0, 0})), ArgumentError);
}

TEST(Png, RoundTrip16BitRgb)
{
    PngImage img{3, 2, 3, 16, {}};
    for (int i = 0; i < 18; ++i) img.samples.push_back(static_cast<std::uint16_t>(i * 3000));
    const auto back = decode_png(encode_png(img));
    EXPECT_EQ(back.samples, img.samples);
    EXPECT_EQ(back.channels, 3);
    EXPECT_EQ(back.bit_depth, 16);
}

// ---- cameras ------------------------------------------------------------------

TEST(Cameras, IdentityRecord)
{
    const auto cams = read_cameras("# fx fy cx cy skew R T\n100 100 32 24 0  1 0 0 0 1 0 0 0 1  0 0 0\n");
    ASSERT_EQ(cams.size(), 1u);
    EXPECT_EQ(cams[0].K()(0, 0), 100.0);
    EXPECT_EQ(cams[0].K()(0, 2), 32.0);
    EXPECT_EQ(cams[0].R(), Eigen::Matrix3d::Identity());
    EXPECT_EQ(cams[0].T(), Eigen::Vector3d::Zero());
}

TEST(Cameras, RoundTrip)
{
    std::mt19937_64 rng(12);
    std::vector<CameraModel> cams;
    for (int i = 0; i < 10; ++i) {
        const auto [a, b] = oracle::random_camera_pair(rng, 640, 480);
        cams.push_back(a.model());
        cams.push_back(b.model());
    }
    const auto back = read_cameras(write_cameras(cams));
    ASSERT_EQ(back.size(), cams.size());
    for (std::size_t i = 0; i < cams.size(); ++i) {
        EXPECT_LE((back[i].R() - cams[i].R()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LE((back[i].T() - cams[i].T()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LE((back[i].K() - cams[i].K()).cwiseAbs().maxCoeff(), 1e-15 * 1000);
    }
}

TEST(Cameras, ReflectionIsParseError)
{
    try {
        read_cameras("100 100 0 0 0  1 0 0 0 1 0 0 0 1  0 0 0\n100 100 0 0 0  1 0 0 0 1 0 0 0 -1  0 0 0\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Cameras, WrongFieldCount)
{
    EXPECT_THROW(read_cameras("100 100 0 0 0 1 0 0 0 1 0 0 0 1 0 0\n"), ParseError);
    EXPECT_THROW(read_cameras("100 100 0 0 0 1 0 0 0 1 0 0 0 1 0 0 x\n"), ParseError);
}

TEST(Cameras, SlightlyOffRotationIsReprojected)
{
    const auto cams = read_cameras("100 100 0 0 0  1 1e-8 0 0 1 0 0 0 1  0 0 0\n");
    EXPECT_LT(orthonormality_error(cams[0].R()), 1e-12);
}

// ---- truncation -----------------------------------------------------------------

TEST(Formats, TruncatedPrefixesNeverCrash)
{
    std::mt19937_64 rng(13);
    const auto f = float_field(7, 5, rng);
    const std::vector<Bytes> inputs{write_flo(f), write_pfm(oracle::random_disparity(7, 5, rng, 10.0)),
                                    write_kitti_flow(f), write_kitti_disp(oracle::random_disparity(7, 5, rng, 10.0))};
    for (const auto& full : inputs) {
        for (std::size_t n = 0; n < full.size(); ++n) {
            const ByteView prefix(full.data(), n);
            try {
                (void)read_flo(prefix);
            } catch (const Error&) {
            }
            try {
                (void)decode_pfm(prefix);
            } catch (const Error&) {
            }
            try {
                (void)decode_png(prefix);
            } catch (const Error&) {
            }
        }
    }
    SUCCEED();
}

} // namespace
