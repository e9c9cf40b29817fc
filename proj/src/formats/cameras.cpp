#include <corrkit/formats.hpp>

#include <Eigen/SVD>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

namespace corrkit {

namespace {

constexpr int kRecordFields = 17;

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& R)
{
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

std::vector<double> parse_numbers(std::string_view line, std::size_t line_no)
{
    std::vector<double> values;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        if (i == line.size()) {
            break;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') {
            ++j;
        }
        const std::string tok(line.substr(i, j - i));
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) {
            throw ParseError("camera record: non-numeric field '" + tok + "'", line_no);
        }
        values.push_back(v);
        i = j;
    }
    return values;
}

} // namespace

std::vector<CameraModel> read_cameras(std::string_view text)
{
    std::vector<CameraModel> cameras;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::string_view line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') {
            continue;
        }
        const auto v = parse_numbers(line, line_no);
        if (v.size() != kRecordFields) {
            throw ParseError("camera record: expected " + std::to_string(kRecordFields) + " fields, got "
                                 + std::to_string(v.size()),
                             line_no);
        }
        Intrinsics intr{v[0], v[1], v[2], v[3], v[4]};
        Eigen::Matrix3d R;
        R << v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12], v[13];
        const Eigen::Vector3d T(v[14], v[15], v[16]);

        if (!R.allFinite()) {
            throw ParseError("camera record: non-finite rotation", line_no);
        }
        const double err = orthonormality_error(R);
        if (err > kCameraFileRotationTolerance) {
            throw ParseError("camera record: rotation is not orthonormal with det +1 (error "
                                 + std::to_string(err) + ")",
                             line_no);
        }
        if (err > CameraModel::kOrthonormalityTolerance) {
            R = nearest_rotation(R);
        }
        try {
            cameras.emplace_back(intr, R, T);
        } catch (const ValidationError& e) {
            throw ParseError(std::string("camera record: ") + e.what(), line_no);
        }
    }
    return cameras;
}

std::string write_cameras(std::span<const CameraModel> cameras)
{
    std::string out = "# fx fy cx cy skew r00 r01 r02 r10 r11 r12 r20 r21 r22 t0 t1 t2\n";
    char buf[32];
    for (const auto& cam : cameras) {
        const auto& k = cam.intrinsics();
        std::vector<double> v = {k.fx, k.fy, k.cx, k.cy, k.skew};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                v.push_back(cam.R()(r, c));
            }
        }
        for (int i = 0; i < 3; ++i) {
            v.push_back(cam.T()(i));
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out += buf;
            out += i + 1 == v.size() ? '\n' : ' ';
        }
    }
    return out;
}

Bytes read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, ByteView bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("short write to " + path);
    }
}

std::string read_text_file(const std::string& path)
{
    const Bytes b = read_file(path);
    return std::string(b.begin(), b.end());
}

void write_text_file(const std::string& path, std::string_view text)
{
    write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace corrkit
