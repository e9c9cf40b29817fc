#include <corrkit/formats.hpp>

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <memory>

namespace corrkit {

namespace {

// libpng reports errors by longjmp. Everything that must survive the jump is
// owned by heap objects whose owning pointers are fixed before setjmp.

struct ReadContext {
    ByteView bytes;
    std::size_t pos = 0;
    char message[192] = "PNG decode failed";
};

struct WriteContext {
    Bytes out;
    char message[192] = "PNG encode failed";
};

template <typename Context>
void on_error(png_structp png, png_const_charp msg)
{
    auto* ctx = static_cast<Context*>(png_get_error_ptr(png));
    std::strncpy(ctx->message, msg ? msg : "unknown error", sizeof ctx->message - 1);
    ctx->message[sizeof ctx->message - 1] = '\0';
    png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

void read_bytes(png_structp png, png_bytep out, png_size_t n)
{
    auto* ctx = static_cast<ReadContext*>(png_get_io_ptr(png));
    if (n > ctx->bytes.size() - ctx->pos) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, ctx->bytes.data() + ctx->pos, n);
    ctx->pos += n;
}

void write_bytes(png_structp png, png_bytep data, png_size_t n)
{
    auto* ctx = static_cast<WriteContext*>(png_get_io_ptr(png));
    ctx->out.insert(ctx->out.end(), data, data + n);
}

void flush_bytes(png_structp) {}

struct ReadHandles {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~ReadHandles() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct WriteHandles {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~WriteHandles() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct DecodeBuffers {
    PngImage image;
    std::vector<png_byte> raw;
    std::vector<png_bytep> rows;
};

} // namespace

PngImage decode_png(ByteView bytes)
{
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw FormatError("PNG: bad signature", 0);
    }
    const auto ctx = std::make_unique<ReadContext>();
    ctx->bytes = bytes;
    const auto handles = std::make_unique<ReadHandles>();
    const auto buffers = std::make_unique<DecodeBuffers>();

    handles->png = png_create_read_struct(PNG_LIBPNG_VER_STRING, ctx.get(), on_error<ReadContext>, on_warning);
    if (!handles->png) {
        throw Error("PNG: cannot allocate decoder");
    }
    handles->info = png_create_info_struct(handles->png);
    if (!handles->info) {
        throw Error("PNG: cannot allocate decoder");
    }

    if (setjmp(png_jmpbuf(handles->png))) {
        throw FormatError(std::string("PNG: ") + ctx->message, ctx->pos);
    }

    png_set_read_fn(handles->png, ctx.get(), read_bytes);
    png_read_info(handles->png, handles->info);

    const png_uint_32 width = png_get_image_width(handles->png, handles->info);
    const png_uint_32 height = png_get_image_height(handles->png, handles->info);
    const int color = png_get_color_type(handles->png, handles->info);
    if (width > (1u << 15) || height > (1u << 15)) {
        png_error(handles->png, "image dimensions too large");
    }

    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(handles->png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(handles->png, handles->info) < 8) {
        png_set_expand_gray_1_2_4_to_8(handles->png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(handles->png);
    }
    png_set_interlace_handling(handles->png);
    png_read_update_info(handles->png, handles->info);

    const int depth = png_get_bit_depth(handles->png, handles->info);
    const int channels = png_get_channels(handles->png, handles->info);
    const std::size_t rowbytes = png_get_rowbytes(handles->png, handles->info);
    if ((depth != 8 && depth != 16) || (channels != 1 && channels != 3)) {
        png_error(handles->png, "unsupported pixel layout");
    }

    buffers->raw.resize(rowbytes * height);
    buffers->rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) {
        buffers->rows[r] = buffers->raw.data() + r * rowbytes;
    }
    png_read_image(handles->png, buffers->rows.data());
    png_read_end(handles->png, nullptr);

    PngImage& img = buffers->image;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.channels = channels;
    img.bit_depth = depth;
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    img.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.samples[i] = depth == 16 ? static_cast<std::uint16_t>(buffers->raw[2 * i] << 8 | buffers->raw[2 * i + 1])
                                     : buffers->raw[i];
    }
    return std::move(img);
}

Bytes encode_png(const PngImage& image)
{
    if (image.width < 1 || image.height < 1 || (image.channels != 1 && image.channels != 3)
        || (image.bit_depth != 8 && image.bit_depth != 16)
        || image.samples.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
        throw ArgumentError("encode_png: inconsistent image description");
    }
    const std::size_t bytes_per_sample = image.bit_depth / 8;
    const std::size_t rowbytes = static_cast<std::size_t>(image.width) * image.channels * bytes_per_sample;
    std::vector<png_byte> raw(rowbytes * image.height);
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
        const std::uint16_t s = image.samples[i];
        if (image.bit_depth == 16) {
            raw[2 * i] = static_cast<png_byte>(s >> 8);
            raw[2 * i + 1] = static_cast<png_byte>(s & 0xff);
        } else {
            if (s > 255) {
                throw ArgumentError("encode_png: 8-bit sample out of range");
            }
            raw[i] = static_cast<png_byte>(s);
        }
    }
    std::vector<png_bytep> rows(image.height);
    for (int r = 0; r < image.height; ++r) {
        rows[r] = raw.data() + r * rowbytes;
    }

    const auto ctx = std::make_unique<WriteContext>();
    const auto handles = std::make_unique<WriteHandles>();
    handles->png = png_create_write_struct(PNG_LIBPNG_VER_STRING, ctx.get(), on_error<WriteContext>, on_warning);
    if (!handles->png) {
        throw Error("PNG: cannot allocate encoder");
    }
    handles->info = png_create_info_struct(handles->png);
    if (!handles->info) {
        throw Error("PNG: cannot allocate encoder");
    }
    if (setjmp(png_jmpbuf(handles->png))) {
        throw Error(std::string("PNG: ") + ctx->message);
    }
    png_set_write_fn(handles->png, ctx.get(), write_bytes, flush_bytes);
    png_set_IHDR(handles->png, handles->info, image.width, image.height, image.bit_depth,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(handles->png, handles->info);
    png_write_image(handles->png, rows.data());
    png_write_end(handles->png, nullptr);
    return std::move(ctx->out);
}

} // namespace corrkit
