#include "footlab/image_io.h"

#include "footlab/error.h"

#include <png.h>
// jpeglib.h needs size_t and FILE declared first.
#include <cstdio>
#include <jpeglib.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

namespace footlab {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes)
{
    return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes)
{
    return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

std::uint8_t rescale16(unsigned v) { return static_cast<std::uint8_t>((v * 255u + 32767u) / 65535u); }

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

// Everything touched after setjmp lives here, behind a pointer that never changes.
struct PngReadState {
    std::span<const std::uint8_t> input;
    std::size_t offset = 0;
    std::string error;
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int channels = 0;
    int bit_depth = 0;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t n)
{
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->offset + n > st->input.size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, st->input.data() + st->offset, n);
    st->offset += n;
}

void png_error_callback(png_structp png, png_const_charp msg)
{
    auto* st = static_cast<PngReadState*>(png_get_error_ptr(png));
    if (st != nullptr) {
        st->error = msg;
    }
    png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

GrayImage decode_png(std::span<const std::uint8_t> bytes)
{
    auto st = std::make_unique<PngReadState>();
    st->input = bytes;
    PngReadState* state = st.get();

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, state, png_error_callback, png_warning_callback);
    if (png == nullptr) {
        throw Error(ErrorCode::DecodeError, "cannot allocate PNG decoder");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorCode::DecodeError, "cannot allocate PNG decoder");
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::DecodeError, "PNG: " + state->error);
    }

    png_set_read_fn(png, state, png_read_callback);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    state->width = png_get_image_width(png, info);
    state->height = png_get_image_height(png, info);
    state->channels = png_get_channels(png, info);
    state->bit_depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);

    state->raw.resize(stride * state->height);
    state->rows.resize(state->height);
    for (png_uint_32 y = 0; y < state->height; ++y) {
        state->rows[y] = state->raw.data() + y * stride;
    }
    png_read_image(png, state->rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const int w = static_cast<int>(state->width);
    const int h = static_cast<int>(state->height);
    const int ch = state->channels;
    const bool wide = state->bit_depth == 16;
    if (state->bit_depth != 8 && !wide) {
        throw Error(ErrorCode::UnsupportedFormat, "PNG bit depth " + std::to_string(state->bit_depth));
    }

    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h);
    const int bytes_per_sample = wide ? 2 : 1;
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = state->rows[y];
        for (int x = 0; x < w; ++x) {
            auto sample = [&](int c) -> std::uint8_t {
                const std::uint8_t* p = row + (static_cast<std::size_t>(x) * ch + c) * bytes_per_sample;
                return wide ? rescale16((static_cast<unsigned>(p[0]) << 8) | p[1]) : p[0];
            };
            std::uint8_t v = 0;
            if (ch <= 2) {
                v = sample(0);
            } else {
                v = luminance(sample(0), sample(1), sample(2));
            }
            out[static_cast<std::size_t>(y) * w + x] = v;
        }
    }
    return GrayImage(w, h, std::move(out));
}

struct PngWriteState {
    std::vector<std::uint8_t> out;
    std::string error;
};

void png_write_callback(png_structp png, png_bytep data, png_size_t n)
{
    auto* st = static_cast<PngWriteState*>(png_get_io_ptr(png));
    st->out.insert(st->out.end(), data, data + n);
}

void png_flush_callback(png_structp) {}

void png_write_error_callback(png_structp png, png_const_charp msg)
{
    auto* st = static_cast<PngWriteState*>(png_get_error_ptr(png));
    st->error = msg;
    png_longjmp(png, 1);
}

std::vector<std::uint8_t> encode_gray8(int width, int height, std::span<const std::uint8_t> pixels)
{
    auto st = std::make_unique<PngWriteState>();
    PngWriteState* state = st.get();

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, state, png_write_error_callback, png_warning_callback);
    if (png == nullptr) {
        throw Error(ErrorCode::IoError, "cannot allocate PNG encoder");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorCode::IoError, "cannot allocate PNG encoder");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::IoError, "PNG encode: " + state->error);
    }

    png_set_write_fn(png, state, png_write_callback, png_flush_callback);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        // libpng takes a non-const row pointer but does not modify it.
        png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return std::move(state->out);
}

// ---------------------------------------------------------------------------
// JPEG
// ---------------------------------------------------------------------------

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo)
{
    auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, mgr->message);
    std::longjmp(mgr->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

struct JpegState {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    std::vector<std::uint8_t> raw;
    int width = 0;
    int height = 0;
    int channels = 0;
    bool unsupported = false;
};

GrayImage decode_jpeg(std::span<const std::uint8_t> bytes)
{
    auto st = std::make_unique<JpegState>();
    JpegState* state = st.get();

    state->cinfo.err = jpeg_std_error(&state->err.base);
    state->err.base.error_exit = jpeg_error_exit;
    state->err.base.emit_message = jpeg_silent;
    state->err.message[0] = '\0';

    if (setjmp(state->err.jump)) {
        jpeg_destroy_decompress(&state->cinfo);
        throw Error(ErrorCode::DecodeError, std::string("JPEG: ") + state->err.message);
    }

    jpeg_create_decompress(&state->cinfo);
    jpeg_mem_src(&state->cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&state->cinfo, TRUE);

    if (state->cinfo.num_components == 1) {
        state->cinfo.out_color_space = JCS_GRAYSCALE;
    } else if (state->cinfo.jpeg_color_space == JCS_YCbCr || state->cinfo.jpeg_color_space == JCS_RGB) {
        state->cinfo.out_color_space = JCS_RGB;
    } else {
        state->unsupported = true;
    }

    if (!state->unsupported) {
        jpeg_start_decompress(&state->cinfo);
        state->width = static_cast<int>(state->cinfo.output_width);
        state->height = static_cast<int>(state->cinfo.output_height);
        state->channels = state->cinfo.output_components;
        const std::size_t stride = static_cast<std::size_t>(state->width) * state->channels;
        state->raw.resize(stride * state->height);
        while (state->cinfo.output_scanline < state->cinfo.output_height) {
            JSAMPROW row = state->raw.data() + stride * state->cinfo.output_scanline;
            jpeg_read_scanlines(&state->cinfo, &row, 1);
        }
        jpeg_finish_decompress(&state->cinfo);
    }
    jpeg_destroy_decompress(&state->cinfo);

    if (state->unsupported) {
        throw Error(ErrorCode::UnsupportedFormat, "JPEG colour space (CMYK/YCCK) not supported");
    }

    std::vector<std::uint8_t> out(static_cast<std::size_t>(state->width) * state->height);
    if (state->channels == 1) {
        out = std::move(state->raw);
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const std::uint8_t* p = state->raw.data() + i * 3;
            out[i] = luminance(p[0], p[1], p[2]);
        }
    }
    return GrayImage(state->width, state->height, std::move(out));
}

}  // namespace

GrayImage load_gray(std::span<const std::uint8_t> bytes)
{
    if (bytes.empty()) {
        throw Error(ErrorCode::DecodeError, "empty input");
    }
    if (is_png(bytes)) {
        return decode_png(bytes);
    }
    if (is_jpeg(bytes)) {
        return decode_jpeg(bytes);
    }
    throw Error(ErrorCode::UnsupportedFormat, "input is neither PNG nor JPEG");
}

GrayImage load_gray_file(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    try {
        return load_gray(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail(), e.stage());
    }
}

std::vector<std::uint8_t> encode_png(const GrayImage& img)
{
    return encode_gray8(img.width(), img.height(), img.pixels());
}

std::vector<std::uint8_t> encode_png(const Mask& mask)
{
    std::vector<std::uint8_t> px(mask.size());
    const auto data = mask.data();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = data[i] != 0 ? 255 : 0;
    }
    return encode_gray8(mask.width(), mask.height(), px);
}

Mask load_mask(std::span<const std::uint8_t> bytes)
{
    const GrayImage img = load_gray(bytes);
    std::vector<std::uint8_t> accepted(img.size());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        accepted[i] = px[i] >= 128 ? 1 : 0;
    }
    return Mask(img.width(), img.height(), std::move(accepted));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::DecodeError, "cannot open " + path.string());
    }
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

}  // namespace footlab
