#include "meshreg/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>

#include "meshreg/core.hpp"

namespace meshreg {

namespace {

// ---- PGM (binary P5) --------------------------------------------------------

int pgm_next_int(const std::string& s, size_t& pos) {
    // skip whitespace and '#' comments
    while (pos < s.size()) {
        if (s[pos] == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
        throw IoError("malformed PGM header");
    int v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        v = v * 10 + (s[pos] - '0');
        ++pos;
    }
    return v;
}

Image load_pgm(const std::string& path) {
    std::string raw = read_file(path);
    if (raw.size() < 2 || raw[0] != 'P' || raw[1] != '5')
        throw IoError("not a binary PGM (P5): " + path);
    size_t pos = 2;
    int w = pgm_next_int(raw, pos);
    int h = pgm_next_int(raw, pos);
    int maxval = pgm_next_int(raw, pos);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw IoError("unsupported PGM dimensions/maxval: " + path);
    ++pos;  // single whitespace after maxval
    size_t need = static_cast<size_t>(w) * h;
    if (raw.size() - pos < need) throw IoError("truncated PGM data: " + path);
    Image img(w, h);
    for (size_t i = 0; i < need; ++i)
        img.data[i] = static_cast<float>(static_cast<unsigned char>(raw[pos + i])) /
                      static_cast<float>(maxval);
    return img;
}

// ---- PNG --------------------------------------------------------------------

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

Image load_png(const std::string& path) {
    PngReadCloser c;
    c.fp = std::fopen(path.c_str(), "rb");
    if (!c.fp) throw IoError("cannot open: " + path);
    c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!c.png) throw IoError("png init failed");
    c.info = png_create_info_struct(c.png);
    if (!c.info) throw IoError("png init failed");
    if (setjmp(png_jmpbuf(c.png))) throw IoError("png decode failed: " + path);

    png_init_io(c.png, c.fp);
    png_read_info(c.png, c.info);

    png_uint_32 w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(c.png, c.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(c.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(c.png);
    if (bit_depth == 16) png_set_strip_16(c.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(c.png);
    if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
        color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(c.png, 1, -1, -1);
    png_read_update_info(c.png, c.info);

    Image img(static_cast<int>(w), static_cast<int>(h));
    std::vector<unsigned char> row(w);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(c.png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x)
            img.at(static_cast<int>(x), static_cast<int>(y)) = row[x] / 255.0f;
    }
    png_read_end(c.png, nullptr);
    return img;
}

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void write_png(const std::string& path, int width, int height, int channels,
               const std::vector<unsigned char>& bytes) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    std::string tmp = path + ".tmp";
    {
        PngWriteCloser c;
        c.fp = std::fopen(tmp.c_str(), "wb");
        if (!c.fp) throw IoError("cannot open for writing: " + tmp);
        c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!c.png) throw IoError("png init failed");
        c.info = png_create_info_struct(c.png);
        if (!c.info) throw IoError("png init failed");
        if (setjmp(png_jmpbuf(c.png))) throw IoError("png encode failed: " + path);

        png_init_io(c.png, c.fp);
        png_set_IHDR(c.png, c.info, width, height, 8,
                     channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(c.png, c.info);
        for (int y = 0; y < height; ++y)
            png_write_row(c.png,
                          const_cast<png_bytep>(bytes.data() +
                                                static_cast<size_t>(y) * width * channels));
        png_write_end(c.png, nullptr);
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename failed: " + path);
}

}  // namespace

Image load_image(const std::string& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path);
    std::string head = read_file(path).substr(0, 8);
    if (head.size() >= 2 && head[0] == 'P' && head[1] == '5') return load_pgm(path);
    static const unsigned char png_magic[4] = {0x89, 'P', 'N', 'G'};
    if (head.size() >= 4 && std::memcmp(head.data(), png_magic, 4) == 0) return load_png(path);
    throw IoError("unrecognized image format: " + path);
}

Image binarize_loaded(const Image& img, int threshold) {
    Image out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) {
        int v = static_cast<int>(std::lround(img.data[i] * 255.0f));
        out.data[i] = v >= threshold ? 1.0f : 0.0f;
    }
    return out;
}

void save_pgm(const std::string& path, const Image& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
    out.reserve(out.size() + img.data.size());
    for (float v : img.data) {
        float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        out.push_back(static_cast<char>(std::lround(clamped * 255.0f)));
    }
    atomic_write_file(path, out);
}

void save_png_gray(const std::string& path, const Image& img) {
    std::vector<unsigned char> bytes(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        float v = img.data[i];
        float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        bytes[i] = static_cast<unsigned char>(std::lround(clamped * 255.0f));
    }
    write_png(path, img.width, img.height, 1, bytes);
}

void save_png_rgb(const std::string& path, int width, int height,
                  const std::vector<unsigned char>& rgb) {
    if (rgb.size() != static_cast<size_t>(width) * height * 3)
        throw IoError("rgb buffer size mismatch");
    write_png(path, width, height, 3, rgb);
}

}  // namespace meshreg
