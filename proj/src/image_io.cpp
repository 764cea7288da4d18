#include "apgstmd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

namespace apgstmd {

namespace {

// Reads the next header token, skipping whitespace and `#` comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int parse_header_int(std::istream& in, const std::filesystem::path& path) {
    std::string tok = next_token(in);
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IngestError("malformed PGM header in " + path.string());
    }
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string());
    if (next_token(in) != "P5") throw IngestError("not a binary PGM (P5): " + path.string());
    GrayImage img;
    img.width = parse_header_int(in, path);
    img.height = parse_header_int(in, path);
    img.max_value = parse_header_int(in, path);
    if (img.max_value > 65535) throw IngestError("PGM maxval out of range: " + path.string());
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    const std::size_t bpp = img.max_value < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bpp);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw IngestError("truncated PGM data: " + path.string());
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        img.pixels[i] = bpp == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    return img;
}

GrayImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IngestError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IngestError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IngestError("libpng init failed");
    }
    GrayImage img;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IngestError("unreadable PNG: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IngestError("expected 8-bit grayscale PNG: " + path.string());
    }
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    buffer.resize(static_cast<std::size_t>(img.width) * img.height);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[y] = buffer.data() + static_cast<std::size_t>(y) * img.width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    img.pixels.assign(buffer.begin(), buffer.end());
    return img;
}

GrayImage read_image(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png(path);
    throw IngestError("unsupported image type: " + path.string());
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot write " + path.string());
    out << "P5\n" << image.width << " " << image.height << "\n" << image.max_value << "\n";
    const bool wide = image.max_value > 255;
    std::vector<unsigned char> raw;
    raw.reserve(image.pixels.size() * (wide ? 2 : 1));
    for (auto v : image.pixels) {
        if (wide) {
            raw.push_back(static_cast<unsigned char>(v >> 8));
            raw.push_back(static_cast<unsigned char>(v & 0xff));
        } else {
            raw.push_back(static_cast<unsigned char>(v));
        }
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_frame_pgm(const std::filesystem::path& path, const Frame& frame) {
    GrayImage img{frame.width, frame.height, 255, {}};
    img.pixels.resize(frame.data.size());
    for (std::size_t i = 0; i < frame.data.size(); ++i)
        img.pixels[i] = static_cast<std::uint16_t>(std::clamp(std::lround(frame.data[i]), 0L, 255L));
    write_pgm(path, img);
}

double write_scaled_pgm16(const std::filesystem::path& path, int width, int height,
                          const std::vector<double>& values) {
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, v);
    GrayImage img{width, height, 65535, {}};
    img.pixels.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double s = vmax > 0 ? std::max(values[i], 0.0) / vmax : 0.0;
        img.pixels[i] = static_cast<std::uint16_t>(std::lround(s * 65535.0));
    }
    write_pgm(path, img);
    return vmax;
}

Frame frame_from_image(const GrayImage& image, double t_ms) {
    Frame f(image.width, image.height, t_ms);
    const double scale = image.max_value == 255 ? 1.0 : 255.0 / image.max_value;
    for (std::size_t i = 0; i < image.pixels.size(); ++i) f.data[i] = image.pixels[i] * scale;
    return f;
}

}  // namespace apgstmd
