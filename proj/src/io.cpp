#include "pls/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace pls::io {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'L', '1'};
constexpr std::size_t kHeaderSize = 17;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_f32(std::vector<std::uint8_t>& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::vector<std::uint8_t> header(DType dtype, std::size_t h, std::size_t w, std::size_t count) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(static_cast<std::uint8_t>(dtype));
    put_u32(out, static_cast<std::uint32_t>(h));
    put_u32(out, static_cast<std::uint32_t>(w));
    put_u32(out, static_cast<std::uint32_t>(count));
    return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

template <typename Image>
void check_stack(const std::vector<Image>& images) {
    if (images.empty()) throw IoError("cannot save an empty stack");
    for (const auto& img : images) require_same_shape(img, images.front(), "array container stack");
}

}  // namespace

void save_real(const std::filesystem::path& path, const std::vector<RealImage>& images) {
    check_stack(images);
    auto bytes = header(DType::f32_real, images.front().height(), images.front().width(), images.size());
    for (const auto& img : images)
        for (double v : img) put_f32(bytes, v);
    write_bytes(path, bytes);
}

void save_complex(const std::filesystem::path& path, const std::vector<ComplexImage>& images) {
    check_stack(images);
    auto bytes = header(DType::f32_complex, images.front().height(), images.front().width(), images.size());
    for (const auto& img : images) {
        for (const auto& v : img) {
            put_f32(bytes, v.real());
            put_f32(bytes, v.imag());
        }
    }
    write_bytes(path, bytes);
}

void save_u16(const std::filesystem::path& path, const std::vector<RealImage>& images) {
    check_stack(images);
    auto bytes = header(DType::u16_real, images.front().height(), images.front().width(), images.size());
    for (const auto& img : images) {
        for (double v : img) {
            const double r = std::round(v);
            if (!(r >= 0.0 && r <= 65535.0)) throw IoError("u16 container value out of range");
            const auto u = static_cast<std::uint16_t>(r);
            bytes.push_back(static_cast<std::uint8_t>(u));
            bytes.push_back(static_cast<std::uint8_t>(u >> 8));
        }
    }
    write_bytes(path, bytes);
}

ArrayStack load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw IoError("'" + path.string() + "' is not an array container");
    }
    ArrayStack stack;
    const std::uint8_t dt = bytes[4];
    if (dt > 2) throw IoError("unknown array container dtype " + std::to_string(dt));
    stack.dtype = static_cast<DType>(dt);
    const std::size_t h = get_u32(&bytes[5]);
    const std::size_t w = get_u32(&bytes[9]);
    const std::size_t count = get_u32(&bytes[13]);
    const std::size_t elem = stack.dtype == DType::f32_complex ? 8 : stack.dtype == DType::u16_real ? 2 : 4;
    if (h == 0 || w == 0 || count == 0) throw IoError("array container with empty dimensions");
    if (bytes.size() != kHeaderSize + h * w * count * elem) throw IoError("array container payload size mismatch");
    const std::uint8_t* p = bytes.data() + kHeaderSize;
    for (std::size_t k = 0; k < count; ++k) {
        if (stack.dtype == DType::f32_complex) {
            ComplexImage img(h, w);
            for (auto& v : img) {
                v = Complex(std::bit_cast<float>(get_u32(p)), std::bit_cast<float>(get_u32(p + 4)));
                p += 8;
            }
            stack.complex.push_back(std::move(img));
        } else {
            RealImage img(h, w);
            for (auto& v : img) {
                if (stack.dtype == DType::u16_real) {
                    v = static_cast<double>(static_cast<std::uint16_t>(p[0] | p[1] << 8));
                    p += 2;
                } else {
                    v = std::bit_cast<float>(get_u32(p));
                    p += 4;
                }
            }
            stack.real.push_back(std::move(img));
        }
    }
    return stack;
}

std::vector<RealImage> load_real(const std::filesystem::path& path) {
    ArrayStack s = load(path);
    if (s.dtype == DType::f32_complex) throw IoError("'" + path.string() + "' holds complex data, expected real");
    return std::move(s.real);
}

std::vector<ComplexImage> load_complex(const std::filesystem::path& path) {
    ArrayStack s = load(path);
    if (s.dtype == DType::f32_complex) return std::move(s.complex);
    std::vector<ComplexImage> out;
    for (const auto& r : s.real) out.push_back(to_complex(r));
    return out;
}

void write_png(const std::filesystem::path& path, const RealImage& img, double lo, double hi) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed for '" + path.string() + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<png_byte> row(img.width());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            const double v = std::clamp((img(r, c) - lo) / span, 0.0, 1.0);
            row[c] = static_cast<png_byte>(std::lround(v * 255.0));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RealImage read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw IoError("cannot read PNG '" + path.string() + "': " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
    }
    RealImage out(image.height, image.width);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buffer[i] / 255.0;
    return out;
}

std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path.string() + "'");
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string{};
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(f, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw IoError(path.string() + ":" + std::to_string(lineno) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

}  // namespace pls::io
