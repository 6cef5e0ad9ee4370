#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "pls/image.hpp"

namespace pls::io {

// Array container ("CVL1"): a 17-byte little-endian header
//
//   magic "CVL1" | dtype u8 | height u32 | width u32 | count u32
//
// followed by `count` row-major images. dtype 0 = f32 real, 1 = f32
// complex (interleaved re, im), 2 = u16 real.
enum class DType : std::uint8_t { f32_real = 0, f32_complex = 1, u16_real = 2 };

struct ArrayStack {
    DType dtype = DType::f32_real;
    std::vector<RealImage> real;        // f32_real and u16_real
    std::vector<ComplexImage> complex;  // f32_complex

    std::size_t count() const noexcept { return dtype == DType::f32_complex ? complex.size() : real.size(); }
};

void save_real(const std::filesystem::path& path, const std::vector<RealImage>& images);
void save_complex(const std::filesystem::path& path, const std::vector<ComplexImage>& images);
/// u16 storage; values are rounded and must lie in [0, 65535].
void save_u16(const std::filesystem::path& path, const std::vector<RealImage>& images);

ArrayStack load(const std::filesystem::path& path);
/// Loads a real stack (f32 or u16); complex files are rejected.
std::vector<RealImage> load_real(const std::filesystem::path& path);
/// Loads a complex stack; real files are promoted with zero phase.
std::vector<ComplexImage> load_complex(const std::filesystem::path& path);

/// 8-bit grayscale PNG preview. Values are mapped linearly from [lo, hi]
/// and clipped.
void write_png(const std::filesystem::path& path, const RealImage& img, double lo, double hi);
/// 8-bit grayscale PNG input, normalized to [0, 1].
RealImage read_png(const std::filesystem::path& path);

/// Flat `key = value` configuration; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

}  // namespace pls::io
