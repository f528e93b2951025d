#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <zlib.h>

#include "gmis/io/pfm.hpp"

namespace gmis {

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::uint8_t* data, std::size_t len) {
    put_u32(out, std::uint32_t(len));
    std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + len);
    std::uint32_t c = std::uint32_t(
        crc32(0, out.data() + start, uInt(out.size() - start)));
    put_u32(out, c);
}

} // namespace detail

// 8-bit RGB with gamma 1/2.2 tonemapping.
inline std::vector<std::uint8_t> png_bytes(const Image& img) {
    using namespace detail;
    std::vector<std::uint8_t> raw;
    raw.reserve(std::size_t(img.height) * (1 + std::size_t(img.width) * 3));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = std::pow(std::max(0.0, img.at(x, y)[c]),
                                    1.0 / 2.2);
                raw.push_back(
                    std::uint8_t(std::min(255.0, v * 255.0 + 0.5)));
            }
    }
    uLongf zlen = compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> z(zlen);
    if (compress2(z.data(), &zlen, raw.data(), uLong(raw.size()), 9) != Z_OK)
        throw image_io_error("deflate failed while encoding png");
    z.resize(zlen);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n',
                                     0x1a, '\n'};
    std::uint8_t ihdr[13];
    std::uint32_t w = std::uint32_t(img.width), h = std::uint32_t(img.height);
    ihdr[0] = std::uint8_t(w >> 24); ihdr[1] = std::uint8_t(w >> 16);
    ihdr[2] = std::uint8_t(w >> 8);  ihdr[3] = std::uint8_t(w);
    ihdr[4] = std::uint8_t(h >> 24); ihdr[5] = std::uint8_t(h >> 16);
    ihdr[6] = std::uint8_t(h >> 8);  ihdr[7] = std::uint8_t(h);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // truecolor
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    put_chunk(out, "IHDR", ihdr, sizeof(ihdr));
    put_chunk(out, "IDAT", z.data(), z.size());
    put_chunk(out, "IEND", nullptr, 0);
    return out;
}

inline void write_png(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw image_io_error("cannot open '" + path + "' for writing");
    auto bytes = png_bytes(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    if (!out) throw image_io_error("write failed for '" + path + "'");
}

// Pick the container from the file name.
inline void write_image(const std::string& path, const Image& img) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0)
        write_png(path, img);
    else
        write_pfm(path, img);
}

} // namespace gmis
