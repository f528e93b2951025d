#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmis/scene/vec.hpp"

namespace gmis {

class image_io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Image {
    int width = 0, height = 0;
    std::vector<Rgb> pixels;  // row-major, top row first

    Rgb& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
    const Rgb& at(int x, int y) const {
        return pixels[std::size_t(y) * width + x];
    }
};

// Portable float map, color variant, little-endian (negative scale),
// rows stored bottom-to-top as the format prescribes.
inline std::string pfm_bytes(const Image& img) {
    std::ostringstream out;
    out << "PF\n" << img.width << " " << img.height << "\n-1.0\n";
    for (int y = img.height - 1; y >= 0; --y)
        for (int x = 0; x < img.width; ++x) {
            float rgb[3] = {float(img.at(x, y).x), float(img.at(x, y).y),
                            float(img.at(x, y).z)};
            out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
        }
    return out.str();
}

inline void write_pfm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw image_io_error("cannot open '" + path + "' for writing");
    std::string bytes = pfm_bytes(img);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw image_io_error("write failed for '" + path + "'");
}

inline Image read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw image_io_error("cannot open '" + path + "'");
    std::string magic;
    in >> magic;
    if (magic != "PF")
        throw image_io_error("'" + path + "': not a color float map");
    Image img;
    double scale;
    if (!(in >> img.width >> img.height >> scale) || img.width <= 0 ||
        img.height <= 0)
        throw image_io_error("'" + path + "': malformed header");
    in.get();  // single whitespace byte before the raster
    bool little = scale < 0.0;
    std::size_t count = std::size_t(img.width) * img.height;
    img.pixels.resize(count);
    std::vector<float> row(std::size_t(img.width) * 3);
    for (int y = img.height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                std::streamsize(row.size() * sizeof(float)));
        if (!in) throw image_io_error("'" + path + "': truncated raster");
        for (int x = 0; x < img.width; ++x) {
            float v[3] = {row[3 * x], row[3 * x + 1], row[3 * x + 2]};
            if (!little)
                for (float& f : v) {
                    std::uint32_t u;
                    std::memcpy(&u, &f, 4);
                    u = __builtin_bswap32(u);
                    std::memcpy(&f, &u, 4);
                }
            img.at(x, y) = {v[0], v[1], v[2]};
        }
    }
    return img;
}

// Root-mean-square difference over all channels.
inline double image_rmse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw image_io_error("image size mismatch in rmse");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        Vec3 d = a.pixels[i] - b.pixels[i];
        sum += dot(d, d);
    }
    return std::sqrt(sum / (3.0 * double(a.pixels.size())));
}

} // namespace gmis
