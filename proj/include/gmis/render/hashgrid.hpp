#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gmis/scene/vec.hpp"

namespace gmis {

// Uniform spatial hash over points, built once per iteration for fixed-radius
// range queries. Cells are twice the query radius, so a query touches at
// most eight cells.
class HashGrid {
public:
    template <typename PosFn>
    void build(std::size_t count, double radius, PosFn&& position) {
        radius_ = radius;
        radius2_ = radius * radius;
        cell_ = 2.0 * radius;
        inv_cell_ = 1.0 / cell_;
        std::size_t table = 1;
        while (table < count + 1) table <<= 1;
        starts_.assign(table + 1, 0);
        mask_ = std::uint32_t(table - 1);
        entries_.resize(count);
        positions_.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            positions_[i] = position(i);
            ++starts_[bucket(cell_of(positions_[i])) + 1];
        }
        for (std::size_t i = 1; i < starts_.size(); ++i)
            starts_[i] += starts_[i - 1];
        std::vector<std::uint32_t> cursor(starts_.begin(), starts_.end() - 1);
        for (std::size_t i = 0; i < count; ++i)
            entries_[cursor[bucket(cell_of(positions_[i]))]++] =
                std::uint32_t(i);
    }

    // Visits the index of every stored point within the build radius of p.
    template <typename Fn>
    void for_each_in_range(const Vec3& p, Fn&& fn) const {
        if (entries_.empty()) return;
        Vec3 shifted = p - Vec3(radius_);
        int cx = int(std::floor(shifted.x * inv_cell_));
        int cy = int(std::floor(shifted.y * inv_cell_));
        int cz = int(std::floor(shifted.z * inv_cell_));
        // distinct cells may alias to one bucket; visit each bucket once
        std::uint32_t seen[8];
        int n_seen = 0;
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    std::uint32_t b =
                        bucket({cx + dx, cy + dy, cz + dz});
                    bool dup = false;
                    for (int i = 0; i < n_seen; ++i)
                        if (seen[i] == b) dup = true;
                    if (dup) continue;
                    seen[n_seen++] = b;
                    for (std::uint32_t i = starts_[b]; i < starts_[b + 1];
                         ++i) {
                        std::uint32_t idx = entries_[i];
                        if (length_squared(positions_[idx] - p) <= radius2_)
                            fn(idx);
                    }
                }
    }

private:
    struct Cell {
        int x, y, z;
    };

    Cell cell_of(const Vec3& p) const {
        return {int(std::floor(p.x * inv_cell_)),
                int(std::floor(p.y * inv_cell_)),
                int(std::floor(p.z * inv_cell_))};
    }

    std::uint32_t bucket(const Cell& c) const {
        std::uint64_t h = std::uint64_t(std::uint32_t(c.x)) * 73856093u ^
                          std::uint64_t(std::uint32_t(c.y)) * 19349663u ^
                          std::uint64_t(std::uint32_t(c.z)) * 83492791u;
        return std::uint32_t(h) & mask_;
    }

    double radius_ = 0.0, radius2_ = 0.0, cell_ = 1.0, inv_cell_ = 1.0;
    std::uint32_t mask_ = 0;
    std::vector<std::uint32_t> starts_;
    std::vector<std::uint32_t> entries_;
    std::vector<Vec3> positions_;
};

} // namespace gmis
