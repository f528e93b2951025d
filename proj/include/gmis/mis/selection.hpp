#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gmis/core/rng.hpp"

namespace gmis {

// How proposal indexes are chosen per cycle of N draws.
//   S1: random, with replacement (iid uniform).
//   S2: random, without replacement (uniform random permutation per cycle).
//   S3: deterministic cycle 0,1,...,N-1.
// All three select each index with average probability 1/N.
enum class SelectionStrategy { S1, S2, S3 };

inline const char* to_string(SelectionStrategy s) {
    switch (s) {
    case SelectionStrategy::S1: return "S1";
    case SelectionStrategy::S2: return "S2";
    case SelectionStrategy::S3: return "S3";
    }
    return "?";
}

// Draws M proposal indexes (0-based). For S2/S3, M must be a whole number
// of cycles; selection restarts independently each cycle.
inline std::vector<std::size_t> select_indices(SelectionStrategy strategy,
                                               std::size_t n, std::size_t m,
                                               RngStream& rng) {
    if (n < 1 || m < 1)
        throw std::invalid_argument("select_indices: need N >= 1, M >= 1");
    if (strategy != SelectionStrategy::S1 && m % n != 0)
        throw std::invalid_argument(
            "select_indices: M must be a multiple of N for S2/S3");

    std::vector<std::size_t> out(m);
    if (n == 1) return out;  // no randomness to consume

    switch (strategy) {
    case SelectionStrategy::S1:
        for (std::size_t i = 0; i < m; ++i) out[i] = rng.next_below(std::uint32_t(n));
        break;
    case SelectionStrategy::S2:
        for (std::size_t c = 0; c < m; c += n) {
            std::iota(out.begin() + c, out.begin() + c + n, std::size_t{0});
            // Fisher-Yates per cycle.
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(out[c + i], out[c + rng.next_below(std::uint32_t(i + 1))]);
        }
        break;
    case SelectionStrategy::S3:
        for (std::size_t i = 0; i < m; ++i) out[i] = i % n;
        break;
    }
    return out;
}

} // namespace gmis
