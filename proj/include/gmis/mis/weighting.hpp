#pragma once

#include <span>
#include <stdexcept>

#include "gmis/mis/proposals.hpp"
#include "gmis/mis/selection.hpp"

namespace gmis {

// Thrown when a sample with nonzero target value lands where its weighting
// density is zero; the estimator would be invalid.
class estimator_validity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The five weighting-denominator rules. Each sample's estimator term is
// target(x) / denominator(x).
//   W1: conditional density of x_n given the previously drawn indexes.
//   W2: density of the proposal the sample was actually drawn from.
//   W3: marginal density of x_n when the index is unknown.
//   W4: mixture over the cycle's realized index sequence.
//   W5: full equal-weight mixture psi.
enum class WeightingFunction { W1, W2, W3, W4, W5 };

inline const char* to_string(WeightingFunction w) {
    switch (w) {
    case WeightingFunction::W1: return "W1";
    case WeightingFunction::W2: return "W2";
    case WeightingFunction::W3: return "W3";
    case WeightingFunction::W4: return "W4";
    case WeightingFunction::W5: return "W5";
    }
    return "?";
}

// Evaluates the weighting density for the sample in slot `n` of one cycle.
// `cycle` holds the cycle's realized index sequence; for W1/W2 only the
// prefix up to n matters, W4 uses the whole cycle, W5 none of it.
template <class Set, class Point>
double weighting_denominator(WeightingFunction weighting,
                             SelectionStrategy strategy, const Set& proposals,
                             const Point& x,
                             std::span<const std::size_t> cycle,
                             std::size_t n) {
    const std::size_t N = proposals.size();
    if (cycle.empty() || n >= cycle.size())
        throw std::invalid_argument("weighting_denominator: empty history");

    auto remaining_mixture = [&] {
        // Mean density over indexes not yet used within the cycle.
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < N; ++k) {
            bool used = false;
            for (std::size_t i = 0; i < n; ++i)
                if (cycle[i] == k) { used = true; break; }
            if (!used) { sum += proposals.pdf(k, x); ++count; }
        }
        return sum / double(count);
    };

    switch (weighting) {
    case WeightingFunction::W1:
        switch (strategy) {
        case SelectionStrategy::S1: return proposals.mixture_pdf(x);
        case SelectionStrategy::S2: return remaining_mixture();
        case SelectionStrategy::S3: return proposals.pdf(cycle[n], x);
        }
        break;
    case WeightingFunction::W2:
        return proposals.pdf(cycle[n], x);
    case WeightingFunction::W3:
        // Marginal over index randomness: psi for random strategies, the
        // deterministic member for S3.
        return strategy == SelectionStrategy::S3 ? proposals.pdf(cycle[n], x)
                                                 : proposals.mixture_pdf(x);
    case WeightingFunction::W4: {
        if (cycle.size() < N)
            throw std::invalid_argument(
                "weighting_denominator: W4 needs the full cycle history");
        double sum = 0.0;
        for (std::size_t k = 0; k < N; ++k) sum += proposals.pdf(cycle[k], x);
        return sum / double(N);
    }
    case WeightingFunction::W5:
        return proposals.mixture_pdf(x);
    }
    throw std::logic_error("weighting_denominator: bad tag");
}

// Convenience overload matching the single-history call shape: the sample
// occupies the last slot of `history`.
template <class Set, class Point>
double weighting_denominator(WeightingFunction weighting,
                             SelectionStrategy strategy, const Set& proposals,
                             const Point& x,
                             std::span<const std::size_t> history) {
    return weighting_denominator(weighting, strategy, proposals, x, history,
                                 history.size() - 1);
}

} // namespace gmis
