#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmis/core/stats.hpp"
#include "gmis/mis/proposals.hpp"
#include "gmis/mis/selection.hpp"
#include "gmis/mis/weighting.hpp"

namespace gmis {

// The six unique estimators arising from (selection, weighting) pairs.
// R = selection with replacement, N = without.
enum class SchemeTag { R1, R2, R3, N1, N2, N3 };

inline const char* to_string(SchemeTag t) {
    switch (t) {
    case SchemeTag::R1: return "R1";
    case SchemeTag::R2: return "R2";
    case SchemeTag::R3: return "R3";
    case SchemeTag::N1: return "N1";
    case SchemeTag::N2: return "N2";
    case SchemeTag::N3: return "N3";
    }
    return "?";
}

inline SchemeTag scheme_tag_from_string(const std::string& s) {
    if (s == "R1") return SchemeTag::R1;
    if (s == "R2") return SchemeTag::R2;
    if (s == "R3") return SchemeTag::R3;
    if (s == "N1") return SchemeTag::N1;
    if (s == "N2") return SchemeTag::N2;
    if (s == "N3") return SchemeTag::N3;
    throw std::invalid_argument("unknown scheme '" + s + "'");
}

// Which scheme a (selection, weighting) pair collapses to.
inline SchemeTag combine(SelectionStrategy s, WeightingFunction w) {
    using S = SelectionStrategy;
    using W = WeightingFunction;
    switch (s) {
    case S::S1:
        switch (w) {
        case W::W1: return SchemeTag::R3;
        case W::W2: return SchemeTag::R1;
        case W::W3: return SchemeTag::R3;
        case W::W4: return SchemeTag::R2;
        case W::W5: return SchemeTag::R3;
        }
        break;
    case S::S2:
        switch (w) {
        case W::W1: return SchemeTag::N2;
        case W::W2: return SchemeTag::N1;
        case W::W3: return SchemeTag::N3;
        case W::W4: return SchemeTag::N3;
        case W::W5: return SchemeTag::N3;
        }
        break;
    case S::S3:
        switch (w) {
        case W::W1: return SchemeTag::N1;
        case W::W2: return SchemeTag::N1;
        case W::W3: return SchemeTag::N1;
        case W::W4: return SchemeTag::N3;
        case W::W5: return SchemeTag::N3;
        }
        break;
    }
    throw std::logic_error("combine: bad tags");
}

// Scheme = validated (selection, weighting) pair.
class MisScheme {
public:
    MisScheme(SchemeTag tag, SelectionStrategy selection,
              WeightingFunction weighting)
        : tag_(tag), selection_(selection), weighting_(weighting) {
        if (combine(selection, weighting) != tag)
            throw std::invalid_argument(
                std::string("MisScheme: (") + gmis::to_string(selection) +
                ", " + gmis::to_string(weighting) +
                ") does not produce scheme " + gmis::to_string(tag));
    }

    // Canonical representative pair for each scheme.
    static MisScheme canonical(SchemeTag tag) {
        using S = SelectionStrategy;
        using W = WeightingFunction;
        switch (tag) {
        case SchemeTag::R1: return {tag, S::S1, W::W2};
        case SchemeTag::R2: return {tag, S::S1, W::W4};
        case SchemeTag::R3: return {tag, S::S1, W::W5};
        case SchemeTag::N1: return {tag, S::S2, W::W2};
        case SchemeTag::N2: return {tag, S::S2, W::W1};
        case SchemeTag::N3: return {tag, S::S2, W::W5};
        }
        throw std::logic_error("canonical: bad tag");
    }

    SchemeTag tag() const { return tag_; }
    SelectionStrategy selection() const { return selection_; }
    WeightingFunction weighting() const { return weighting_; }

private:
    SchemeTag tag_;
    SelectionStrategy selection_;
    WeightingFunction weighting_;
};

// A drawn point plus the metadata needed to weight it.
struct MisSample {
    double x = 0.0;
    std::size_t index = 0;                 // proposal the point came from
    std::vector<std::size_t> history;      // cycle index sequence
    double denominator = 0.0;              // evaluated weighting density
    double target_value = 0.0;

    void check() const {
        if (target_value != 0.0 && !(denominator > 0.0))
            throw estimator_validity_error(
                "zero weighting density at a point with nonzero target");
    }
};

struct EstimatorReport {
    double estimate = 0.0;
    std::size_t trials = 0;           // number of per-sample terms
    double sample_mean = 0.0;
    double sample_variance = 0.0;
    double standard_error = 0.0;
};

// Integrable 1D target with known integral over the proposal domain.
struct Target {
    std::function<double(double)> eval;
    double integral = 0.0;     // known value of the estimand
};

// Runs one estimate with M = kN samples drawn in k cycles.
// Estimate = (1/M) sum target(x) / denominator(x); unbiased for the
// target's integral under every valid scheme.
template <class Set>
EstimatorReport run_estimator(const MisScheme& scheme, const Target& target,
                              const Set& proposals, std::size_t m,
                              RngStream& rng) {
    const std::size_t n = proposals.size();
    if (m < 1 || m % n != 0)
        throw std::invalid_argument("run_estimator: M must be a positive "
                                    "multiple of N");
    RunningStats terms;
    KahanSum sum;
    for (std::size_t cycle_start = 0; cycle_start < m; cycle_start += n) {
        auto cycle = select_indices(scheme.selection(), n, n, rng);
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = proposals.sample(cycle[i], rng);
        for (std::size_t i = 0; i < n; ++i) {
            MisSample s;
            s.x = xs[i];
            s.index = cycle[i];
            s.denominator = weighting_denominator(
                scheme.weighting(), scheme.selection(), proposals, xs[i],
                std::span<const std::size_t>(cycle), i);
            s.target_value = target.eval(xs[i]);
            s.check();
            double term = s.target_value == 0.0
                              ? 0.0
                              : s.target_value / s.denominator;
            terms.add(term);
            sum.add(term);
        }
    }
    EstimatorReport r;
    r.trials = m;
    r.estimate = sum.value() / double(m);
    r.sample_mean = terms.mean();
    r.sample_variance = terms.variance();
    r.standard_error = terms.standard_error();
    return r;
}

} // namespace gmis
