#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gmis/core/quadrature.hpp"
#include "gmis/mis/scheme.hpp"

namespace gmis {

class capability_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class divergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Integrand f(x)/d(x) with a divergence guard where d vanishes.
template <class F, class D>
auto guarded_ratio(F f, D d) {
    return [f = std::move(f), d = std::move(d)](double x) {
        double den = d(x);
        double num = f(x);
        if (!(den > 0.0)) {
            if (num != 0.0)
                throw divergence_error(
                    "analytic_variance: weighting density vanishes on the "
                    "target's support");
            return 0.0;
        }
        return num / den;
    };
}

// Multiset counts (c_0..c_{N-1}) with sum N, enumerated recursively.
inline void enumerate_multisets(std::size_t n, std::size_t slot,
                                std::size_t left, std::vector<std::size_t>& c,
                                const std::function<void(
                                    const std::vector<std::size_t>&)>& fn) {
    if (slot + 1 == n) {
        c[slot] = left;
        fn(c);
        return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
        c[slot] = k;
        enumerate_multisets(n, slot + 1, left - k, c, fn);
    }
}

inline double multinomial(const std::vector<std::size_t>& counts) {
    double total = 0.0;
    double log_num = 0.0;
    std::size_t n = std::accumulate(counts.begin(), counts.end(),
                                    std::size_t{0});
    log_num = std::lgamma(double(n + 1));
    for (auto c : counts) log_num -= std::lgamma(double(c + 1));
    total = std::exp(log_num);
    return std::round(total);
}

} // namespace detail

// True single-cycle (M = N) variance of each scheme's estimator, computed
// by quadrature; the index-sequence sums for R2/N2 are enumerated exactly.
// For M = kN the estimator averages k independent cycles, so divide by k.
template <class Set>
double analytic_variance(const MisScheme& scheme, const Target& target,
                         const Set& proposals) {
    const std::size_t N = proposals.size();
    const double lo = proposals.domain_lo();
    const double hi = proposals.domain_hi();
    const double I = target.integral;
    const auto& f = target.eval;

    auto integ = [&](auto&& g) { return integrate(g, lo, hi); };
    auto q = [&](std::size_t k, double x) { return proposals.pdf(k, x); };
    auto psi = [&](double x) { return proposals.mixture_pdf(x); };
    double dN = double(N);

    switch (scheme.tag()) {
    case SchemeTag::R1:
    case SchemeTag::N1: {
        double acc = 0.0;
        for (std::size_t k = 0; k < N; ++k)
            acc += integ(detail::guarded_ratio(
                [&](double x) { double v = f(x); return v * v; },
                [&, k](double x) { return q(k, x); }));
        return acc / (dN * dN) - I * I / dN;
    }
    case SchemeTag::R3: {
        double F = integ(detail::guarded_ratio(
            [&](double x) { double v = f(x); return v * v; }, psi));
        return (F - I * I) / dN;
    }
    case SchemeTag::N3: {
        double F = integ(detail::guarded_ratio(
            [&](double x) { double v = f(x); return v * v; }, psi));
        double acc = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            double a = integ(detail::guarded_ratio(
                [&, k](double x) { return f(x) * q(k, x); }, psi));
            acc += a * a;
        }
        return F / dN - acc / (dN * dN);
    }
    case SchemeTag::R2: {
        if (N > 6)
            throw capability_error(
                "analytic_variance: R2 enumeration limited to N <= 6");
        // Both terms depend on the index sequence only through its
        // multiset, so enumerate multisets with multinomial weights
        // instead of all N^N sequences.
        double var = 0.0;
        std::vector<std::size_t> counts(N);
        std::function<void(const std::vector<std::size_t>&)> visit =
            [&](const std::vector<std::size_t>& c) {
                auto phi = [&](double x) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < N; ++k)
                        if (c[k]) s += double(c[k]) * q(k, x);
                    return s / dN;
                };
                double first = integ(detail::guarded_ratio(
                    [&](double x) { double v = f(x); return v * v; }, phi));
                double second = 0.0;
                for (std::size_t k = 0; k < N; ++k) {
                    if (!c[k]) continue;
                    double b = integ(detail::guarded_ratio(
                        [&, k](double x) { return f(x) * q(k, x); }, phi));
                    second += double(c[k]) * b * b;
                }
                double weight = detail::multinomial(c) / std::pow(dN, dN);
                var += weight * (first / dN - second / (dN * dN));
            };
        detail::enumerate_multisets(N, 0, N, counts, visit);
        return var;
    }
    case SchemeTag::N2: {
        if (N > 6)
            throw capability_error(
                "analytic_variance: N2 enumeration limited to N <= 6");
        // Per (index, remaining-set) moments, cached by bitmask.
        std::map<std::pair<std::size_t, std::uint32_t>,
                 std::pair<double, double>>
            cache;
        auto moments = [&](std::size_t k, std::uint32_t mask) {
            auto it = cache.find({k, mask});
            if (it != cache.end()) return it->second;
            double m = double(std::popcount(mask));
            auto cond = [&, mask, m](double x) {
                double s = 0.0;
                for (std::size_t j = 0; j < N; ++j)
                    if (mask & (1u << j)) s += q(j, x);
                return s / m;
            };
            double s2 = integ(detail::guarded_ratio(
                [&, k](double x) { double v = f(x); return v * v * q(k, x); },
                [&](double x) { double c = cond(x); return c * c; }));
            double c1 = integ(detail::guarded_ratio(
                [&, k](double x) { return f(x) * q(k, x); }, cond));
            auto val = std::make_pair(s2, c1);
            cache.emplace(std::make_pair(k, mask), val);
            return val;
        };
        std::vector<std::size_t> perm(N);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        double total = 0.0;
        double nperm = 0.0;
        do {
            std::uint32_t mask = (1u << N) - 1u;
            double ssum = 0.0, csum = 0.0, c2sum = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                auto [s2, c1] = moments(perm[n], mask);
                ssum += s2;
                csum += c1;
                c2sum += c1 * c1;
                mask &= ~(1u << perm[n]);
            }
            total += (ssum + csum * csum - c2sum) / (dN * dN);
            nperm += 1.0;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return total / nperm - I * I;
    }
    }
    throw std::logic_error("analytic_variance: bad tag");
}

} // namespace gmis
