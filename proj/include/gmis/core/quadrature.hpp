#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace gmis {

// Adaptive Simpson quadrature with recursion-depth cap.
// Good to ~1e-12 on the smooth integrands used here.
namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm,
                    double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adapt(const F& f, double a, double b, double fa, double fm, double fb,
             double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson_step(f, a, m, fa, flm, fm);
    double right = simpson_step(f, m, b, fm, frm, fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-11,
                 int max_depth = 48) {
    if (!(a < b)) throw std::invalid_argument("integrate: bad interval");
    // Split at interior points first; integrands here can have kinks at
    // proposal-support edges.
    const int pieces = 16;
    double total = 0.0;
    double h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        double lo = a + i * h, hi = a + (i + 1) * h;
        double m = 0.5 * (lo + hi);
        double flo = f(lo), fm = f(m), fhi = f(hi);
        double whole = detail::simpson_step(f, lo, hi, flo, fm, fhi);
        total += detail::adapt(f, lo, hi, flo, fm, fhi, whole, tol / pieces,
                               max_depth);
    }
    return total;
}

} // namespace gmis
