#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gmis {

// Kahan-compensated running sum; keeps parallel-reduced results identical
// to the serial order as long as values are fed in a fixed order.
class KahanSum {
public:
    void add(double v) {
        double y = v - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0, c_ = 0.0;
};

// Mean/variance accumulator (Welford).
class RunningStats {
public:
    void add(double v) {
        ++n_;
        double d = v - mean_;
        mean_ += d / double(n_);
        m2_ += d * (v - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const {
        return n_ > 1 ? m2_ / double(n_ - 1) : 0.0;
    }
    double standard_error() const {
        return n_ > 0 ? std::sqrt(variance() / double(n_)) : 0.0;
    }
    // Std. error of the sample variance itself, Gaussian approximation.
    double variance_standard_error() const {
        return n_ > 1 ? variance() * std::sqrt(2.0 / double(n_ - 1)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
};

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

// Upper regularized incomplete gamma Q(a,x).
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad args");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

// Chi-square upper tail probability with k degrees of freedom.
inline double chi_square_p_value(double statistic, int dof) {
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

} // namespace gmis
