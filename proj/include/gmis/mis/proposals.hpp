#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gmis/core/quadrature.hpp"
#include "gmis/core/rng.hpp"

namespace gmis {

// One-dimensional sampling density. Built-in families are uniform and
// normal; that is enough for every variance experiment while keeping the
// quadrature oracles simple.
class Proposal1D {
public:
    static Proposal1D uniform(double a, double b) {
        if (!(a < b)) throw std::invalid_argument("uniform: need a < b");
        Proposal1D p;
        p.kind_ = Kind::Uniform;
        p.a_ = a;
        p.b_ = b;
        return p;
    }
    static Proposal1D normal(double mu, double sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("normal: sigma <= 0");
        Proposal1D p;
        p.kind_ = Kind::Normal;
        p.a_ = mu;
        p.b_ = sigma;
        return p;
    }

    double pdf(double x) const {
        switch (kind_) {
        case Kind::Uniform:
            return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
        case Kind::Normal: {
            double z = (x - a_) / b_;
            return std::exp(-0.5 * z * z) / (b_ * std::sqrt(2.0 * kPi));
        }
        }
        return 0.0;
    }

    double sample(RngStream& rng) const {
        switch (kind_) {
        case Kind::Uniform:
            return a_ + (b_ - a_) * rng.next_double();
        case Kind::Normal:
            return a_ + b_ * rng.next_normal();
        }
        return 0.0;
    }

    // Interval outside which the density is (numerically) zero.
    std::pair<double, double> support() const {
        if (kind_ == Kind::Uniform) return {a_, b_};
        return {a_ - 12.0 * b_, a_ + 12.0 * b_};
    }

private:
    enum class Kind { Uniform, Normal };
    Kind kind_ = Kind::Uniform;
    double a_ = 0.0, b_ = 1.0;
};

// Two-dimensional axis-aligned product of two 1D densities.
class Proposal2D {
public:
    using Point = std::pair<double, double>;

    Proposal2D(Proposal1D x, Proposal1D y)
        : x_(std::move(x)), y_(std::move(y)) {}

    double pdf(const Point& p) const {
        return x_.pdf(p.first) * y_.pdf(p.second);
    }
    Point sample(RngStream& rng) const {
        double px = x_.sample(rng);
        double py = y_.sample(rng);
        return {px, py};
    }
    const Proposal1D& x() const { return x_; }
    const Proposal1D& y() const { return y_; }

private:
    Proposal1D x_, y_;
};

namespace detail {

inline bool contains(double lo, double hi, double x) {
    return x >= lo && x <= hi;
}

} // namespace detail

// Ordered set of N proposal densities over a common interval.
// The equal-weight mixture of the members is the density psi used by the
// mixture-weighting schemes.
template <class Proposal = Proposal1D,
          class Point = decltype(std::declval<const Proposal&>().sample(
              std::declval<RngStream&>()))>
class ProposalSetT {
public:
    using point_type = Point;

    explicit ProposalSetT(std::vector<Proposal> proposals)
        : proposals_(std::move(proposals)) {
        if (proposals_.empty())
            throw std::invalid_argument("ProposalSet: need N >= 1");
    }

    std::size_t size() const { return proposals_.size(); }
    const Proposal& operator[](std::size_t i) const { return proposals_[i]; }

    double pdf(std::size_t i, const Point& x) const {
        return proposals_[i].pdf(x);
    }
    Point sample(std::size_t i, RngStream& rng) const {
        return proposals_[i].sample(rng);
    }

    // Equal-weight mixture density psi(x) = (1/N) sum_n p_n(x).
    double mixture_pdf(const Point& x) const {
        double sum = 0.0;
        for (const auto& p : proposals_) sum += p.pdf(x);
        return sum / double(proposals_.size());
    }

private:
    std::vector<Proposal> proposals_;
};

// 1D specialization carries interval bounds and a normalization check.
class ProposalSet : public ProposalSetT<Proposal1D, double> {
public:
    explicit ProposalSet(std::vector<Proposal1D> proposals)
        : ProposalSetT(std::move(proposals)) {
        lo_ = 1e300;
        hi_ = -1e300;
        for (std::size_t i = 0; i < size(); ++i) {
            auto [a, b] = (*this)[i].support();
            lo_ = std::min(lo_, a);
            hi_ = std::max(hi_, b);
        }
        for (std::size_t i = 0; i < size(); ++i) {
            double mass =
                integrate([&](double x) { return pdf(i, x); }, lo_, hi_);
            if (std::abs(mass - 1.0) > 1e-6)
                throw std::invalid_argument(
                    "ProposalSet: member density does not integrate to 1");
        }
    }

    double domain_lo() const { return lo_; }
    double domain_hi() const { return hi_; }
    bool in_domain(double x) const { return detail::contains(lo_, hi_, x); }

    double mixture_pdf(double x) const {
        if (!in_domain(x))
            throw std::domain_error("mixture_pdf: x outside domain");
        return ProposalSetT::mixture_pdf(x);
    }

private:
    double lo_ = 0.0, hi_ = 1.0;
};

// Free-function form of the mixture density.
inline double mixture_pdf(const ProposalSet& proposals, double x) {
    return proposals.mixture_pdf(x);
}

} // namespace gmis
