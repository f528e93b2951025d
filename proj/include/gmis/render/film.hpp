#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gmis/io/pfm.hpp"
#include "gmis/scene/vec.hpp"

namespace gmis {

// Accumulates one radiance buffer per iteration and folds finished
// iterations into a running mean. Non-finite contributions are dropped and
// counted instead of poisoning the image.
class Film {
public:
    Film(int width, int height) : width_(width), height_(height) {
        iter_.resize(std::size_t(width) * height);
        mean_.resize(iter_.size());
        lum2_.resize(iter_.size(), 0.0);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    long iterations() const { return iterations_; }
    long rejected() const { return rejected_; }

    void start_iteration() {
        std::fill(iter_.begin(), iter_.end(), Rgb(0.0));
    }

    void add(int x, int y, const Rgb& c) {
        if (x < 0 || x >= width_ || y < 0 || y >= height_) return;
        if (!c.is_finite()) {
            ++rejected_;
            return;
        }
        iter_[std::size_t(y) * width_ + x] += c;
    }

    void end_iteration() {
        double k = double(iterations_);
        for (std::size_t i = 0; i < mean_.size(); ++i) {
            mean_[i] += (iter_[i] - mean_[i]) / (k + 1.0);
            double l = luminance(iter_[i]);
            lum2_[i] += l * l;
        }
        ++iterations_;
    }

    Image image() const {
        Image img;
        img.width = width_;
        img.height = height_;
        img.pixels = mean_;
        return img;
    }

    double mean_luminance() const {
        double s = 0.0;
        for (const Rgb& c : mean_) s += luminance(c);
        return s / double(mean_.size());
    }

    // Across-iteration sample variance of one pixel's luminance.
    double luminance_variance_at(std::size_t i) const {
        if (iterations_ < 2) return 0.0;
        double n = double(iterations_);
        double m = luminance(mean_[i]);
        return std::max(0.0, (lum2_[i] - n * m * m) / (n - 1.0));
    }

    // Across-iteration sample variance of per-pixel luminance, averaged
    // over the image; a cheap noise figure for the stats sidecar.
    double luminance_variance() const {
        if (iterations_ < 2) return 0.0;
        double s = 0.0;
        double n = double(iterations_);
        for (std::size_t i = 0; i < mean_.size(); ++i) {
            double m = luminance(mean_[i]);
            double v = (lum2_[i] - n * m * m) / (n - 1.0);
            s += std::max(0.0, v);
        }
        return s / double(mean_.size());
    }

private:
    int width_, height_;
    std::vector<Rgb> iter_, mean_;
    std::vector<double> lum2_;
    long iterations_ = 0;
    long rejected_ = 0;
};

} // namespace gmis
