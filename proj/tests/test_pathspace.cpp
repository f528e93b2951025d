#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gmis/core/rng.hpp"
#include "gmis/path/weights.hpp"

using namespace gmis;

namespace {

// Abstract full path: forward/reverse area pdfs per vertex, no geometry.
struct PdfChain {
    std::vector<double> fwd;  // light-side generation pdf per vertex
    std::vector<double> rev;  // camera-side generation pdf per vertex
    std::size_t vertices() const { return fwd.size(); }
    std::size_t edges() const { return fwd.size() - 1; }
};

PdfChain random_chain(std::size_t vertices, RngStream& rng) {
    PdfChain c;
    for (std::size_t i = 0; i < vertices; ++i) {
        c.fwd.push_back(0.2 + 2.8 * rng.next_double());
        c.rev.push_back(0.2 + 2.8 * rng.next_double());
    }
    return c;
}

// Full-path pdf of the connection technique with s light vertices.
double connection_pdf(const PdfChain& c, std::size_t s) {
    double p = 1.0;
    for (std::size_t i = 0; i < s; ++i) p *= c.fwd[i];
    for (std::size_t i = s; i < c.vertices(); ++i) p *= c.rev[i];
    return p;
}

// Full-path pdf of merging at interior vertex m (vertex generated twice).
double merge_pdf(const PdfChain& c, std::size_t m, double eta) {
    return eta * connection_pdf(c, m) * c.fwd[m];
}

// Light-side connection accumulator at vertex `last`, built by recursion.
double light_vc_accumulator(const PdfChain& c, std::size_t last, double eta) {
    std::size_t j = c.edges();
    double w = vc_weight_step(0.0, c.fwd[0], c.rev[0], 0.0, true);
    for (std::size_t i = 1; i <= last; ++i) {
        double eta_i = (i >= 1 && i + 1 <= j) ? eta : 0.0;
        w = vc_weight_step(w, c.fwd[i], c.rev[i], eta_i, false);
    }
    return w;
}

// Camera-side connection accumulator at vertex `first` (counts techniques
// placing the connection edge below it), mirrored recursion.
double camera_vc_accumulator(const PdfChain& c, std::size_t first,
                             double eta) {
    std::size_t j = c.edges();
    double w = vc_weight_step(0.0, c.rev[j], c.fwd[j], 0.0, true);
    for (std::size_t i = j - 1; i + 1 > first; --i) {
        double eta_i = (i >= 1 && i + 1 <= j) ? eta : 0.0;
        w = vc_weight_step(w, c.rev[i], c.fwd[i], eta_i, false);
    }
    return w;
}

double light_vm_accumulator(const PdfChain& c, std::size_t m, double eta) {
    double w = vm_weight_step(0.0, c.fwd[1], 0.0, eta, true, c.rev[0],
                              c.fwd[0]);
    for (std::size_t i = 2; i <= m; ++i)
        w = vm_weight_step(w, c.fwd[i], c.rev[i - 1], eta, false);
    return w;
}

double camera_vm_accumulator(const PdfChain& c, std::size_t m, double eta) {
    std::size_t j = c.edges();
    double w = vm_weight_step(0.0, c.rev[j - 1], 0.0, eta, true, c.fwd[j],
                              c.rev[j]);
    for (std::size_t i = j - 2; i + 1 > m; --i)
        w = vm_weight_step(w, c.rev[i], c.fwd[i + 1], eta, false);
    return w;
}

} // namespace

TEST_CASE("eta_vcm") {
    CHECK(eta_vcm(1, 1, 1.0) == doctest::Approx(3.14159265358979).epsilon(1e-12));
    CHECK(eta_vcm(1, 2, 0.1) == doctest::Approx(0.0628318530717959).epsilon(1e-12));
    CHECK_THROWS_AS(eta_vcm(0, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(eta_vcm(1, 1, 0.0), std::invalid_argument);
}

TEST_CASE("weight step substitutions") {
    SUBCASE("first connection step with equal pdfs") {
        CHECK(vc_weight_step(0.0, 2.0, 2.0, 0.5, true) == 1.0);
    }
    SUBCASE("unit step with merging disabled") {
        CHECK(vc_weight_step(0.0, 1.0, 1.0, 0.0, false) == 1.0);
    }
    SUBCASE("zero forward pdf is singular") {
        CHECK_THROWS_AS(vc_weight_step(0.0, 0.0, 1.0, 0.0, false),
                        singularity_error);
    }
    SUBCASE("first merging step, unit pdfs and eta") {
        // fwd1 = eta = 1, rev0 = fwd0
        CHECK(vm_weight_step(0.0, 1.0, 0.0, 1.0, true, 0.7, 0.7) == 2.0);
    }
    SUBCASE("vanishing previous reverse pdf") {
        double eta = 0.25;
        CHECK(vm_weight_step(3.0, 1.0, 0.0, eta, false) ==
              doctest::Approx(1.0 / eta));
    }
    SUBCASE("zero eta is singular for merging") {
        CHECK_THROWS_AS(vm_weight_step(0.0, 1.0, 1.0, 0.0, false),
                        singularity_error);
    }
    SUBCASE("final weight") {
        CHECK(final_mis_weight(0.0, 0.0) == 1.0);
        CHECK(final_mis_weight(1.0, 0.0) == 0.5);
        CHECK(final_mis_weight(0.5, 0.5) == 0.5);
        CHECK_THROWS_AS(final_mis_weight(-1.0, 0.0), std::logic_error);
    }
}

TEST_CASE("recursion matches non-incremental symbolic expansion") {
    // Expansion oracle: closed-form sums of pdf-ratio products, computed
    // from scratch rather than incrementally.
    RngStream rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t vertices = 2 + rng.next_below(5);  // chain length <= 6
        auto c = random_chain(vertices, rng);
        double eta = 0.05 + 2.0 * rng.next_double();
        std::size_t j = c.edges();

        auto ratio_product = [&](std::size_t a, std::size_t b) {
            double p = 1.0;
            for (std::size_t k = a; k <= b; ++k) p *= c.rev[k] / c.fwd[k];
            return p;
        };
        for (std::size_t last = 0; last <= j; ++last) {
            double expect = 0.0;
            for (std::size_t m = 0; m <= last; ++m)
                expect += ratio_product(m, last);
            for (std::size_t m = 1; m <= last && m + 1 <= j; ++m) {
                double t = eta * c.rev[m];
                if (m + 1 <= last) t *= ratio_product(m + 1, last);
                expect += t;
            }
            double got = light_vc_accumulator(c, last, eta);
            CHECK(got == doctest::Approx(expect).epsilon(1e-12));
        }
        for (std::size_t m = 1; m + 1 <= j; ++m) {
            double expect = 1.0;
            for (std::size_t s = 0; s < m; ++s) expect += ratio_product(s, m - 1);
            for (std::size_t mm = 1; mm < m; ++mm) {
                double t = eta * c.rev[mm];
                if (mm + 1 <= m - 1) t *= ratio_product(mm + 1, m - 1);
                expect += t;
            }
            expect /= eta * c.fwd[m];
            double got = light_vm_accumulator(c, m, eta);
            CHECK(got == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("partition of unity over all techniques") {
    RngStream rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t vertices = 3 + rng.next_below(3);  // 3..5 vertices
        auto c = random_chain(vertices, rng);
        std::size_t j = c.edges();
        bool merging = trial % 2 == 0;
        double eta = merging ? 0.05 + 2.0 * rng.next_double() : 0.0;

        // Brute-force oracle: every technique's full-path pdf.
        double denom = 0.0;
        for (std::size_t s = 0; s <= j + 1; ++s)
            denom += connection_pdf(c, s);
        if (merging)
            for (std::size_t m = 1; m + 1 <= j; ++m)
                denom += merge_pdf(c, m, eta);

        double sum = 0.0;
        for (std::size_t s = 0; s <= j + 1; ++s) {
            double wl = s == 0 ? 0.0 : light_vc_accumulator(c, s - 1, eta);
            double wc = s == j + 1 ? 0.0 : camera_vc_accumulator(c, s, eta);
            double w = final_mis_weight(wl, wc);
            CHECK(w == doctest::Approx(connection_pdf(c, s) / denom)
                           .epsilon(1e-11));
            sum += w;
        }
        if (merging) {
            for (std::size_t m = 1; m + 1 <= j; ++m) {
                double wl = light_vm_accumulator(c, m, eta);
                double wc = camera_vm_accumulator(c, m, eta);
                double w = final_mis_weight(wl, wc);
                CHECK(w == doctest::Approx(merge_pdf(c, m, eta) / denom)
                               .epsilon(1e-11));
                sum += w;
            }
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

#include "gmis/path/contribution.hpp"

TEST_CASE("geometry factor on a hand-checked configuration") {
    // facing unit patches three apart along z: G = 1 * 1 / 9
    Vec3 pa{0, 0, 0}, na{0, 0, 1};
    Vec3 pb{0, 0, 3}, nb{0, 0, -1};
    CHECK(geometry_term(pa, na, pb, nb, true) ==
          doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    // tilting one patch by 60 degrees halves the factor
    Vec3 nt = normalize(Vec3{std::sqrt(3.0) / 2.0, 0, 0.5});
    CHECK(geometry_term(pa, nt, pb, nb, true) ==
          doctest::Approx(0.5 / 9.0).epsilon(1e-12));
    // occlusion zeroes it
    CHECK(geometry_term(pa, na, pb, nb, false) == 0.0);
    // a collapsed segment is flagged, not divided by zero
    bool degen = false;
    CHECK(geometry_term(pa, na, pa, na, true, &degen) == 0.0);
    CHECK(degen);
}

TEST_CASE("path integrand equals an independently expanded product") {
    RngStream rng(4242);
    for (int trial = 0; trial < 500; ++trial) {
        FullPath path;
        path.emitted = {0.5 + rng.next_double(), 0.5 + rng.next_double(),
                        0.5 + rng.next_double()};
        path.importance = 0.5 + rng.next_double();
        int n = 2 + int(rng.next_below(5));
        for (int i = 0; i < n; ++i) {
            PathVertex v;
            v.position = {3 * rng.next_double(), 3 * rng.next_double(),
                          3 * rng.next_double() + i};  // spread along z
            v.normal = normalize(Vec3{rng.next_double() - 0.5,
                                      rng.next_double() - 0.5,
                                      rng.next_double() + 0.2});
            v.scatter = {rng.next_double(), rng.next_double(),
                         rng.next_double()};
            path.vertices.push_back(v);
        }
        // expand the product by hand, scalar by scalar
        double expect[3];
        for (int ch = 0; ch < 3; ++ch) expect[ch] = path.emitted[ch];
        for (int i = 0; i + 1 < n; ++i) {
            Vec3 d = path.vertices[i + 1].position - path.vertices[i].position;
            double dist2 = length_squared(d);
            Vec3 w = d / std::sqrt(dist2);
            double g = std::abs(dot(path.vertices[i].normal, w)) *
                       std::abs(dot(path.vertices[i + 1].normal, w)) / dist2;
            for (int ch = 0; ch < 3; ++ch) {
                expect[ch] *= g;
                if (i + 1 < n - 1) expect[ch] *= path.vertices[i + 1].scatter[ch];
            }
        }
        Rgb got = path_contribution(path);
        for (int ch = 0; ch < 3; ++ch) {
            CHECK(got[ch] ==
                  doctest::Approx(expect[ch] * path.importance)
                      .epsilon(1e-10));
        }
    }
    // paths need at least two vertices to carry light
    FullPath stub;
    stub.emitted = {1, 1, 1};
    CHECK(path_contribution(stub).x == 0.0);
}
