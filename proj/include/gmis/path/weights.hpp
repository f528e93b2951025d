#pragma once

#include <cmath>
#include <stdexcept>

namespace gmis {

class singularity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Connection/merging sample-count exchange rate: eta = (n_vm/n_vc) * pi * r^2.
inline double eta_vcm(std::size_t n_vc, std::size_t n_vm, double r) {
    if (n_vc < 1 || !(r > 0.0))
        throw std::invalid_argument("eta_vcm: need n_vc >= 1 and r > 0");
    return double(n_vm) / double(n_vc) * 3.14159265358979323846 * r * r;
}

// One step of the light-side vertex-connection weight accumulator.
// First vertex:  w0 = rev/fwd.
// Later vertex:  w  = rev * (eta + 1/fwd + prev/fwd).
// Pass eta = 0 for vertices where merging cannot happen (specular, merging
// disabled, or path endpoints).
inline double vc_weight_step(double prev, double pdf_forward,
                             double pdf_reverse, double eta, bool is_first) {
    if (!(pdf_forward > 0.0))
        throw singularity_error("vc_weight_step: zero forward pdf");
    if (is_first) return pdf_reverse / pdf_forward;
    return pdf_reverse * (eta + 1.0 / pdf_forward + prev / pdf_forward);
}

// One step of the vertex-merging weight accumulator.
// First merge vertex: w1 = (1/fwd1) * (1/eta + rev0 / (eta * fwd0)).
// Later vertices:     w  = (1/fwd)  * (1/eta + rev_prev * (1 + prev)).
// The published recursion multiplies by the forward pdf here; that breaks
// the partition of unity, so the reciprocal (which restores it and matches
// the connection-side accumulator algebra) is used.
inline double vm_weight_step(double prev, double pdf_forward,
                             double pdf_reverse_prev, double eta,
                             bool is_first, double pdf_reverse0 = 0.0,
                             double pdf_forward0 = 0.0) {
    if (!(eta > 0.0))
        throw singularity_error(
            "vm_weight_step: eta must be positive (merging disabled paths "
            "must bypass the merging accumulator)");
    if (!(pdf_forward > 0.0))
        throw singularity_error("vm_weight_step: zero forward pdf");
    if (is_first) {
        if (!(pdf_forward0 > 0.0))
            throw singularity_error("vm_weight_step: zero origin pdf");
        return (1.0 / pdf_forward) *
               (1.0 / eta + pdf_reverse0 / (eta * pdf_forward0));
    }
    return (1.0 / pdf_forward) *
           (1.0 / eta + pdf_reverse_prev * (1.0 + prev));
}

// Closes the two subpath accumulators of whichever technique is being
// weighted: weight = 1 / (1 + w_light + w_camera), in (0, 1].
inline double final_mis_weight(double w_light, double w_camera) {
    if (w_light < 0.0 || w_camera < 0.0)
        throw std::logic_error("final_mis_weight: negative accumulator");
    return 1.0 / (1.0 + w_light + w_camera);
}

} // namespace gmis
