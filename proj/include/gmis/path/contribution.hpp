#pragma once

#include <cmath>
#include <vector>

#include "gmis/scene/vec.hpp"

namespace gmis {

// Geometry factor between two surface points with the given normals;
// `visible` carries the mutual visibility already resolved by the caller.
// Degenerate (zero-length) segments yield zero and set `degenerate`.
inline double geometry_term(const Vec3& pa, const Vec3& na, const Vec3& pb,
                            const Vec3& nb, bool visible, bool* degenerate
                            = nullptr) {
    if (degenerate) *degenerate = false;
    if (!visible) return 0.0;
    Vec3 d = pb - pa;
    double dist2 = length_squared(d);
    if (dist2 < 1e-20) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    Vec3 w = d / std::sqrt(dist2);
    return std::abs(dot(na, w)) * std::abs(dot(nb, w)) / dist2;
}

// A complete transport path stored light-to-camera.
struct PathVertex {
    Vec3 position;
    Vec3 normal;
    Rgb scatter;  // BRDF value at this vertex (interior vertices only)
};

struct FullPath {
    Rgb emitted;            // radiance leaving the light vertex
    double importance = 1;  // sensor response at the camera vertex
    std::vector<PathVertex> vertices;  // [light, interior..., camera]
};

// Measurement-equation integrand of the path, evaluated non-incrementally:
// Le * G0 * prod_i (f_i * G_i) * We. Each segment is assumed visible.
inline Rgb path_contribution(const FullPath& path) {
    const auto& v = path.vertices;
    if (v.size() < 2) return Rgb(0.0);
    Rgb c = path.emitted;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        c = c * geometry_term(v[i].position, v[i].normal, v[i + 1].position,
                              v[i + 1].normal, true);
        if (i + 1 < v.size() - 1) c = c * v[i + 1].scatter;
    }
    return c * path.importance;
}

} // namespace gmis
