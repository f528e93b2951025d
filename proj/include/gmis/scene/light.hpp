#pragma once

#include <cmath>

#include "gmis/core/rng.hpp"
#include "gmis/scene/geometry.hpp"
#include "gmis/scene/vec.hpp"

namespace gmis {

// Result of sampling a light as seen from a shading point.
struct LightSample {
    Vec3 dir_to_light;       // unit, from the shading point
    double distance = 0.0;
    Rgb radiance;            // already divided by direct_pdf_w
    double direct_pdf_w = 0.0;    // solid-angle pdf of this direct sample
    double emission_pdf_w = 0.0;  // area pdf x direction pdf of emitting it
    double cos_at_light = 0.0;
    bool delta = false;
};

// Result of emitting a light path vertex.
struct LightEmission {
    Vec3 origin;
    Vec3 dir;
    Rgb energy;              // already divided by emission_pdf_w
    double emission_pdf_w = 0.0;
    double direct_pdf_a = 0.0;    // area pdf of picking the origin directly
    double cos_at_light = 0.0;
    bool delta_dir = false;
};

struct Light {
    enum class Kind { Area, Directional };

    Kind kind = Kind::Area;
    // Area: corner + two edge vectors spanning a parallelogram.
    Vec3 corner, edge1, edge2;
    Rgb radiance;            // area: emitted radiance; directional: irradiance
    Vec3 direction;          // directional: unit travel direction of light
    int shape = -1;          // emissive quad's shape index (area lights)

    double area() const { return length(cross(edge1, edge2)); }
    Vec3 normal() const { return normalize(cross(edge1, edge2)); }

    // Total emitted power (used for light picking); the scene radius feeds
    // the virtual emission disc of directional lights.
    double power(double scene_radius) const {
        if (kind == Kind::Area)
            return area() * kPi * luminance(radiance);
        return kPi * scene_radius * scene_radius * luminance(radiance);
    }

    LightSample illuminate(const Vec3& point, RngStream& rng,
                           double scene_radius) const {
        LightSample s;
        if (kind == Kind::Directional) {
            s.dir_to_light = -direction;
            s.distance = 2.0 * scene_radius;
            s.radiance = radiance;
            s.direct_pdf_w = 1.0;
            s.emission_pdf_w = disc_pdf_a(scene_radius);
            s.cos_at_light = 1.0;
            s.delta = true;
            return s;
        }
        double u1 = rng.next_double(), u2 = rng.next_double();
        Vec3 p = corner + edge1 * u1 + edge2 * u2;
        Vec3 d = p - point;
        double dist2 = length_squared(d);
        s.distance = std::sqrt(dist2);
        s.dir_to_light = d / s.distance;
        Vec3 n = normal();
        double cos_l = dot(n, -s.dir_to_light);
        if (cos_l <= 0.0) return LightSample{};  // behind the emitter
        s.cos_at_light = cos_l;
        double pdf_a = 1.0 / area();
        s.direct_pdf_w = pdf_a * dist2 / cos_l;
        s.emission_pdf_w = pdf_a * cos_l / kPi;
        s.radiance = radiance / s.direct_pdf_w;
        return s;
    }

    LightEmission emit(RngStream& rng, const Vec3& scene_center,
                       double scene_radius) const {
        LightEmission e;
        if (kind == Kind::Directional) {
            // point on a disc just outside the scene, facing along the light
            Frame frame(direction);
            Vec3 d = sample_disc(rng) * scene_radius;
            e.origin = scene_center + frame.to_world(d)
                     - direction * (2.0 * scene_radius);
            e.dir = direction;
            e.emission_pdf_w = disc_pdf_a(scene_radius);
            e.direct_pdf_a = 1.0;
            e.cos_at_light = 1.0;
            e.delta_dir = true;
            e.energy = radiance / e.emission_pdf_w;
            return e;
        }
        double u1 = rng.next_double(), u2 = rng.next_double();
        e.origin = corner + edge1 * u1 + edge2 * u2;
        Vec3 n = normal();
        // cosine-weighted direction about the emitter normal
        double v1 = rng.next_double(), v2 = rng.next_double();
        double r = std::sqrt(v1), phi = 2.0 * kPi * v2;
        Frame frame(n);
        Vec3 local{r * std::cos(phi), r * std::sin(phi),
                   std::sqrt(std::max(0.0, 1.0 - v1))};
        e.dir = frame.to_world(local);
        e.cos_at_light = std::max(1e-12, local.z);
        double pdf_a = 1.0 / area();
        e.emission_pdf_w = pdf_a * e.cos_at_light / kPi;
        e.direct_pdf_a = pdf_a;
        e.energy = radiance * (kPi / pdf_a);  // L * cos / emission_pdf
        return e;
    }

    // Solid-angle density at `p` of the sample-a-point-then-aim proposal;
    // zero when the ray along `dir` misses the emitting quad or approaches
    // it from behind.
    double direction_pdf_w(const Vec3& p, const Vec3& dir) const {
        if (kind != Kind::Area) return 0.0;
        Vec3 n = normal();
        double cos_l = dot(n, -dir);
        if (cos_l <= 1e-9) return 0.0;
        double t = dot(n, corner - p) / dot(n, dir);
        if (!(t > kRayEpsilon)) return 0.0;
        Vec3 d = p + dir * t - corner;
        double bb = dot(edge1, edge1), bc = dot(edge1, edge2),
               cc = dot(edge2, edge2);
        double det = bb * cc - bc * bc;
        double u = (dot(d, edge1) * cc - dot(d, edge2) * bc) / det;
        double v = (dot(d, edge2) * bb - dot(d, edge1) * bc) / det;
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return 0.0;
        return t * t / (cos_l * area());
    }

    // Radiance toward `dir` when a camera ray hits the emissive quad.
    Rgb hit_radiance(const Vec3& dir, double& direct_pdf_a,
                     double& emission_pdf_w) const {
        Vec3 n = normal();
        double cos_l = dot(n, -dir);
        if (cos_l <= 0.0) {
            direct_pdf_a = emission_pdf_w = 0.0;
            return Rgb(0.0);
        }
        direct_pdf_a = 1.0 / area();
        emission_pdf_w = direct_pdf_a * cos_l / kPi;
        return radiance;
    }

private:
    static double disc_pdf_a(double scene_radius) {
        return 1.0 / (kPi * scene_radius * scene_radius);
    }
    static Vec3 sample_disc(RngStream& rng) {
        double u1 = rng.next_double(), u2 = rng.next_double();
        double r = std::sqrt(u1), phi = 2.0 * kPi * u2;
        return {r * std::cos(phi), r * std::sin(phi), 0.0};
    }
};

// Pinhole camera; the field of view is horizontal.
struct Camera {
    Vec3 position;
    Vec3 forward, right, up;
    int res_x = 512, res_y = 512;
    double half_w = 1.0, half_h = 1.0;  // image plane half-extents at z=1
    double image_plane_dist = 1.0;      // in pixel units

    void setup(const Vec3& pos, const Vec3& lookat, const Vec3& up_hint,
               double fov_deg, int rx, int ry) {
        position = pos;
        forward = normalize(lookat - pos);
        right = normalize(cross(forward, up_hint));
        up = cross(right, forward);
        res_x = rx;
        res_y = ry;
        half_w = std::tan(0.5 * fov_deg * kPi / 180.0);
        half_h = half_w * double(ry) / double(rx);
        image_plane_dist = double(rx) / (2.0 * half_w);
    }

    // Raster coordinates in [0,res_x) x [0,res_y); y grows downward.
    Ray generate_ray(double px, double py) const {
        double ndc_x = 2.0 * px / res_x - 1.0;
        double ndc_y = 1.0 - 2.0 * py / res_y;
        Vec3 dir = normalize(forward + right * (ndc_x * half_w)
                                     + up * (ndc_y * half_h));
        return {position, dir};
    }

    bool world_to_raster(const Vec3& p, double& px, double& py) const {
        Vec3 v = p - position;
        double z = dot(v, forward);
        if (z <= 0.0) return false;
        double x = dot(v, right) / (z * half_w);
        double y = dot(v, up) / (z * half_h);
        px = (x + 1.0) * 0.5 * res_x;
        py = (1.0 - y) * 0.5 * res_y;
        return px >= 0.0 && px < res_x && py >= 0.0 && py < res_y;
    }

    // Pdf (per unit raster area mapped to solid angle) of a ray toward `dir`.
    double solid_angle_pdf(const Vec3& dir) const {
        double cos_c = dot(dir, forward);
        if (cos_c <= 0.0) return 0.0;
        double plane_dist = image_plane_dist / cos_c;
        return plane_dist * plane_dist / cos_c;
    }
};

} // namespace gmis
