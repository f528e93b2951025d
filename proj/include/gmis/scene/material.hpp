#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "gmis/core/rng.hpp"
#include "gmis/scene/vec.hpp"

namespace gmis {

// Querying a continuous pdf or BRDF value on a perfectly specular material.
class delta_query_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct BsdfSample {
    Vec3 dir;          // sampled incoming direction (world space)
    double pdf = 0.0;  // solid-angle pdf; 1 for specular events
    Rgb value;         // BRDF value (specular: reflectance / |cos|)
    double cos_theta = 0.0;  // |dot(dir, normal)|
    bool specular = false;
};

struct Material {
    enum class Kind { Diffuse, Phong, Mirror, Glass };

    Kind kind = Kind::Diffuse;
    std::string name;
    Rgb albedo{0.5, 0.5, 0.5};
    double param = 0.0;  // Phong exponent, or glass index of refraction

    bool is_delta() const {
        return kind == Kind::Mirror || kind == Kind::Glass;
    }

    // BRDF value for directions on the same side as the shading normal.
    // wo points away from the surface toward the previous vertex, wi toward
    // the sampled/next one.
    Rgb eval(const Vec3& n, const Vec3& wo, const Vec3& wi) const {
        if (is_delta())
            throw delta_query_error("eval on specular material " + name);
        double co = dot(n, wo), ci = dot(n, wi);
        if (co <= 0.0 || ci <= 0.0) return Rgb(0.0);
        switch (kind) {
        case Kind::Diffuse:
            return albedo * (1.0 / kPi);
        case Kind::Phong: {
            Vec3 refl = reflect(wo, n);
            double c = dot(refl, wi);
            if (c <= 0.0) return Rgb(0.0);
            double lobe = (param + 1.0) / (2.0 * kPi) * std::pow(c, param);
            return albedo * lobe;
        }
        default:
            return Rgb(0.0);
        }
    }

    // Solid-angle pdf of sampling wi given wo; symmetric in its arguments
    // for both continuous kinds.
    double pdf(const Vec3& n, const Vec3& wo, const Vec3& wi) const {
        if (is_delta())
            throw delta_query_error("pdf on specular material " + name);
        double co = dot(n, wo), ci = dot(n, wi);
        if (co <= 0.0 || ci <= 0.0) return 0.0;
        switch (kind) {
        case Kind::Diffuse:
            return ci / kPi;
        case Kind::Phong: {
            Vec3 refl = reflect(wo, n);
            double c = dot(refl, wi);
            if (c <= 0.0) return 0.0;
            return (param + 1.0) / (2.0 * kPi) * std::pow(c, param);
        }
        default:
            return 0.0;
        }
    }

    BsdfSample sample(const Vec3& n, const Vec3& wo, RngStream& rng) const {
        BsdfSample s;
        double co = dot(n, wo);
        switch (kind) {
        case Kind::Diffuse: {
            if (co <= 0.0) return s;
            double u1 = rng.next_double(), u2 = rng.next_double();
            double r = std::sqrt(u1), phi = 2.0 * kPi * u2;
            Frame frame(n);
            Vec3 local{r * std::cos(phi), r * std::sin(phi),
                       std::sqrt(std::max(0.0, 1.0 - u1))};
            s.dir = frame.to_world(local);
            s.cos_theta = std::max(0.0, dot(s.dir, n));
            s.pdf = s.cos_theta / kPi;
            s.value = albedo * (1.0 / kPi);
            if (s.pdf <= 0.0) s = BsdfSample{};
            return s;
        }
        case Kind::Phong: {
            if (co <= 0.0) return s;
            double u1 = rng.next_double(), u2 = rng.next_double();
            double c = std::pow(u1, 1.0 / (param + 1.0));
            double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
            double phi = 2.0 * kPi * u2;
            Frame frame(reflect(wo, n));
            Vec3 local{sn * std::cos(phi), sn * std::sin(phi), c};
            s.dir = frame.to_world(local);
            s.cos_theta = dot(s.dir, n);
            if (s.cos_theta <= 0.0) return BsdfSample{};  // lobe leaked below
            s.pdf = (param + 1.0) / (2.0 * kPi) * std::pow(c, param);
            s.value = albedo * s.pdf;
            return s;
        }
        case Kind::Mirror: {
            if (co <= 0.0) return s;
            s.dir = reflect(wo, n);
            s.cos_theta = dot(s.dir, n);
            s.pdf = 1.0;
            s.value = albedo / s.cos_theta;
            s.specular = true;
            return s;
        }
        case Kind::Glass: {
            double ior = param;
            bool entering = co > 0.0;
            Vec3 nl = entering ? n : -n;
            double eta = entering ? 1.0 / ior : ior;
            double ci = std::abs(co);
            double st2 = eta * eta * std::max(0.0, 1.0 - ci * ci);
            double fr = 1.0;
            double ct = 0.0;
            if (st2 < 1.0) {
                ct = std::sqrt(1.0 - st2);
                fr = fresnel_dielectric(ci, ct, eta);
            }
            if (rng.next_double() < fr) {
                s.dir = reflect(wo, nl);
                s.cos_theta = dot(s.dir, nl);
                s.pdf = fr;
                s.value = albedo * (fr / s.cos_theta);
            } else {
                s.dir = normalize(-wo * eta + nl * (eta * ci - ct));
                s.cos_theta = std::abs(dot(s.dir, nl));
                s.pdf = 1.0 - fr;
                s.value = albedo * ((1.0 - fr) / s.cos_theta);
            }
            s.specular = true;
            return s;
        }
        }
        return s;
    }

    static Vec3 reflect(const Vec3& wo, const Vec3& n) {
        return n * (2.0 * dot(n, wo)) - wo;
    }

    // Unpolarized dielectric Fresnel for cos_i/cos_t already resolved;
    // eta is the incident/transmitted index ratio.
    static double fresnel_dielectric(double ci, double ct, double eta) {
        double rp = (eta * ci - ct) / (eta * ci + ct);
        double rs = (ci - eta * ct) / (ci + eta * ct);
        return 0.5 * (rp * rp + rs * rs);
    }
};

} // namespace gmis
