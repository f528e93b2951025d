#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmis/core/rng.hpp"
#include "gmis/path/weights.hpp"
#include "gmis/render/film.hpp"
#include "gmis/render/hashgrid.hpp"
#include "gmis/render/parallel.hpp"
#include "gmis/scene/scene.hpp"

namespace gmis {

enum class IntegratorKind { Bpt, Ppm, Vcm, Gmis };

inline const char* to_string(IntegratorKind k) {
    switch (k) {
    case IntegratorKind::Bpt: return "bpt";
    case IntegratorKind::Ppm: return "ppm";
    case IntegratorKind::Vcm: return "vcm";
    case IntegratorKind::Gmis: return "gmis";
    }
    return "?";
}

inline IntegratorKind integrator_from_string(const std::string& s) {
    if (s == "bpt") return IntegratorKind::Bpt;
    if (s == "ppm") return IntegratorKind::Ppm;
    if (s == "vcm") return IntegratorKind::Vcm;
    if (s == "gmis") return IntegratorKind::Gmis;
    throw std::invalid_argument("unknown integrator '" + s + "'");
}

struct IntegratorConfig {
    IntegratorKind kind = IntegratorKind::Vcm;
    int max_samples = 20;       // per-light-path budget
    int branch = 4;             // continuations per non-specular vertex
    int max_depth = 12;
    double r0_fraction = 0.003; // of the scene bounding-box diagonal
    double alpha = 0.75;        // radius shrink exponent
    std::uint64_t seed = 1;
    int threads = 0;            // 0: GMIS_THREADS env or hardware

    void validate() const {
        if (max_samples < 1)
            throw std::invalid_argument("max_samples must be >= 1");
        if (branch < 1) throw std::invalid_argument("branch must be >= 1");
        if (max_depth < 1)
            throw std::invalid_argument("max_depth must be >= 1");
        if (!(alpha > 0.5 && alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0.5, 1)");
        if (!(r0_fraction > 0.0))
            throw std::invalid_argument("r0_fraction must be positive");
    }
};

struct RenderStats {
    long long rejected = 0;        // non-finite contributions dropped
    long long zero_pdf_drops = 0;  // degenerate continuation samples
    long long light_paths = 0;
    long long light_vertices = 0;  // total samples charged across paths
    long long branch_vertices = 0; // non-specular vertices that branched
    long long branch_children = 0;

    double average_path_length() const {
        return light_paths ? double(light_vertices) / double(light_paths)
                           : 0.0;
    }
    double average_branch_factor() const {
        return branch_vertices
                   ? double(branch_children) / double(branch_vertices)
                   : 1.0;
    }
};

struct LitVertex {
    Vec3 position;
    Vec3 normal;
    Vec3 wo;          // unit, toward the previous vertex
    Rgb throughput;   // includes all pdfs up to this vertex
    int material = -1;
    int path_length = 1;  // edges walked from the light
    double d_vcm = 0, d_vc = 0, d_vm = 0;
};

// One progressive renderer instance: owns the film and per-iteration state.
class Integrator {
public:
    Integrator(const Scene& scene, const IntegratorConfig& config, int width,
               int height)
        : scene_(scene), cfg_(config), film_(width, height) {
        cfg_.validate();
        use_vc_ = cfg_.kind != IntegratorKind::Ppm;
        use_vm_ = cfg_.kind != IntegratorKind::Bpt;
        r0_ = cfg_.r0_fraction * 2.0 * scene.radius;  // diagonal-based
        for (std::size_t i = 0; i < scene.lights.size(); ++i)
            if (scene.lights[i].kind == Light::Kind::Area)
                area_lights_.push_back(int(i));
        camera_.setup(scene.cam_pos, scene.cam_lookat, scene.cam_up,
                      scene.cam_fov, width, height);
    }

    Film& film() { return film_; }
    const Film& film() const { return film_; }
    const RenderStats& stats() const { return stats_; }

    void render_iteration(int iteration) {
        const int n_paths = film_.width() * film_.height();
        radius_ = r0_ * std::pow(double(iteration + 1),
                                 0.5 * (cfg_.alpha - 1.0));
        eta_ = eta_vcm(1, std::size_t(n_paths), radius_);
        vm_factor_ = use_vm_ ? eta_ : 0.0;
        vc_factor_ = use_vc_ ? 1.0 / eta_ : 0.0;

        RngStream iter_rng = RngStream(cfg_.seed).child(std::uint64_t(iteration));
        RngStream light_rng = iter_rng.child(1);
        RngStream camera_rng = iter_rng.child(2);

        film_.start_iteration();

        // ---- light pass -------------------------------------------------
        std::vector<std::vector<LitVertex>> path_vertices(n_paths);
        std::vector<std::vector<Splat>> path_splats(n_paths);
        std::vector<RenderStats> chunk_stats(
            std::size_t(resolve_thread_count(cfg_.threads)));
        std::atomic<std::size_t> chunk_slot{0};
        parallel_for(std::size_t(n_paths), cfg_.threads,
                     [&](std::size_t lo, std::size_t hi) {
                         std::size_t slot = chunk_slot.fetch_add(1);
                         RenderStats& st = chunk_stats[slot];
                         for (std::size_t p = lo; p < hi; ++p) {
                             RngStream rng = light_rng.child(p);
                             trace_light_path(rng, path_vertices[p],
                                              path_splats[p], st);
                         }
                     });
        for (const RenderStats& st : chunk_stats) {
            stats_.rejected += st.rejected;
            stats_.zero_pdf_drops += st.zero_pdf_drops;
            stats_.light_paths += st.light_paths;
            stats_.light_vertices += st.light_vertices;
            stats_.branch_vertices += st.branch_vertices;
            stats_.branch_children += st.branch_children;
        }

        // splats land in path order, independent of the thread split
        for (const auto& splats : path_splats)
            for (const Splat& s : splats) film_.add(s.x, s.y, s.color);

        // ---- photon structure ------------------------------------------
        vertices_.clear();
        path_start_.assign(std::size_t(n_paths) + 1, 0);
        for (int p = 0; p < n_paths; ++p) {
            path_start_[p] = std::uint32_t(vertices_.size());
            vertices_.insert(vertices_.end(), path_vertices[p].begin(),
                             path_vertices[p].end());
        }
        path_start_[n_paths] = std::uint32_t(vertices_.size());
        if (use_vm_)
            grid_.build(vertices_.size(), radius_, [this](std::size_t i) {
                return vertices_[i].position;
            });

        // ---- camera pass ------------------------------------------------
        std::vector<Rgb> colors(std::size_t(n_paths), Rgb(0.0));
        parallel_for(std::size_t(n_paths), cfg_.threads,
                     [&](std::size_t lo, std::size_t hi) {
                         for (std::size_t i = lo; i < hi; ++i) {
                             RngStream rng = camera_rng.child(i);
                             colors[i] = trace_camera_path(int(i), rng);
                         }
                     });
        for (int i = 0; i < n_paths; ++i)
            film_.add(i % film_.width(), i / film_.width(), colors[i]);
        stats_.rejected += film_.rejected() - rejected_seen_;
        rejected_seen_ = film_.rejected();

        film_.end_iteration();
    }

private:
    struct Splat {
        int x, y;
        Rgb color;
    };

    // Pending continuation of a light walk.
    struct WalkState {
        Ray ray;
        Rgb throughput;
        double d_vcm, d_vc, d_vm;
        int path_length;     // edges up to and including `ray`
        bool finite_light;
    };

    // Branch proposal families for the generalized light pass, in fixed
    // order; the set is truncated to the branch factor so a factor of one
    // reduces to plain scatter sampling.
    enum Family { kFamilyBsdf = 0, kFamilyLight = 1, kFamilyUniform = 2 };

    int family_count() const {
        if (cfg_.kind != IntegratorKind::Gmis) return 1;
        int avail = area_lights_.empty() ? 2 : 3;
        return std::min(cfg_.branch, avail);
    }

    // Families are listed in fixed order but the light-directed one drops
    // out when the scene has no area lights.
    int family_at(int index) const {
        if (area_lights_.empty() && index >= 1) return kFamilyUniform;
        return index;
    }

    double branch_mixture_pdf(int n_fam, const Material& mat, const Vec3& n,
                              const Vec3& wo, const Vec3& pos,
                              const Vec3& dir) const {
        double sum = 0.0;
        for (int i = 0; i < n_fam; ++i) {
            switch (family_at(i)) {
            case kFamilyBsdf:
                sum += mat.pdf(n, wo, dir);
                break;
            case kFamilyLight: {
                double s = 0.0;
                for (int li : area_lights_)
                    s += scene_.lights[li].direction_pdf_w(pos, dir);
                sum += s / double(area_lights_.size());
                break;
            }
            case kFamilyUniform:
                if (dot(n, dir) > 0.0) sum += 1.0 / (2.0 * kPi);
                break;
            }
        }
        return sum / double(n_fam);
    }

    // Density with which a light-side walk would scatter wo_in -> dir_out at
    // a vertex: the branch mixture under the generalized integrator, the
    // plain surface density otherwise. Every hypothetical light-side
    // continuation in a combination weight must go through this so the
    // technique weights keep summing to one.
    double light_scatter_pdf(const Material& mat, const Vec3& n,
                             const Vec3& wo_in, const Vec3& dir_out,
                             const Vec3& pos) const {
        if (cfg_.kind != IntegratorKind::Gmis)
            return mat.pdf(n, wo_in, dir_out);
        return branch_mixture_pdf(family_count(), mat, n, wo_in, pos,
                                  dir_out);
    }

    // Draws one continuation direction from the given family. Returns false
    // when the family produces nothing useful here.
    bool sample_family(int family, const Material& mat, const Vec3& n,
                       const Vec3& wo, const Vec3& pos, RngStream& rng,
                       Vec3& dir) const {
        switch (family) {
        case kFamilyBsdf: {
            BsdfSample s = mat.sample(n, wo, rng);
            if (s.pdf <= 0.0) return false;
            dir = s.dir;
            return true;
        }
        case kFamilyLight: {
            std::size_t pick = 0;
            if (area_lights_.size() > 1)
                pick = rng.next_below(area_lights_.size());
            const Light& l = scene_.lights[area_lights_[pick]];
            double u1 = rng.next_double(), u2 = rng.next_double();
            Vec3 target = l.corner + l.edge1 * u1 + l.edge2 * u2;
            Vec3 d = target - pos;
            double len = length(d);
            if (len < 1e-9) return false;
            dir = d / len;
            return dot(n, dir) > 0.0;
        }
        case kFamilyUniform: {
            double u1 = rng.next_double(), u2 = rng.next_double();
            double z = u1, s = std::sqrt(std::max(0.0, 1.0 - z * z));
            double phi = 2.0 * kPi * u2;
            Frame frame(n);
            dir = frame.to_world({s * std::cos(phi), s * std::sin(phi), z});
            return true;
        }
        }
        return false;
    }

    void trace_light_path(RngStream& rng, std::vector<LitVertex>& vertices,
                          std::vector<Splat>& splats, RenderStats& st) const {
        ++st.light_paths;
        const std::size_t n_lights = scene_.lights.size();
        std::size_t li = 0;
        if (n_lights > 1) li = rng.next_below(n_lights);
        const Light& light = scene_.lights[li];
        double pick = 1.0 / double(n_lights);

        LightEmission e = light.emit(rng, scene_.center, scene_.radius);
        if (e.emission_pdf_w <= 0.0) return;
        double em_pdf = e.emission_pdf_w * pick;
        double dir_pdf_a = e.direct_pdf_a * pick;

        WalkState start;
        start.ray = Ray{e.origin, e.dir};
        start.throughput = e.energy / pick;
        start.d_vcm = dir_pdf_a / em_pdf;
        start.d_vc = e.delta_dir ? 0.0 : e.cos_at_light / em_pdf;
        start.d_vm = start.d_vc * vc_factor_;
        start.path_length = 1;
        start.finite_light = light.kind == Light::Kind::Area;

        const bool budgeted = cfg_.kind == IntegratorKind::Gmis;
        int samples = 1;  // the emitted continuation itself

        std::deque<WalkState> queue;  // FIFO drained before the next path
        queue.push_back(start);
        while (!queue.empty()) {
            WalkState s = queue.front();
            queue.pop_front();
            ++st.light_vertices;

            Hit hit;
            if (!scene_.intersect(s.ray, hit)) continue;
            double cos_in = std::abs(dot(hit.normal, -s.ray.dir));
            if (cos_in < 1e-9) continue;
            if (s.path_length > 1 || s.finite_light)
                s.d_vcm *= hit.t * hit.t;
            s.d_vcm /= cos_in;
            s.d_vc /= cos_in;
            s.d_vm /= cos_in;

            if (hit.material < 0) continue;  // pure emitter absorbs
            const Material& mat = scene_.materials[hit.material];
            Vec3 wo = -s.ray.dir;

            if (!mat.is_delta()) {
                LitVertex v;
                v.position = hit.position;
                v.normal = hit.normal;
                v.wo = wo;
                v.throughput = s.throughput;
                v.material = hit.material;
                v.path_length = s.path_length;
                v.d_vcm = s.d_vcm;
                v.d_vc = s.d_vc;
                v.d_vm = s.d_vm;
                vertices.push_back(v);

                if (use_vc_) connect_to_camera(v, splats);
            }

            if (s.path_length >= cfg_.max_depth) continue;

            if (mat.is_delta()) {
                if (budgeted && samples >= cfg_.max_samples) continue;
                WalkState next = s;
                if (!continue_specular(mat, hit, wo, rng, next)) continue;
                ++samples;
                queue.push_back(next);
                continue;
            }

            // non-specular: branch across the proposal families
            int n_fam = family_count();
            int want = cfg_.kind == IntegratorKind::Gmis ? cfg_.branch : 1;
            int k = want;
            if (budgeted) k = std::min(k, cfg_.max_samples - samples);
            if (k <= 0) continue;
            if (cfg_.kind == IntegratorKind::Gmis) {
                ++st.branch_vertices;
                st.branch_children += k;
            }
            std::size_t order[3] = {0, 1, 2};
            for (int c = 0; c < k; ++c) {
                int block = c % n_fam;
                if (block == 0 && n_fam > 1) {
                    // fresh without-replacement cycle over the families
                    for (int i = n_fam - 1; i > 0; --i) {
                        std::size_t j = rng.next_below(std::size_t(i) + 1);
                        std::swap(order[i], order[std::size_t(j)]);
                    }
                }
                int family = family_at(int(order[block]));

                double survival = 1.0;
                if (s.path_length >= 5) {
                    survival = std::clamp(s.throughput.max_component(), 0.05,
                                          0.95);
                    if (rng.next_double() > survival) {
                        ++samples;  // the slot is spent either way
                        continue;
                    }
                }

                Vec3 dir;
                if (!sample_family(family, mat, hit.normal, wo, hit.position,
                                   rng, dir)) {
                    ++st.zero_pdf_drops;
                    ++samples;
                    continue;
                }
                double denom = branch_mixture_pdf(n_fam, mat, hit.normal, wo,
                                                  hit.position, dir);
                Rgb f = mat.eval(hit.normal, wo, dir);
                double cos_out = dot(hit.normal, dir);
                if (denom <= 0.0 || cos_out <= 0.0 ||
                    (f.x == 0.0 && f.y == 0.0 && f.z == 0.0)) {
                    ++st.zero_pdf_drops;
                    ++samples;
                    continue;
                }
                double rev = mat.pdf(hit.normal, dir, wo);

                WalkState next;
                next.ray = Ray{hit.position, dir};
                next.throughput = s.throughput * f *
                                  (cos_out / (double(k) * denom * survival));
                next.d_vc = (cos_out / denom) *
                            (s.d_vc * rev + s.d_vcm + vm_factor_);
                next.d_vm = (cos_out / denom) *
                            (s.d_vm * rev + s.d_vcm * vc_factor_ + 1.0);
                next.d_vcm = 1.0 / denom;
                next.path_length = s.path_length + 1;
                next.finite_light = s.finite_light;
                ++samples;
                queue.push_back(next);
            }
        }
    }

    bool continue_specular(const Material& mat, const Hit& hit,
                           const Vec3& wo, RngStream& rng,
                           WalkState& s) const {
        double survival = 1.0;
        if (s.path_length >= 5) {
            survival = std::clamp(s.throughput.max_component(), 0.05, 0.95);
            if (rng.next_double() > survival) return false;
        }
        BsdfSample bs = mat.sample(hit.normal, wo, rng);
        if (bs.pdf <= 0.0) return false;
        s.throughput = s.throughput * bs.value *
                       (bs.cos_theta / (bs.pdf * survival));
        s.d_vc *= bs.cos_theta;
        s.d_vm *= bs.cos_theta;
        s.d_vcm = 0.0;
        s.ray = Ray{hit.position, bs.dir};
        s.path_length += 1;
        return true;
    }

    void connect_to_camera(const LitVertex& v,
                           std::vector<Splat>& splats) const {
        const Camera& cam = camera_;
        double px, py;
        if (!cam.world_to_raster(v.position, px, py)) return;
        Vec3 to_cam = cam.position - v.position;
        double dist2 = length_squared(to_cam);
        double dist = std::sqrt(dist2);
        Vec3 dir_to_cam = to_cam / dist;
        double cos_v = dot(v.normal, dir_to_cam);
        if (cos_v <= 0.0) return;
        const Material& mat = scene_.materials[v.material];
        Rgb f = mat.eval(v.normal, v.wo, dir_to_cam);
        if (f.x == 0.0 && f.y == 0.0 && f.z == 0.0) return;
        if (!scene_.visible(v.position, cam.position)) return;

        double n_paths = double(film_.width() * film_.height());
        double cam_pdf_w = cam.solid_angle_pdf(-dir_to_cam);
        double cam_pdf_a = cam_pdf_w * cos_v / dist2;
        double rev = mat.pdf(v.normal, dir_to_cam, v.wo);
        double w_light = (cam_pdf_a / n_paths) *
                         (vm_factor_ + v.d_vcm + v.d_vc * rev);
        double weight = 1.0 / (1.0 + w_light);

        Rgb contrib = v.throughput * f * (weight * cam_pdf_a / n_paths);
        splats.push_back({int(px), int(py), contrib});
    }

    Rgb trace_camera_path(int pixel, RngStream& rng) const {
        const Camera& cam = camera_;
        const int n_lights = int(scene_.lights.size());
        const double n_paths = double(film_.width() * film_.height());
        const bool ppm = cfg_.kind == IntegratorKind::Ppm;

        double px = pixel % film_.width() + rng.next_double();
        double py = pixel / film_.width() + rng.next_double();
        Ray ray = cam.generate_ray(px, py);
        double cam_pdf_w = cam.solid_angle_pdf(ray.dir);

        Rgb color(0.0);
        Rgb throughput(1.0);
        double d_vcm = n_paths / cam_pdf_w, d_vc = 0.0, d_vm = 0.0;
        int length = 1;

        while (true) {
            Hit hit;
            if (!scene_.intersect(ray, hit)) break;
            double cos_in = std::abs(dot(hit.normal, -ray.dir));
            if (cos_in < 1e-9) break;
            d_vcm *= hit.t * hit.t;
            d_vcm /= cos_in;
            d_vc /= cos_in;
            d_vm /= cos_in;
            Vec3 wo = -ray.dir;

            if (hit.light >= 0) {
                const Light& light = scene_.lights[hit.light];
                double direct_a, em_w;
                Rgb le = light.hit_radiance(ray.dir, direct_a, em_w);
                if (le.x > 0.0 || le.y > 0.0 || le.z > 0.0) {
                    double weight = 1.0;
                    if (!ppm && length > 1) {
                        double pick = 1.0 / double(n_lights);
                        double w_cam = direct_a * pick * d_vcm +
                                       em_w * pick * d_vc;
                        weight = 1.0 / (1.0 + w_cam);
                    }
                    color += throughput * le * weight;
                }
            }

            if (hit.material < 0) break;  // nothing more to scatter
            const Material& mat = scene_.materials[hit.material];

            if (!mat.is_delta()) {
                if (ppm) {
                    color += merge_radiance(hit, mat, wo, length, d_vcm,
                                            d_vm, /*weighted=*/false) *
                             throughput;
                    break;  // classic progressive photon mapping stops here
                }
                color += direct_light(hit, mat, wo, rng, d_vcm, d_vc) *
                         throughput;
                if (use_vc_)
                    color += connect_vertices(pixel, hit, mat, wo, length,
                                              d_vcm, d_vc) *
                             throughput;
                if (use_vm_)
                    color += merge_radiance(hit, mat, wo, length, d_vcm,
                                            d_vm, /*weighted=*/true) *
                             throughput;
            }

            if (length >= cfg_.max_depth) break;

            double survival = 1.0;
            if (length >= 5) {
                survival = std::clamp(throughput.max_component(), 0.05, 0.95);
                if (rng.next_double() > survival) break;
            }
            BsdfSample bs = mat.sample(hit.normal, wo, rng);
            if (bs.pdf <= 0.0) break;
            if (bs.specular) {
                d_vc *= bs.cos_theta;
                d_vm *= bs.cos_theta;
                d_vcm = 0.0;
            } else {
                double rev = light_scatter_pdf(mat, hit.normal, bs.dir, wo,
                                               hit.position);
                double nd_vc = (bs.cos_theta / bs.pdf) *
                               (d_vc * rev + d_vcm + vm_factor_);
                double nd_vm = (bs.cos_theta / bs.pdf) *
                               (d_vm * rev + d_vcm * vc_factor_ + 1.0);
                d_vc = nd_vc;
                d_vm = nd_vm;
                d_vcm = 1.0 / bs.pdf;
            }
            throughput = throughput * bs.value *
                         (bs.cos_theta / (bs.pdf * survival));
            ray = Ray{hit.position, bs.dir};
            ++length;
        }
        return color;
    }

    Rgb direct_light(const Hit& hit, const Material& mat, const Vec3& wo,
                     RngStream& rng, double d_vcm, double d_vc) const {
        const int n_lights = int(scene_.lights.size());
        std::size_t li = 0;
        if (n_lights > 1) li = rng.next_below(std::size_t(n_lights));
        const Light& light = scene_.lights[li];
        double pick = 1.0 / double(n_lights);

        LightSample ls = light.illuminate(hit.position, rng, scene_.radius);
        if (ls.direct_pdf_w <= 0.0) return Rgb(0.0);
        Rgb f = mat.eval(hit.normal, wo, ls.dir_to_light);
        double cos_v = dot(hit.normal, ls.dir_to_light);
        if (cos_v <= 0.0 || (f.x == 0.0 && f.y == 0.0 && f.z == 0.0))
            return Rgb(0.0);
        Vec3 target = hit.position + ls.dir_to_light * ls.distance;
        if (!scene_.visible(hit.position, target)) return Rgb(0.0);

        double fwd = mat.pdf(hit.normal, wo, ls.dir_to_light);
        double rev = light_scatter_pdf(mat, hit.normal, ls.dir_to_light, wo,
                                       hit.position);
        double direct_w = ls.direct_pdf_w * pick;
        double em_w = ls.emission_pdf_w * pick;
        double w_light = ls.delta ? 0.0 : fwd / direct_w;
        double w_cam = (em_w * cos_v / (direct_w * ls.cos_at_light)) *
                       (vm_factor_ + d_vcm + d_vc * rev);
        double weight = 1.0 / (w_light + 1.0 + w_cam);
        return ls.radiance * f * (weight * cos_v / pick);
    }

    Rgb connect_vertices(int pixel, const Hit& hit, const Material& mat,
                         const Vec3& wo, int length, double d_vcm,
                         double d_vc) const {
        Rgb total(0.0);
        for (std::uint32_t i = path_start_[pixel];
             i < path_start_[pixel + 1]; ++i) {
            const LitVertex& lv = vertices_[i];
            if (lv.path_length + length + 1 > cfg_.max_depth) continue;
            Vec3 d = lv.position - hit.position;
            double dist2 = length_squared(d);
            if (dist2 < 1e-12) continue;
            double dist = std::sqrt(dist2);
            Vec3 dir = d / dist;  // camera vertex -> light vertex
            double cos_c = dot(hit.normal, dir);
            double cos_l = dot(lv.normal, -dir);
            if (cos_c <= 0.0 || cos_l <= 0.0) continue;
            Rgb fc = mat.eval(hit.normal, wo, dir);
            const Material& lmat = scene_.materials[lv.material];
            Rgb fl = lmat.eval(lv.normal, lv.wo, -dir);
            if ((fc.x == 0 && fc.y == 0 && fc.z == 0) ||
                (fl.x == 0 && fl.y == 0 && fl.z == 0))
                continue;
            if (!scene_.visible(hit.position, lv.position)) continue;

            double g = cos_c * cos_l / dist2;
            double cam_fwd = mat.pdf(hit.normal, wo, dir);
            double cam_rev = light_scatter_pdf(mat, hit.normal, dir, wo,
                                               hit.position);
            double light_fwd = light_scatter_pdf(lmat, lv.normal, lv.wo,
                                                 -dir, lv.position);
            double light_rev = lmat.pdf(lv.normal, -dir, lv.wo);
            double cam_fwd_a = cam_fwd * cos_l / dist2;
            double light_fwd_a = light_fwd * cos_c / dist2;
            double w_light = cam_fwd_a *
                             (vm_factor_ + lv.d_vcm + lv.d_vc * light_rev);
            double w_cam = light_fwd_a *
                           (vm_factor_ + d_vcm + d_vc * cam_rev);
            double weight = 1.0 / (w_light + 1.0 + w_cam);
            total += lv.throughput * fc * fl * (weight * g);
        }
        return total;
    }

    Rgb merge_radiance(const Hit& hit, const Material& mat, const Vec3& wo,
                       int length, double d_vcm, double d_vm,
                       bool weighted) const {
        Rgb total(0.0);
        grid_.for_each_in_range(hit.position, [&](std::uint32_t i) {
            const LitVertex& lv = vertices_[i];
            if (lv.path_length + length > cfg_.max_depth) return;
            Rgb f = mat.eval(hit.normal, wo, lv.wo);
            if (f.x == 0 && f.y == 0 && f.z == 0) return;
            double weight = 1.0;
            if (weighted) {
                double fwd = mat.pdf(hit.normal, wo, lv.wo);
                double rev = light_scatter_pdf(mat, hit.normal, lv.wo, wo,
                                               hit.position);
                double w_light = lv.d_vcm * vc_factor_ + lv.d_vm * fwd;
                double w_cam = d_vcm * vc_factor_ + d_vm * rev;
                weight = 1.0 / (w_light + 1.0 + w_cam);
            }
            total += lv.throughput * f * weight;
        });
        double n_paths = double(film_.width() * film_.height());
        return total / (kPi * radius_ * radius_ * n_paths);
    }

    const Scene& scene_;
    IntegratorConfig cfg_;
    Film film_;
    RenderStats stats_;
    long rejected_seen_ = 0;

    bool use_vc_ = true, use_vm_ = true;
    double r0_ = 1.0, radius_ = 1.0, eta_ = 1.0;
    double vm_factor_ = 0.0, vc_factor_ = 0.0;
    std::vector<int> area_lights_;
    Camera camera_;

    std::vector<LitVertex> vertices_;
    std::vector<std::uint32_t> path_start_;
    HashGrid grid_;
};

struct ConvergenceRow {
    int iteration;
    double seconds;
    double rmse;
};

struct RenderResult {
    Image image;
    std::vector<ConvergenceRow> log;
    RenderStats stats;
    long iterations = 0;
};

// Alternates light pass, photon structure, camera pass until the stop
// condition; logs RMSE against the reference when one is supplied.
inline RenderResult render_progressive(const Scene& scene,
                                       const IntegratorConfig& config,
                                       int width, int height, int iterations,
                                       double seconds,
                                       const Image* reference) {
    if (reference &&
        (reference->width != width || reference->height != height))
        throw std::invalid_argument("reference image size mismatch");
    Integrator integrator(scene, config, width, height);
    RenderResult result;
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; iterations <= 0 || i < iterations; ++i) {
        integrator.render_iteration(i);
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
        double rmse = 0.0;
        if (reference)
            rmse = image_rmse(integrator.film().image(), *reference);
        result.log.push_back({i, elapsed, rmse});
        if (seconds > 0.0 && elapsed >= seconds) break;
        if (iterations <= 0 && seconds <= 0.0) break;  // safety: single pass
    }
    result.image = integrator.film().image();
    result.stats = integrator.stats();
    result.iterations = integrator.film().iterations();
    return result;
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& log) {
    std::string out = "iteration,seconds,rmse\n";
    char buf[128];
    for (const ConvergenceRow& row : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.3f,%.12g\n", row.iteration,
                      row.seconds, row.rmse);
        out += buf;
    }
    return out;
}

inline std::string stats_sidecar(const RenderStats& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\n  \"rejected_samples\": %lld,\n"
                  "  \"zero_pdf_drops\": %lld,\n"
                  "  \"average_path_length\": %.6f,\n"
                  "  \"average_branch_factor\": %.6f\n}\n",
                  s.rejected, s.zero_pdf_drops, s.average_path_length(),
                  s.average_branch_factor());
    return buf;
}

} // namespace gmis
