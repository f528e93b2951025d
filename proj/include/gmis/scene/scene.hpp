#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmis/scene/geometry.hpp"
#include "gmis/scene/light.hpp"
#include "gmis/scene/material.hpp"
#include "gmis/scene/vec.hpp"

namespace gmis {

class scene_parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scene {
    std::vector<Material> materials;
    std::vector<Shape> shapes;
    std::vector<Light> lights;
    Camera camera;
    Vec3 cam_pos{0, 0, -1}, cam_lookat{0, 0, 0}, cam_up{0, 1, 0};
    double cam_fov = 45.0;
    bool has_camera = false;

    Vec3 center;
    double radius = 1.0;
    Bvh bvh;

    int material_index(const std::string& name) const {
        for (std::size_t i = 0; i < materials.size(); ++i)
            if (materials[i].name == name) return int(i);
        return -1;
    }

    // Build acceleration and bounding data; call once geometry is final.
    void finalize(int res_x = 512, int res_y = 512) {
        Vec3 bmin(kInfinity), bmax(-kInfinity);
        for (const Shape& s : shapes) {
            bmin = min(bmin, s.bounds_min());
            bmax = max(bmax, s.bounds_max());
        }
        if (shapes.empty()) {
            bmin = Vec3(-1);
            bmax = Vec3(1);
        }
        center = (bmin + bmax) * 0.5;
        radius = std::max(1e-6, length(bmax - center));
        bvh.build(shapes);
        camera.setup(cam_pos, cam_lookat, cam_up, cam_fov, res_x, res_y);
    }

    bool intersect(const Ray& ray, Hit& hit) const {
        double t;
        int si;
        Vec3 n;
        if (!bvh.intersect(shapes, ray, t, si, n)) return false;
        hit.t = t;
        hit.position = ray.at(t);
        hit.shape = si;
        hit.material = shapes[si].material;
        hit.light = shapes[si].light;
        hit.normal = dot(n, ray.dir) > 0.0 ? -n : n;
        return true;
    }

    // Visibility between two surface points, with epsilon offsets at both ends.
    bool visible(const Vec3& a, const Vec3& b) const {
        Vec3 d = b - a;
        double dist = length(d);
        if (dist < 2.0 * kRayEpsilon) return true;
        Ray ray{a, d / dist, kRayEpsilon * std::max(1.0, dist),
                dist * (1.0 - 1e-6)};
        return !bvh.occluded(shapes, ray);
    }
};

namespace detail {

inline double parse_number(std::istringstream& in, int line,
                           const char* directive) {
    double v;
    if (!(in >> v))
        throw scene_parse_error("line " + std::to_string(line) +
                                ": expected number in '" + directive + "'");
    return v;
}

inline Vec3 parse_vec(std::istringstream& in, int line, const char* d) {
    double x = parse_number(in, line, d);
    double y = parse_number(in, line, d);
    double z = parse_number(in, line, d);
    return {x, y, z};
}

inline int parse_material_ref(std::istringstream& in, int line,
                              const Scene& scene, const char* d) {
    std::string name;
    if (!(in >> name))
        throw scene_parse_error("line " + std::to_string(line) +
                                ": expected material name in '" + d + "'");
    int idx = scene.material_index(name);
    if (idx < 0)
        throw scene_parse_error("line " + std::to_string(line) +
                                ": unknown material '" + name + "'");
    return idx;
}

inline void expect_end(std::istringstream& in, int line, const char* d) {
    std::string extra;
    if (in >> extra)
        throw scene_parse_error("line " + std::to_string(line) +
                                ": trailing token '" + extra + "' after '" +
                                d + "'");
}

} // namespace detail

// Line-oriented description: one directive per line, '#' starts a comment.
inline Scene parse_scene(std::istream& input) {
    using namespace detail;
    Scene scene;
    std::string raw;
    int line = 0;
    while (std::getline(input, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream in(raw);
        std::string directive;
        if (!(in >> directive)) continue;

        if (directive == "material") {
            Material m;
            std::string kind;
            if (!(in >> m.name >> kind))
                throw scene_parse_error("line " + std::to_string(line) +
                                        ": material needs a name and a kind");
            if (scene.material_index(m.name) >= 0)
                throw scene_parse_error("line " + std::to_string(line) +
                                        ": duplicate material '" + m.name +
                                        "'");
            if (kind == "diffuse") m.kind = Material::Kind::Diffuse;
            else if (kind == "phong") m.kind = Material::Kind::Phong;
            else if (kind == "mirror") m.kind = Material::Kind::Mirror;
            else if (kind == "glass") m.kind = Material::Kind::Glass;
            else
                throw scene_parse_error("line " + std::to_string(line) +
                                        ": unknown material kind '" + kind +
                                        "'");
            m.albedo = parse_vec(in, line, "material");
            if (m.kind == Material::Kind::Phong ||
                m.kind == Material::Kind::Glass)
                m.param = parse_number(in, line, "material");
            expect_end(in, line, "material");
            if (m.kind == Material::Kind::Glass && m.param <= 0.0)
                throw scene_parse_error("line " + std::to_string(line) +
                                        ": glass needs a positive index of "
                                        "refraction");
            scene.materials.push_back(m);
        } else if (directive == "sphere") {
            Shape s;
            s.kind = Shape::Kind::Sphere;
            s.a = parse_vec(in, line, "sphere");
            s.r0 = parse_number(in, line, "sphere");
            s.material = parse_material_ref(in, line, scene, "sphere");
            expect_end(in, line, "sphere");
            if (s.r0 <= 0.0)
                throw scene_parse_error("line " + std::to_string(line) +
                                        ": sphere radius must be positive");
            scene.shapes.push_back(s);
        } else if (directive == "box") {
            Shape s;
            s.kind = Shape::Kind::Box;
            s.a = parse_vec(in, line, "box");
            s.b = parse_vec(in, line, "box");
            s.material = parse_material_ref(in, line, scene, "box");
            expect_end(in, line, "box");
            scene.shapes.push_back(s);
        } else if (directive == "tri") {
            Shape s;
            s.kind = Shape::Kind::Triangle;
            s.a = parse_vec(in, line, "tri");
            s.b = parse_vec(in, line, "tri");
            s.c = parse_vec(in, line, "tri");
            s.material = parse_material_ref(in, line, scene, "tri");
            expect_end(in, line, "tri");
            scene.shapes.push_back(s);
        } else if (directive == "arealight") {
            Light l;
            l.kind = Light::Kind::Area;
            l.corner = parse_vec(in, line, "arealight");
            l.edge1 = parse_vec(in, line, "arealight");
            l.edge2 = parse_vec(in, line, "arealight");
            l.radiance = parse_vec(in, line, "arealight");
            // optional trailing material makes the emitter reflective too
            int mat = -1;
            std::string mat_name;
            if (in >> mat_name) {
                mat = scene.material_index(mat_name);
                if (mat < 0)
                    throw scene_parse_error("line " + std::to_string(line) +
                                            ": unknown material '" + mat_name +
                                            "'");
                expect_end(in, line, "arealight");
            }
            if (l.area() <= 0.0)
                throw scene_parse_error("line " + std::to_string(line) +
                                        ": arealight has degenerate edges");
            Shape s;
            s.kind = Shape::Kind::Quad;
            s.a = l.corner;
            s.b = l.edge1;
            s.c = l.edge2;
            s.material = mat;
            s.light = int(scene.lights.size());
            l.shape = int(scene.shapes.size());
            scene.shapes.push_back(s);
            scene.lights.push_back(l);
        } else if (directive == "dirlight") {
            Light l;
            l.kind = Light::Kind::Directional;
            l.direction = normalize(parse_vec(in, line, "dirlight"));
            l.radiance = parse_vec(in, line, "dirlight");
            expect_end(in, line, "dirlight");
            scene.lights.push_back(l);
        } else if (directive == "camera") {
            scene.cam_pos = parse_vec(in, line, "camera");
            scene.cam_lookat = parse_vec(in, line, "camera");
            scene.cam_up = parse_vec(in, line, "camera");
            scene.cam_fov = parse_number(in, line, "camera");
            expect_end(in, line, "camera");
            if (scene.cam_fov <= 0.0 || scene.cam_fov >= 180.0)
                throw scene_parse_error("line " + std::to_string(line) +
                                        ": camera fov must be in (0, 180)");
            scene.has_camera = true;
        } else {
            throw scene_parse_error("line " + std::to_string(line) +
                                    ": unknown directive '" + directive + "'");
        }
    }
    if (scene.lights.empty())
        throw scene_parse_error("scene has no lights");
    scene.finalize();
    return scene;
}

inline Scene parse_scene_string(const std::string& text) {
    std::istringstream in(text);
    return parse_scene(in);
}

inline Scene parse_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw scene_parse_error("cannot open scene file '" + path + "'");
    return parse_scene(in);
}

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt(const Vec3& v) {
    return fmt(v.x) + " " + fmt(v.y) + " " + fmt(v.z);
}

} // namespace detail

// Canonical text form; reparsing it reproduces the scene exactly.
inline std::string serialize_scene(const Scene& scene) {
    using detail::fmt;
    std::ostringstream out;
    for (const Material& m : scene.materials) {
        const char* kind = "diffuse";
        switch (m.kind) {
        case Material::Kind::Diffuse: kind = "diffuse"; break;
        case Material::Kind::Phong: kind = "phong"; break;
        case Material::Kind::Mirror: kind = "mirror"; break;
        case Material::Kind::Glass: kind = "glass"; break;
        }
        out << "material " << m.name << " " << kind << " " << fmt(m.albedo);
        if (m.kind == Material::Kind::Phong ||
            m.kind == Material::Kind::Glass)
            out << " " << fmt(m.param);
        out << "\n";
    }
    for (const Shape& s : scene.shapes) {
        if (s.light >= 0) continue;  // emitted with its light directive
        switch (s.kind) {
        case Shape::Kind::Sphere:
            out << "sphere " << fmt(s.a) << " " << fmt(s.r0);
            break;
        case Shape::Kind::Box:
            out << "box " << fmt(s.a) << " " << fmt(s.b);
            break;
        case Shape::Kind::Triangle:
            out << "tri " << fmt(s.a) << " " << fmt(s.b) << " " << fmt(s.c);
            break;
        case Shape::Kind::Quad:
            out << "tri " << fmt(s.a) << " " << fmt(s.a + s.b) << " "
                << fmt(s.a + s.c);
            break;
        }
        out << " " << scene.materials[s.material].name << "\n";
    }
    for (const Light& l : scene.lights) {
        if (l.kind == Light::Kind::Area) {
            out << "arealight " << fmt(l.corner) << " " << fmt(l.edge1) << " "
                << fmt(l.edge2) << " " << fmt(l.radiance);
            int mat = l.shape >= 0 ? scene.shapes[l.shape].material : -1;
            if (mat >= 0) out << " " << scene.materials[mat].name;
            out << "\n";
        } else
            out << "dirlight " << fmt(l.direction) << " " << fmt(l.radiance)
                << "\n";
    }
    if (scene.has_camera)
        out << "camera " << fmt(scene.cam_pos) << " " << fmt(scene.cam_lookat)
            << " " << fmt(scene.cam_up) << " " << fmt(scene.cam_fov) << "\n";
    return out.str();
}

} // namespace gmis
