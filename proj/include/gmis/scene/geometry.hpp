#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "gmis/scene/vec.hpp"

namespace gmis {

constexpr double kRayEpsilon = 1e-7;
constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length
    double t_min = kRayEpsilon;
    double t_max = kInfinity;

    Vec3 at(double t) const { return origin + dir * t; }
};

struct Hit {
    double t = kInfinity;
    Vec3 position;
    Vec3 normal;  // geometric, flipped toward the incoming ray
    int material = -1;
    int shape = -1;
    int light = -1;  // index of the area light this shape emits for, or -1
};

// One primitive: sphere, axis-aligned box, triangle, or parallelogram
// (the emissive shape of an area light).
struct Shape {
    enum class Kind { Sphere, Box, Triangle, Quad };
    Kind kind = Kind::Sphere;
    // Sphere: a = center, r0 = radius.
    // Box: a = min, b = max.
    // Triangle: a, b, c = corners.
    // Quad: a = corner, b, c = edge vectors.
    Vec3 a, b, c;
    double r0 = 1.0;
    int material = -1;
    int light = -1;

    Vec3 bounds_min() const {
        switch (kind) {
        case Kind::Sphere: return a - Vec3(r0);
        case Kind::Box: return a;
        case Kind::Triangle: return min(a, min(b, c));
        case Kind::Quad: return min(min(a, a + b), min(a + c, a + b + c));
        }
        return {};
    }
    Vec3 bounds_max() const {
        switch (kind) {
        case Kind::Sphere: return a + Vec3(r0);
        case Kind::Box: return b;
        case Kind::Triangle: return max(a, max(b, c));
        case Kind::Quad: return max(max(a, a + b), max(a + c, a + b + c));
        }
        return {};
    }

    // Nearest intersection in (ray.t_min, ray.t_max); geometric normal is
    // not yet flipped toward the ray here.
    bool intersect(const Ray& ray, double& t, Vec3& normal) const {
        switch (kind) {
        case Kind::Sphere: {
            Vec3 oc = ray.origin - a;
            double bq = dot(oc, ray.dir);
            double cq = length_squared(oc) - r0 * r0;
            double disc = bq * bq - cq;
            if (disc < 0.0) return false;
            double sq = std::sqrt(disc);
            double t0 = -bq - sq, t1 = -bq + sq;
            double th = t0 > ray.t_min ? t0 : t1;
            if (th <= ray.t_min || th >= ray.t_max) return false;
            t = th;
            normal = normalize(ray.at(th) - a);
            return true;
        }
        case Kind::Box: {
            double tn = ray.t_min, tf = ray.t_max;
            int axis = -1;
            for (int i = 0; i < 3; ++i) {
                double inv = 1.0 / ray.dir[i];
                double t0 = (a[i] - ray.origin[i]) * inv;
                double t1 = (b[i] - ray.origin[i]) * inv;
                if (t0 > t1) std::swap(t0, t1);
                if (t0 > tn) { tn = t0; axis = i; }
                tf = std::min(tf, t1);
                if (tn > tf) return false;
            }
            double th = tn;
            if (axis < 0) {
                // origin inside the box: exit face
                th = tf;
            }
            if (th <= ray.t_min || th >= ray.t_max) return false;
            t = th;
            Vec3 p = ray.at(th);
            Vec3 center = (a + b) * 0.5, half = (b - a) * 0.5;
            Vec3 d = (p - center) / half;
            int best = 0;
            for (int i = 1; i < 3; ++i)
                if (std::abs(d[i]) > std::abs(d[best])) best = i;
            normal = {};
            normal[best] = d[best] > 0 ? 1.0 : -1.0;
            return true;
        }
        case Kind::Triangle: {
            Vec3 e1 = b - a, e2 = c - a;
            Vec3 p = cross(ray.dir, e2);
            double det = dot(e1, p);
            if (std::abs(det) < 1e-14) return false;
            double inv = 1.0 / det;
            Vec3 s = ray.origin - a;
            double u = dot(s, p) * inv;
            if (u < 0.0 || u > 1.0) return false;
            Vec3 q = cross(s, e1);
            double v = dot(ray.dir, q) * inv;
            if (v < 0.0 || u + v > 1.0) return false;
            double th = dot(e2, q) * inv;
            if (th <= ray.t_min || th >= ray.t_max) return false;
            t = th;
            normal = normalize(cross(e1, e2));
            return true;
        }
        case Kind::Quad: {
            Vec3 n = cross(b, c);
            double denom = dot(n, ray.dir);
            if (std::abs(denom) < 1e-14) return false;
            double th = dot(n, a - ray.origin) / denom;
            if (th <= ray.t_min || th >= ray.t_max) return false;
            Vec3 p = ray.at(th) - a;
            double bb = length_squared(b), cc = length_squared(c);
            double bc = dot(b, c);
            double pb = dot(p, b), pc = dot(p, c);
            double d = bb * cc - bc * bc;
            double u = (pb * cc - pc * bc) / d;
            double v = (pc * bb - pb * bc) / d;
            if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return false;
            t = th;
            normal = normalize(n);
            return true;
        }
        }
        return false;
    }
};

// Binary BVH over shape bounds, median split on the widest axis.
class Bvh {
public:
    void build(const std::vector<Shape>& shapes) {
        order_.resize(shapes.size());
        for (std::size_t i = 0; i < shapes.size(); ++i) order_[i] = int(i);
        nodes_.clear();
        if (!shapes.empty()) build_node(shapes, 0, int(shapes.size()));
    }

    // Nearest hit, identical to a brute-force scan over all shapes.
    bool intersect(const std::vector<Shape>& shapes, Ray ray, double& t_out,
                   int& shape_out, Vec3& normal_out) const {
        if (nodes_.empty()) return false;
        bool found = false;
        int stack[64];
        int sp = 0;
        stack[sp++] = 0;
        Vec3 inv{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
        while (sp) {
            const Node& node = nodes_[stack[--sp]];
            if (!hit_bounds(node, ray, inv)) continue;
            if (node.count > 0) {
                for (int i = 0; i < node.count; ++i) {
                    int si = order_[node.first + i];
                    double t;
                    Vec3 n;
                    if (shapes[si].intersect(ray, t, n)) {
                        ray.t_max = t;
                        t_out = t;
                        shape_out = si;
                        normal_out = n;
                        found = true;
                    }
                }
            } else {
                // inner node: left child is adjacent, right index stored
                stack[sp++] = int(&node - nodes_.data()) + 1;
                stack[sp++] = node.first;
            }
        }
        return found;
    }

    bool occluded(const std::vector<Shape>& shapes, const Ray& ray) const {
        double t;
        int s;
        Vec3 n;
        return intersect(shapes, ray, t, s, n);
    }

private:
    struct Node {
        Vec3 bmin, bmax;
        int first = 0;  // child index, or first shape slot when leaf
        int count = 0;  // leaf shape count; 0 for inner nodes
    };

    bool hit_bounds(const Node& n, const Ray& ray, const Vec3& inv) const {
        double tn = ray.t_min, tf = ray.t_max;
        for (int i = 0; i < 3; ++i) {
            double t0 = (n.bmin[i] - ray.origin[i]) * inv[i];
            double t1 = (n.bmax[i] - ray.origin[i]) * inv[i];
            if (t0 > t1) std::swap(t0, t1);
            tn = std::max(tn, t0);
            tf = std::min(tf, t1);
            if (tn > tf) return false;
        }
        return true;
    }

    int build_node(const std::vector<Shape>& shapes, int begin, int end) {
        Node node;
        node.bmin = Vec3(kInfinity);
        node.bmax = Vec3(-kInfinity);
        for (int i = begin; i < end; ++i) {
            const Shape& s = shapes[order_[i]];
            node.bmin = min(node.bmin, s.bounds_min());
            node.bmax = max(node.bmax, s.bounds_max());
        }
        int index = int(nodes_.size());
        nodes_.push_back(node);
        if (end - begin <= 2) {
            nodes_[index].first = begin;
            nodes_[index].count = end - begin;
            return index;
        }
        Vec3 extent = node.bmax - node.bmin;
        int axis = 0;
        for (int i = 1; i < 3; ++i)
            if (extent[i] > extent[axis]) axis = i;
        int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid,
                         order_.begin() + end, [&](int a, int b) {
                             auto ca = shapes[a].bounds_min() +
                                       shapes[a].bounds_max();
                             auto cb = shapes[b].bounds_min() +
                                       shapes[b].bounds_max();
                             return ca[axis] < cb[axis];
                         });
        build_node(shapes, begin, mid);  // left child lands at index + 1
        int right = build_node(shapes, mid, end);
        nodes_[index].first = right; // right child index; left is implicit
        nodes_[index].count = 0;
        return index;
    }

    std::vector<int> order_;
    std::vector<Node> nodes_;
};

} // namespace gmis
