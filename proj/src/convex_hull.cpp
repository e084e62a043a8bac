#include "mrl/convex_hull.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <utility>

namespace mrl {

namespace {

struct Face {
    std::array<int, 3> v;
    Vec3 normal;    // unit, outward
    double offset;  // normal . vertex
    std::vector<int> outside;
    bool alive = true;

    double dist(const Vec3& p) const { return normal.dot(p) - offset; }
};

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
}

}  // namespace

std::vector<std::size_t> convex_hull_vertices(const std::vector<Vec3>& points) {
    const std::size_t n = points.size();
    if (n < 4) return all_indices(n);

    double scale = 0.0;
    for (const Vec3& p : points)
        scale = std::max({scale, std::fabs(p.x), std::fabs(p.y), std::fabs(p.z)});
    const double eps = std::max(scale, 1.0) * 1e-9;

    // Initial tetrahedron from extreme points.
    int i0 = 0, i1 = 0;
    {
        double best = -1.0;
        for (int axis = 0; axis < 3; ++axis) {
            int lo = 0, hi = 0;
            for (int i = 1; i < static_cast<int>(n); ++i) {
                if (points[i][axis] < points[lo][axis]) lo = i;
                if (points[i][axis] > points[hi][axis]) hi = i;
            }
            const double span = points[hi][axis] - points[lo][axis];
            if (span > best) {
                best = span;
                i0 = lo;
                i1 = hi;
            }
        }
        if (best <= eps) return all_indices(n);  // all points coincident
    }
    int i2 = -1;
    {
        const Vec3 dir = points[i1] - points[i0];
        double best = eps * dir.norm();
        for (int i = 0; i < static_cast<int>(n); ++i) {
            const double d = dir.cross(points[i] - points[i0]).norm();
            if (d > best) {
                best = d;
                i2 = i;
            }
        }
        if (i2 < 0) return all_indices(n);  // collinear
    }
    int i3 = -1;
    Vec3 base_normal = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
    {
        double best = eps;
        for (int i = 0; i < static_cast<int>(n); ++i) {
            const double d = std::fabs(base_normal.dot(points[i] - points[i0]));
            if (d > best) {
                best = d;
                i3 = i;
            }
        }
        if (i3 < 0) return all_indices(n);  // coplanar
    }

    const Vec3 interior =
        (points[i0] + points[i1] + points[i2] + points[i3]) * 0.25;

    std::vector<Face> faces;
    auto add_face = [&](int a, int b, int c) {
        Face f;
        f.v = {a, b, c};
        f.normal = (points[b] - points[a]).cross(points[c] - points[a]).normalized();
        f.offset = f.normal.dot(points[a]);
        if (f.dist(interior) > 0.0) {  // orient outward
            std::swap(f.v[1], f.v[2]);
            f.normal = -f.normal;
            f.offset = -f.offset;
        }
        faces.push_back(std::move(f));
        return static_cast<int>(faces.size()) - 1;
    };

    add_face(i0, i1, i2);
    add_face(i0, i1, i3);
    add_face(i0, i2, i3);
    add_face(i1, i2, i3);

    // Conflict lists: each exterior point sits on one face's outside set.
    for (int i = 0; i < static_cast<int>(n); ++i) {
        if (i == i0 || i == i1 || i == i2 || i == i3) continue;
        for (Face& f : faces) {
            if (f.dist(points[i]) > eps) {
                f.outside.push_back(i);
                break;
            }
        }
    }

    for (;;) {
        int fi = -1;
        for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
            if (faces[i].alive && !faces[i].outside.empty()) {
                fi = i;
                break;
            }
        }
        if (fi < 0) break;

        // Furthest conflict point of this face.
        int apex = -1;
        double best = -1.0;
        for (const int i : faces[fi].outside) {
            const double d = faces[fi].dist(points[i]);
            if (d > best) {
                best = d;
                apex = i;
            }
        }
        const Vec3& p = points[apex];

        std::vector<int> visible;
        for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
            if (faces[i].alive && faces[i].dist(p) > eps) visible.push_back(i);
        }

        // Horizon: directed edges of visible faces whose reverse is not among
        // visible faces' edges.
        std::set<std::pair<int, int>> visible_edges;
        for (const int i : visible) {
            const auto& v = faces[i].v;
            visible_edges.emplace(v[0], v[1]);
            visible_edges.emplace(v[1], v[2]);
            visible_edges.emplace(v[2], v[0]);
        }
        std::vector<std::pair<int, int>> horizon;
        for (const auto& e : visible_edges) {
            if (!visible_edges.count({e.second, e.first})) horizon.push_back(e);
        }

        std::vector<int> orphans;
        for (const int i : visible) {
            faces[i].alive = false;
            orphans.insert(orphans.end(), faces[i].outside.begin(), faces[i].outside.end());
            faces[i].outside.clear();
        }

        std::vector<int> fresh;
        for (const auto& [a, b] : horizon) fresh.push_back(add_face(a, b, apex));

        std::sort(orphans.begin(), orphans.end());
        orphans.erase(std::unique(orphans.begin(), orphans.end()), orphans.end());
        for (const int i : orphans) {
            if (i == apex) continue;
            for (const int fj : fresh) {
                if (faces[fj].dist(points[i]) > eps) {
                    faces[fj].outside.push_back(i);
                    break;
                }
            }
        }
    }

    std::set<std::size_t> verts;
    for (const Face& f : faces) {
        if (!f.alive) continue;
        for (const int v : f.v) verts.insert(static_cast<std::size_t>(v));
    }
    return {verts.begin(), verts.end()};
}

}  // namespace mrl
