#include "mrl/svg_render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "mrl/errors.hpp"
#include "mrl/geometry.hpp"

namespace mrl {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string entity_fill(double overlay_rating) {
    const int r = static_cast<int>(std::lround(255.0 * (1.0 - overlay_rating)));
    const int g = static_cast<int>(std::lround(255.0 * overlay_rating));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rgb(%d,%d,60)", r, g);
    return buf;
}

std::string polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill,
                    const std::string& stroke, const std::string& extra = "") {
    std::string p = "<polygon points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) p += ' ';
        p += num(pts[i].first) + ',' + num(pts[i].second);
    }
    p += "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
    return p;
}

std::vector<Vec3> box_corners(const Box3& box) {
    const Vec3 lo = box.min_corner();
    const Vec3 hi = box.max_corner();
    return {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
            {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
}

std::vector<Vec3> element_corners(const UiElement& element, const Vec3& position,
                                  const UserPose& user) {
    const BillboardBasis basis = billboard_basis(position, user);
    const Vec3 du = basis.right * (0.5 * element.width);
    const Vec3 dv = basis.up * (0.5 * element.height);
    return {position - du - dv, position + du - dv, position + du + dv, position - du + dv};
}

// Monotone-chain hull of 2D points (for projected box silhouettes).
std::vector<std::pair<double, double>> hull2d(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    const auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                          const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

std::string render_top(const Scene& scene, const Layout& layout) {
    double minx = scene.user.eye.x - 1.0, maxx = scene.user.eye.x + 1.0;
    double minz = scene.user.eye.z - 1.0, maxz = scene.user.eye.z + 1.0;
    const auto grow = [&](double x, double z) {
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        minz = std::min(minz, z);
        maxz = std::max(maxz, z);
    };
    for (const auto& e : scene.entities) {
        grow(e.box.min_corner().x, e.box.min_corner().z);
        grow(e.box.max_corner().x, e.box.max_corner().z);
    }
    for (const auto& e : scene.elements) {
        for (const Vec3& c : element_corners(e, layout.position_of(e.id), scene.user))
            grow(c.x, c.z);
    }
    const double margin = 0.5;
    minx -= margin;
    maxx += margin;
    minz -= margin;
    maxz += margin;
    const double scale = 800.0 / (maxx - minx);
    const double height = (maxz - minz) * scale;
    const auto project = [&](double x, double z) {
        return std::pair<double, double>{(x - minx) * scale, (maxz - z) * scale};
    };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" +
                      num(height) + "\" viewBox=\"0 0 800 " + num(height) + "\">\n";
    svg += "<rect width=\"800\" height=\"" + num(height) + "\" fill=\"white\"/>\n";

    for (const auto& e : scene.entities) {
        const Vec3 lo = e.box.min_corner();
        const Vec3 hi = e.box.max_corner();
        svg += polygon({project(lo.x, lo.z), project(hi.x, lo.z), project(hi.x, hi.z),
                        project(lo.x, hi.z)},
                       entity_fill(e.overlay_rating), "#333333", " fill-opacity=\"0.45\"");
        const auto c = project(e.box.center.x, e.box.center.z);
        svg += "<text x=\"" + num(c.first) + "\" y=\"" + num(c.second) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + e.label + "</text>\n";
    }
    for (const auto& e : scene.elements) {
        const Vec3 pos = layout.position_of(e.id);
        std::vector<std::pair<double, double>> pts;
        for (const Vec3& c : element_corners(e, pos, scene.user)) pts.push_back(project(c.x, c.z));
        svg += polygon(pts, "none", "#1f4fbf", " stroke-width=\"2\"");
        const auto c = project(pos.x, pos.z);
        svg += "<text x=\"" + num(c.first) + "\" y=\"" + num(c.second - 6.0) +
               "\" font-size=\"12\" fill=\"#1f4fbf\" text-anchor=\"middle\">" + e.id +
               "</text>\n";
    }

    const auto eye = project(scene.user.eye.x, scene.user.eye.z);
    const Vec3 ahead = scene.user.eye + scene.user.forward * 0.3;
    const auto tip = project(ahead.x, ahead.z);
    svg += "<circle cx=\"" + num(eye.first) + "\" cy=\"" + num(eye.second) +
           "\" r=\"6\" fill=\"#222222\"/>\n";
    svg += "<line x1=\"" + num(eye.first) + "\" y1=\"" + num(eye.second) + "\" x2=\"" +
           num(tip.first) + "\" y2=\"" + num(tip.second) +
           "\" stroke=\"#222222\" stroke-width=\"2\"/>\n";
    svg += "</svg>\n";
    return svg;
}

std::string render_camera(const Scene& scene, const Layout& layout) {
    const Vec3 right = scene.user.up.cross(scene.user.forward);
    const double fx = 500.0, fy = 500.0, cx = 400.0, cy = 300.0;
    const auto project = [&](const Vec3& p, std::pair<double, double>& out) {
        const Vec3 rel = p - scene.user.eye;
        const double depth = rel.dot(scene.user.forward);
        if (depth < 0.05) return false;
        out = {fx * rel.dot(right) / depth + cx, -fy * rel.dot(scene.user.up) / depth + cy};
        return true;
    };

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
        "viewBox=\"0 0 800 600\">\n<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";

    for (const auto& e : scene.entities) {
        std::vector<std::pair<double, double>> pts;
        bool all_visible = true;
        for (const Vec3& c : box_corners(e.box)) {
            std::pair<double, double> q;
            if (!project(c, q)) {
                all_visible = false;
                break;
            }
            pts.push_back(q);
        }
        if (!all_visible) continue;
        svg += polygon(hull2d(pts), entity_fill(e.overlay_rating), "#333333",
                       " fill-opacity=\"0.45\"");
        std::pair<double, double> c;
        if (project(e.box.center, c)) {
            svg += "<text x=\"" + num(c.first) + "\" y=\"" + num(c.second) +
                   "\" font-size=\"12\" text-anchor=\"middle\">" + e.label + "</text>\n";
        }
    }
    for (const auto& e : scene.elements) {
        const Vec3 pos = layout.position_of(e.id);
        std::vector<std::pair<double, double>> pts;
        bool all_visible = true;
        for (const Vec3& c : element_corners(e, pos, scene.user)) {
            std::pair<double, double> q;
            if (!project(c, q)) {
                all_visible = false;
                break;
            }
            pts.push_back(q);
        }
        if (!all_visible) continue;
        svg += polygon(pts, "none", "#1f4fbf", " stroke-width=\"2\"");
    }

    // Gaze crosshair.
    svg += "<line x1=\"390.00\" y1=\"300.00\" x2=\"410.00\" y2=\"300.00\" stroke=\"#222222\"/>\n";
    svg += "<line x1=\"400.00\" y1=\"290.00\" x2=\"400.00\" y2=\"310.00\" stroke=\"#222222\"/>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace

ViewKind view_from_name(const std::string& name) {
    if (name == "top") return ViewKind::top;
    if (name == "camera") return ViewKind::camera;
    throw UsageError("unknown view '" + name + "' (top|camera)");
}

std::string render_svg(const Scene& scene, const Layout& layout, ViewKind view) {
    if (!layout.covers(scene)) throw InputError("layout does not cover all scene elements");
    return view == ViewKind::top ? render_top(scene, layout) : render_camera(scene, layout);
}

}  // namespace mrl
