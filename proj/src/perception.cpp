#include "mrl/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "mrl/convex_hull.hpp"
#include "mrl/errors.hpp"

namespace mrl {

using nlohmann::json;

CameraModel CameraModel::validated(double fx, double fy, double cx, double cy, int width,
                                   int height, const Mat3& rotation, const Vec3& translation) {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InputError("camera: fx and fy must be positive");
    if (width <= 0 || height <= 0) throw InputError("camera: image size must be positive");
    if (!translation.finite()) throw InputError("camera: pose translation must be finite");
    // Orthonormality of the rotation block within 1e-6.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double dot = rotation.col(i).dot(rotation.col(j));
            const double expected = i == j ? 1.0 : 0.0;
            if (std::fabs(dot - expected) > 1e-6)
                throw InputError("camera: pose rotation is not orthonormal");
        }
    }
    return CameraModel{fx, fy, cx, cy, width, height, rotation, translation};
}

Detection2D Detection2D::validated(std::string label, double confidence, double xmin,
                                   double ymin, double xmax, double ymax, int image_width,
                                   int image_height) {
    if (!(confidence >= 0.0 && confidence <= 1.0))
        throw InputError("detection '" + label + "': confidence must be in [0,1]");
    if (!(xmin < xmax) || !(ymin < ymax))
        throw InputError("detection '" + label + "': empty rectangle");
    if (xmin < 0.0 || ymin < 0.0 || xmax > image_width || ymax > image_height)
        throw InputError("detection '" + label + "': rectangle outside the image");
    return Detection2D{std::move(label), confidence, xmin, ymin, xmax, ymax};
}

Frustum frustum_from_detection(const CameraModel& cam, const Detection2D& det, double near,
                               double far) {
    if (!(near > 0.0 && near < far)) throw InputError("frustum: need 0 < near < far");

    // Corner directions in camera frame, counter-clockwise seen from the
    // camera (+x right, +y down, +z forward).
    const Vec3 c0 = cam.pixel_dir(det.xmin, det.ymin);
    const Vec3 c1 = cam.pixel_dir(det.xmax, det.ymin);
    const Vec3 c2 = cam.pixel_dir(det.xmax, det.ymax);
    const Vec3 c3 = cam.pixel_dir(det.xmin, det.ymax);
    const std::array<Vec3, 4> corners = {c0, c1, c2, c3};

    const Vec3 axis = Vec3{0.0, 0.0, 1.0};
    // Inward means toward the rectangle's central ray (not the camera axis:
    // they differ for off-center detections).
    const Vec3 central =
        cam.pixel_dir(0.5 * (det.xmin + det.xmax), 0.5 * (det.ymin + det.ymax));
    Frustum fr;
    for (int i = 0; i < 4; ++i) {
        const Vec3& a = corners[i];
        const Vec3& b = corners[(i + 1) % 4];
        Vec3 n = a.cross(b).normalized();
        if (n.dot(central) < 0.0) n = -n;
        const Vec3 n_world = cam.rotation * n;
        fr.planes[i] = Plane{n_world, n_world.dot(cam.translation)};
    }
    const Vec3 z_world = cam.rotation * axis;
    fr.planes[4] = Plane{z_world, z_world.dot(cam.cam_to_world(axis * near))};
    fr.planes[5] = Plane{-z_world, (-z_world).dot(cam.cam_to_world(axis * far))};

    // Sanity: the frustum centroid must be strictly inside.
    const double mid = 0.5 * (near + far);
    Vec3 centroid{0.0, 0.0, 0.0};
    for (const Vec3& c : corners) centroid += c * (mid / c.z);
    centroid = cam.cam_to_world(centroid / 4.0);
    for (const Plane& pl : fr.planes) {
        if (!(pl.signed_distance(centroid) > 0.0))
            throw InputError("frustum: degenerate detection rectangle");
    }
    return fr;
}

PointCloud points_in_frustum(const PointCloud& cloud, const Frustum& frustum) {
    PointCloud out;
    for (const Vec3& p : cloud.points) {
        if (frustum.contains(p)) out.points.push_back(p);
    }
    return out;
}

std::vector<std::size_t> hidden_point_removal(const PointCloud& cloud, const Vec3& viewpoint,
                                              double gamma) {
    if (cloud.points.empty()) throw InputError("hidden point removal: empty cloud");
    if (!(gamma > 0.0)) throw InputError("hidden point removal: gamma must be positive");

    const std::size_t n = cloud.points.size();
    double max_range = 0.0;
    std::vector<double> ranges(n);
    for (std::size_t i = 0; i < n; ++i) {
        ranges[i] = (cloud.points[i] - viewpoint).norm();
        max_range = std::max(max_range, ranges[i]);
    }
    if (max_range < 1e-12)
        throw InputError("hidden point removal: all points coincide with the viewpoint");

    const double radius = gamma * max_range;
    std::vector<Vec3> flipped;
    flipped.reserve(n + 1);
    std::vector<std::size_t> flip_owner;  // hull point -> cloud index
    for (std::size_t i = 0; i < n; ++i) {
        if (ranges[i] < 1e-12) continue;  // at the viewpoint: trivially visible, not flipped
        const Vec3 rel = cloud.points[i] - viewpoint;
        flipped.push_back(rel * ((2.0 * radius - ranges[i]) / ranges[i]));
        flip_owner.push_back(i);
    }
    flipped.push_back(Vec3{0.0, 0.0, 0.0});  // the viewpoint itself

    const std::vector<std::size_t> hull = convex_hull_vertices(flipped);
    std::vector<std::size_t> visible;
    for (const std::size_t h : hull) {
        if (h < flip_owner.size()) visible.push_back(flip_owner[h]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (ranges[i] < 1e-12) visible.push_back(i);
    }
    std::sort(visible.begin(), visible.end());
    return visible;
}

namespace {

// Voxel grid with cell size eps for neighbor queries.
class NeighborGrid {
  public:
    NeighborGrid(const std::vector<Vec3>& pts, double eps) : pts_(pts), eps_(eps) {
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
    }

    std::vector<std::size_t> neighbors(std::size_t i) const {
        std::vector<std::size_t> out;
        const auto [kx, ky, kz] = key(pts_[i]);
        const double eps2 = eps_ * eps_;
        for (long dx = -1; dx <= 1; ++dx) {
            for (long dy = -1; dy <= 1; ++dy) {
                for (long dz = -1; dz <= 1; ++dz) {
                    const auto it = cells_.find({kx + dx, ky + dy, kz + dz});
                    if (it == cells_.end()) continue;
                    for (const std::size_t j : it->second) {
                        if ((pts_[j] - pts_[i]).norm2() <= eps2) out.push_back(j);
                    }
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    using Key = std::tuple<long, long, long>;
    Key key(const Vec3& p) const {
        return {static_cast<long>(std::floor(p.x / eps_)),
                static_cast<long>(std::floor(p.y / eps_)),
                static_cast<long>(std::floor(p.z / eps_))};
    }
    const std::vector<Vec3>& pts_;
    double eps_;
    std::map<Key, std::vector<std::size_t>> cells_;
};

}  // namespace

DbscanResult dbscan(const PointCloud& cloud, double eps, int min_pts) {
    if (!(eps > 0.0)) throw InputError("dbscan: eps must be positive");
    if (min_pts < 1) throw InputError("dbscan: min_pts must be >= 1");

    const std::size_t n = cloud.points.size();
    DbscanResult result;
    if (n == 0) return result;

    const NeighborGrid grid(cloud.points, eps);
    std::vector<std::vector<std::size_t>> nbrs(n);
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        nbrs[i] = grid.neighbors(i);
        core[i] = nbrs[i].size() >= static_cast<std::size_t>(min_pts);
    }

    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> cluster_of(n, kNone);

    // Clusters = connected components of core points, discovered in input
    // order so indices follow the first core point.
    std::size_t next_cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || cluster_of[i] != kNone) continue;
        const std::size_t cid = next_cluster++;
        std::vector<std::size_t> stack{i};
        cluster_of[i] = cid;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            for (const std::size_t q : nbrs[p]) {
                if (core[q] && cluster_of[q] == kNone) {
                    cluster_of[q] = cid;
                    stack.push_back(q);
                }
            }
        }
    }

    // Border points: nearest core neighbor, ties by core coordinates.
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        std::size_t best = kNone;
        for (const std::size_t q : nbrs[i]) {
            if (!core[q]) continue;
            if (best == kNone) {
                best = q;
                continue;
            }
            const double dq = (cloud.points[q] - cloud.points[i]).norm2();
            const double db = (cloud.points[best] - cloud.points[i]).norm2();
            const auto rank = [&](const Vec3& v, double d) {
                return std::make_tuple(d, v.x, v.y, v.z);
            };
            if (rank(cloud.points[q], dq) < rank(cloud.points[best], db)) best = q;
        }
        if (best != kNone) cluster_of[i] = cluster_of[best];
    }

    result.clusters.resize(next_cluster);
    for (std::size_t i = 0; i < n; ++i) {
        if (cluster_of[i] == kNone)
            result.noise.push_back(i);
        else
            result.clusters[cluster_of[i]].push_back(i);
    }
    return result;
}

std::optional<PhysicalEntity> segment_box(const PointCloud& cloud, const CameraModel& cam,
                                          const Detection2D& det, const SegmentParams& params) {
    const Frustum frustum = frustum_from_detection(cam, det, params.near, params.far);
    const PointCloud selected = points_in_frustum(cloud, frustum);
    if (selected.points.empty()) return std::nullopt;

    const std::vector<std::size_t> visible =
        hidden_point_removal(selected, cam.translation, params.hpr_gamma);
    PointCloud visible_cloud;
    visible_cloud.points.reserve(visible.size());
    for (const std::size_t i : visible) visible_cloud.points.push_back(selected.points[i]);
    if (visible_cloud.points.empty()) return std::nullopt;

    const DbscanResult clusters = dbscan(visible_cloud, params.eps, params.min_pts);
    if (clusters.clusters.empty()) return std::nullopt;

    std::size_t largest = 0;
    for (std::size_t c = 1; c < clusters.clusters.size(); ++c) {
        if (clusters.clusters[c].size() > clusters.clusters[largest].size()) largest = c;
    }

    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi = -lo;
    for (const std::size_t i : clusters.clusters[largest]) {
        const Vec3& p = visible_cloud.points[i];
        lo = Vec3{std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = Vec3{std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const Vec3 center = (lo + hi) * 0.5;
    const Vec3 half{std::max(0.5 * (hi.x - lo.x), params.min_half_extent),
                    std::max(0.5 * (hi.y - lo.y), params.min_half_extent),
                    std::max(0.5 * (hi.z - lo.z), params.min_half_extent)};
    return PhysicalEntity::validated(det.label, det.label, Box3::validated(center, half), 0.5,
                                     0.5);
}

std::vector<PhysicalEntity> merge_detection(std::vector<PhysicalEntity> entities,
                                            const PhysicalEntity& candidate,
                                            double iou_threshold) {
    std::size_t best = entities.size();
    double best_iou = -1.0;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (entities[i].label != candidate.label) continue;
        const double iou = box_iou(entities[i].box, candidate.box);
        if (iou > best_iou) {
            best_iou = iou;
            best = i;
        }
    }
    if (best == entities.size() || best_iou < iou_threshold) {
        entities.push_back(candidate);
        return entities;
    }
    // Replace the closest match, keeping its id and ratings; absorb any other
    // same-label box the updated one now matches.
    entities[best].box = candidate.box;
    std::vector<PhysicalEntity> out;
    out.reserve(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (i != best && entities[i].label == candidate.label &&
            box_iou(entities[i].box, entities[best].box) >= iou_threshold)
            continue;
        out.push_back(std::move(entities[i]));
    }
    return out;
}

namespace {

PointCloud parse_xyz(const std::string& text) {
    PointCloud cloud;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
            throw InputError("point cloud: malformed point at line " + std::to_string(line_no));
        cloud.points.push_back({x, y, z});
    }
    return cloud;
}

PointCloud parse_ply(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        return true;
    };

    if (!next_line() || line.substr(0, 3) != "ply") throw InputError("ply: missing magic");
    long vertex_count = -1;
    std::vector<std::string> properties;
    bool in_vertex_element = false;
    bool ascii = false;
    while (next_line()) {
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        if (token == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = fmt == "ascii";
        } else if (token == "element") {
            std::string name;
            long count;
            ls >> name >> count;
            in_vertex_element = name == "vertex";
            if (in_vertex_element) vertex_count = count;
        } else if (token == "property" && in_vertex_element) {
            std::string type, name;
            ls >> type >> name;
            properties.push_back(name);
        } else if (token == "end_header") {
            break;
        }
    }
    if (!ascii) throw InputError("ply: only format ascii 1.0 is supported");
    if (vertex_count < 0) throw InputError("ply: missing vertex element");
    int ix = -1, iy = -1, iz = -1;
    for (int i = 0; i < static_cast<int>(properties.size()); ++i) {
        if (properties[i] == "x") ix = i;
        if (properties[i] == "y") iy = i;
        if (properties[i] == "z") iz = i;
    }
    if (ix < 0 || iy < 0 || iz < 0) throw InputError("ply: vertex needs x/y/z properties");

    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(vertex_count));
    for (long v = 0; v < vertex_count; ++v) {
        if (!next_line())
            throw InputError("ply: unexpected end of file at line " + std::to_string(line_no));
        std::istringstream ls(line);
        std::vector<double> row;
        double value;
        while (ls >> value) row.push_back(value);
        if (static_cast<int>(row.size()) < static_cast<int>(properties.size()))
            throw InputError("ply: malformed vertex at line " + std::to_string(line_no));
        cloud.points.push_back({row[ix], row[iy], row[iz]});
    }
    return cloud;
}

}  // namespace

PointCloud load_point_cloud(const std::string& text) {
    if (text.rfind("ply", 0) == 0) return parse_ply(text);
    return parse_xyz(text);
}

CameraModel load_camera(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("camera parse error: ") + e.what());
    }
    if (!j.is_object()) throw InputError("camera: expected an object");
    for (const char* key : {"fx", "fy", "cx", "cy", "width", "height", "pose"}) {
        if (!j.contains(key)) throw InputError(std::string("camera: missing field '") + key + "'");
    }
    const auto& pose = j.at("pose");
    if (!pose.is_array() || pose.size() != 16)
        throw InputError("camera: pose must be a 4x4 row-major array of 16 numbers");
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        r.rows[i] = Vec3{pose[4 * i + 0].get<double>(), pose[4 * i + 1].get<double>(),
                         pose[4 * i + 2].get<double>()};
    }
    const Vec3 t{pose[3].get<double>(), pose[7].get<double>(), pose[11].get<double>()};
    return CameraModel::validated(j.at("fx").get<double>(), j.at("fy").get<double>(),
                                  j.at("cx").get<double>(), j.at("cy").get<double>(),
                                  j.at("width").get<int>(), j.at("height").get<int>(), r, t);
}

std::vector<Detection2D> load_detections(const std::string& text, const CameraModel& cam) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("detections parse error: ") + e.what());
    }
    if (!j.is_array()) throw InputError("detections: expected a JSON list");
    std::vector<Detection2D> out;
    int i = 0;
    for (const auto& jd : j) {
        const std::string path = "detections[" + std::to_string(i) + "]";
        if (!jd.is_object() || !jd.contains("label") || !jd.contains("confidence") ||
            !jd.contains("box"))
            throw InputError(path + ": need label, confidence and box");
        const auto& box = jd.at("box");
        if (!box.is_array() || box.size() != 4)
            throw InputError(path + ".box: expected [xmin, ymin, xmax, ymax]");
        out.push_back(Detection2D::validated(
            jd.at("label").get<std::string>(), jd.at("confidence").get<double>(),
            box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
            box[3].get<double>(), cam.width, cam.height));
        ++i;
    }
    return out;
}

}  // namespace mrl
