#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mrl/scene.hpp"
#include "mrl/vec3.hpp"

namespace mrl {

struct PointCloud {
    std::vector<Vec3> points;
};

struct Mat3 {
    // Row-major rows.
    std::array<Vec3, 3> rows;

    Vec3 operator*(const Vec3& v) const {
        return {rows[0].dot(v), rows[1].dot(v), rows[2].dot(v)};
    }
    Vec3 col(int i) const { return {rows[0][i], rows[1][i], rows[2][i]}; }
};

// Pinhole camera: +z forward, +x right, +y down in pixel convention.
// pose maps camera coordinates to world coordinates.
struct CameraModel {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    Mat3 rotation;  // camera -> world
    Vec3 translation;

    static CameraModel validated(double fx, double fy, double cx, double cy, int width,
                                 int height, const Mat3& rotation, const Vec3& translation);

    Vec3 cam_to_world(const Vec3& p) const { return rotation * p + translation; }
    // Direction (camera frame) through pixel (u, v), z = 1.
    Vec3 pixel_dir(double u, double v) const { return {(u - cx) / fx, (v - cy) / fy, 1.0}; }
};

struct Detection2D {
    std::string label;
    double confidence = 0.0;
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    static Detection2D validated(std::string label, double confidence, double xmin, double ymin,
                                 double xmax, double ymax, int image_width, int image_height);
};

struct Plane {
    Vec3 normal;  // unit, pointing inward
    double offset = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

struct Frustum {
    std::array<Plane, 6> planes;  // 4 sides, near, far

    bool contains(const Vec3& p) const {
        for (const Plane& pl : planes)
            if (pl.signed_distance(p) < 0.0) return false;
        return true;
    }
};

// World-frame frustum whose cross-section at camera depth z is the
// back-projected pixel rectangle of the detection, bounded by near/far.
Frustum frustum_from_detection(const CameraModel& cam, const Detection2D& det, double near,
                               double far);

// Points with non-negative signed distance to every plane.
PointCloud points_in_frustum(const PointCloud& cloud, const Frustum& frustum);

// Spherical-flipping visibility: flip each point about the viewpoint with
// radius R = gamma * max range, take the convex hull of flips; a point is
// visible when its flip is a hull vertex. Returns ascending indices.
std::vector<std::size_t> hidden_point_removal(const PointCloud& cloud, const Vec3& viewpoint,
                                              double gamma);

struct DbscanResult {
    std::vector<std::vector<std::size_t>> clusters;  // each ascending
    std::vector<std::size_t> noise;
};

// Density clustering; min_pts counts the point itself. Border points join
// the cluster of their nearest core point (ties by core coordinates), so
// the partition does not depend on input order; cluster indices follow the
// first core point in input order.
DbscanResult dbscan(const PointCloud& cloud, double eps, int min_pts);

struct SegmentParams {
    double near = 0.2;
    double far = 10.0;
    double hpr_gamma = 100.0;
    double eps = 0.1;
    int min_pts = 10;
    double min_half_extent = 1e-3;  // floor for flat clusters
    double iou_threshold = 0.5;
};

// Full pipeline: frustum select -> hidden point removal (from the camera
// position) -> dbscan -> box of the largest cluster (ties by lowest cluster
// index). Empty result when no points survive.
std::optional<PhysicalEntity> segment_box(const PointCloud& cloud, const CameraModel& cam,
                                          const Detection2D& det, const SegmentParams& params);

// Replace the best same-label match with IoU >= threshold (ratings kept),
// absorbing any further same-label matches of the new box; otherwise append.
std::vector<PhysicalEntity> merge_detection(std::vector<PhysicalEntity> entities,
                                            const PhysicalEntity& candidate,
                                            double iou_threshold);

// File formats: ASCII XYZ (one point per line) or PLY ascii 1.0 with
// x/y/z properties, auto-detected; camera JSON with a 4x4 row-major pose;
// detections as a JSON list.
PointCloud load_point_cloud(const std::string& text);
CameraModel load_camera(const std::string& text);
std::vector<Detection2D> load_detections(const std::string& text, const CameraModel& cam);

}  // namespace mrl
