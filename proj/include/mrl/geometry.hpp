#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mrl/kernels.hpp"
#include "mrl/scene.hpp"

namespace mrl {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length within 1e-9

    static Ray validated(const Vec3& origin, const Vec3& dir);
};

// Entry intersection of a ray with an entity box. d_h is the hit-to-center
// distance over half the box diagonal (in (0,1] for surface points).
// entity_id views into the scene that produced the hit.
struct Hit {
    Vec3 point;
    std::string_view entity_id;
    double d_h = 0.0;
    double t = 0.0;
};

// Billboard frame for an element at `position` facing the user's eye.
struct BillboardBasis {
    Vec3 right;
    Vec3 up;
    Vec3 normal;  // points from the element toward the eye
};

BillboardBasis billboard_basis(const Vec3& position, const UserPose& user);

// grid_n x grid_n sample points spanning the billboarded rectangle, corners
// included for grid_n >= 2. Row-major: index = row * grid_n + col, columns
// along the width axis.
std::vector<Vec3> rasterize_element(const UiElement& element, const Vec3& position,
                                    const UserPose& user, int grid_n);

// Nearest surface intersection (slab method); origin inside the box yields
// the exit point. Unclipped. entity_id of the returned hit is empty.
std::optional<Hit> ray_box_entry(const Ray& ray, const Box3& box);

struct CollectDiagnostics {
    std::vector<int> skipped_rays;  // sample indices coinciding with the eye
};

// Hits per ray index (= sample index), sorted by t, one hit per box per ray.
// Rays run eye -> sample and past it by default; clip_at_element limits them
// to t <= t_sample.
std::vector<std::vector<Hit>> collect_hits(const Scene& scene, const UiElement& element,
                                           const Vec3& position, int grid_n,
                                           bool clip_at_element = false,
                                           CollectDiagnostics* diag = nullptr);

// Ray pack for the batch kernels: one ray per sample, eye origin, unit
// directions, tmax = sample distance (or +inf unclipped). Degenerate samples
// (coinciding with the eye) become guaranteed-miss lanes and are listed in
// diag. Shared by the objective terms.
kernels::RayPack element_ray_pack(const Scene& scene, const UiElement& element,
                                  const Vec3& position, int grid_n, bool clip_at_element,
                                  CollectDiagnostics* diag = nullptr);

}  // namespace mrl
