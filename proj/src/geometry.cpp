#include "mrl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrl/errors.hpp"

namespace mrl {

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kDegenerate = 1e-12;

}  // namespace

Ray Ray::validated(const Vec3& origin, const Vec3& dir) {
    if (!origin.finite() || !dir.finite()) throw InputError("ray: components must be finite");
    if (std::fabs(dir.norm() - 1.0) > kUnitTol)
        throw InputError("ray: direction must be unit length");
    return Ray{origin, dir};
}

BillboardBasis billboard_basis(const Vec3& position, const UserPose& user) {
    Vec3 to_eye = user.eye - position;
    Vec3 normal;
    if (to_eye.norm() < kDegenerate) {
        normal = -user.forward;  // element at the eye: face along the view axis
    } else {
        normal = to_eye.normalized();
    }
    Vec3 right = user.up.cross(normal);
    if (right.norm() < kDegenerate) {
        right = user.forward.cross(normal);  // looking straight up/down
    }
    right = right.normalized();
    const Vec3 up = normal.cross(right);
    return BillboardBasis{right, up, normal};
}

std::vector<Vec3> rasterize_element(const UiElement& element, const Vec3& position,
                                    const UserPose& user, int grid_n) {
    if (grid_n < 1) throw InputError("rasterize: grid_n must be >= 1");
    if (!(element.width > 0.0) || !(element.height > 0.0))
        throw InputError("rasterize: degenerate element size");

    std::vector<Vec3> samples;
    samples.reserve(static_cast<std::size_t>(grid_n) * grid_n);
    if (grid_n == 1) {
        samples.push_back(position);
        return samples;
    }
    const BillboardBasis basis = billboard_basis(position, user);
    const double du = element.width / (grid_n - 1);
    const double dv = element.height / (grid_n - 1);
    for (int row = 0; row < grid_n; ++row) {
        const double v = -0.5 * element.height + dv * row;
        for (int col = 0; col < grid_n; ++col) {
            const double u = -0.5 * element.width + du * col;
            samples.push_back(position + basis.right * u + basis.up * v);
        }
    }
    return samples;
}

std::optional<Hit> ray_box_entry(const Ray& ray, const Box3& box) {
    kernels::RayPack pack;
    pack.origin = ray.origin;
    pack.push(ray.dir, std::numeric_limits<double>::infinity());
    kernels::HitBatch batch;
    kernels::ray_box_entry_batch(pack, kernels::BoxGeom::from(box), batch);
    if (!batch.hit[0]) return std::nullopt;
    Hit h;
    h.point = Vec3{batch.px[0], batch.py[0], batch.pz[0]};
    h.d_h = batch.dh[0];
    h.t = batch.t[0];
    return h;
}

kernels::RayPack element_ray_pack(const Scene& scene, const UiElement& element,
                                  const Vec3& position, int grid_n, bool clip_at_element,
                                  CollectDiagnostics* diag) {
    const std::vector<Vec3> samples = rasterize_element(element, position, scene.user, grid_n);
    kernels::RayPack pack;
    pack.origin = scene.user.eye;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Vec3 delta = samples[i] - scene.user.eye;
        const double dist = delta.norm();
        if (dist < kDegenerate) {
            // Degenerate ray: keep the lane so indices line up, force a miss.
            pack.push(Vec3{0.0, 0.0, 0.0}, -1.0);
            if (diag) diag->skipped_rays.push_back(static_cast<int>(i));
            continue;
        }
        pack.push(delta / dist,
                  clip_at_element ? dist : std::numeric_limits<double>::infinity());
    }
    return pack;
}

std::vector<std::vector<Hit>> collect_hits(const Scene& scene, const UiElement& element,
                                           const Vec3& position, int grid_n,
                                           bool clip_at_element, CollectDiagnostics* diag) {
    const kernels::RayPack pack =
        element_ray_pack(scene, element, position, grid_n, clip_at_element, diag);
    const std::size_t n = pack.size();
    std::vector<std::vector<Hit>> hits(n);

    kernels::HitBatch batch;
    for (const PhysicalEntity& entity : scene.entities) {
        kernels::ray_box_entry_batch(pack, kernels::BoxGeom::from(entity.box), batch);
        for (std::size_t i = 0; i < n; ++i) {
            if (!batch.hit[i]) continue;
            Hit h;
            h.point = Vec3{batch.px[i], batch.py[i], batch.pz[i]};
            h.entity_id = entity.id;
            h.d_h = batch.dh[i];
            h.t = batch.t[i];
            hits[i].push_back(h);
        }
    }
    for (auto& per_ray : hits) {
        std::stable_sort(per_ray.begin(), per_ray.end(),
                         [](const Hit& a, const Hit& b) { return a.t < b.t; });
    }
    return hits;
}

}  // namespace mrl
