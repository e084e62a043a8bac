#include "mrl/kernels.hpp"

#include "kernels_lane.inl"

namespace mrl::kernels::detail {

void ray_box_entry_batch_scalar(const RayPack& rays, const BoxGeom& box, HitBatch& out) {
    const std::size_t n = rays.size();
    out.resize(n);
    const double ox = rays.origin.x;
    const double oy = rays.origin.y;
    const double oz = rays.origin.z;
    for (std::size_t i = 0; i < n; ++i) {
        const lane::LaneHit h =
            lane::ray_box_lane(ox, oy, oz, rays.dx[i], rays.dy[i], rays.dz[i], rays.tmax[i],
                               box.bmin, box.bmax, box.center, box.inv_half_diag);
        out.hit[i] = h.hit ? 1 : 0;
        out.t[i] = h.t;
        out.dh[i] = h.dh;
        out.px[i] = h.px;
        out.py[i] = h.py;
        out.pz[i] = h.pz;
    }
}

}  // namespace mrl::kernels::detail
