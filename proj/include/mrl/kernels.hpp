#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mrl/scene.hpp"
#include "mrl/vec3.hpp"

namespace mrl::kernels {

// Batch of rays sharing one origin, structure-of-arrays.
struct RayPack {
    Vec3 origin;
    std::vector<double> dx, dy, dz;
    std::vector<double> tmax;  // clip parameter per ray; +inf = unclipped

    std::size_t size() const { return dx.size(); }
    void clear() {
        dx.clear();
        dy.clear();
        dz.clear();
        tmax.clear();
    }
    void push(const Vec3& dir, double t_max) {
        dx.push_back(dir.x);
        dy.push_back(dir.y);
        dz.push_back(dir.z);
        tmax.push_back(t_max);
    }
};

// Box prepared for the kernel: bounds relative to the pack origin plus the
// normalized-distance scale 1/||half_extents||.
struct BoxGeom {
    double bmin[3];
    double bmax[3];
    double center[3];
    double inv_half_diag;

    static BoxGeom from(const Box3& box) {
        BoxGeom g{};
        const Vec3 lo = box.min_corner();
        const Vec3 hi = box.max_corner();
        g.bmin[0] = lo.x;
        g.bmin[1] = lo.y;
        g.bmin[2] = lo.z;
        g.bmax[0] = hi.x;
        g.bmax[1] = hi.y;
        g.bmax[2] = hi.z;
        g.center[0] = box.center.x;
        g.center[1] = box.center.y;
        g.center[2] = box.center.z;
        g.inv_half_diag = 1.0 / box.half_extents.norm();
        return g;
    }
};

// Kernel outputs, one lane per ray. Miss lanes carry t = 0, dh = 0 and the
// pack origin as point, so the two ISA paths compare bitwise.
struct HitBatch {
    std::vector<std::uint8_t> hit;
    std::vector<double> t;
    std::vector<double> dh;
    std::vector<double> px, py, pz;

    void resize(std::size_t n) {
        hit.assign(n, 0);
        t.assign(n, 0.0);
        dh.assign(n, 0.0);
        px.assign(n, 0.0);
        py.assign(n, 0.0);
        pz.assign(n, 0.0);
    }
};

enum class Isa { scalar, avx2 };

bool avx2_supported();
Isa active_isa();
// Overrides dispatch (tests, --kernel flag). Requesting avx2 on a machine
// without it falls back to scalar.
void force_isa(Isa isa);
const char* isa_name(Isa isa);

// Nearest surface intersection of each ray with the box, slab method,
// t in (0, tmax]. An origin inside the box yields the exit point. The scalar
// and AVX2 paths produce bitwise-identical results (equivalence-tested).
void ray_box_entry_batch(const RayPack& rays, const BoxGeom& box, HitBatch& out);

namespace detail {
void ray_box_entry_batch_scalar(const RayPack& rays, const BoxGeom& box, HitBatch& out);
#if defined(__x86_64__) || defined(_M_X64)
void ray_box_entry_batch_avx2(const RayPack& rays, const BoxGeom& box, HitBatch& out);
#endif
}  // namespace detail

}  // namespace mrl::kernels
