// Per-lane slab test shared by the scalar batch loop and the AVX2 tail.
// The operation sequence mirrors the AVX2 vector path exactly (including
// the min/max NaN convention of _mm256_min_pd/_mm256_max_pd), so both ISAs
// produce bitwise-identical lanes. Both translation units build with
// -ffp-contract=off; do not reorder the arithmetic.

#include <cmath>
#include <limits>

namespace mrl::kernels::lane {

inline constexpr double kParallelEps = 1e-9;

// _mm256_min_pd / _mm256_max_pd return the second operand when either
// input is NaN; (a<b ? a : b) matches that.
inline double mm_min(double a, double b) { return a < b ? a : b; }
inline double mm_max(double a, double b) { return a > b ? a : b; }

struct LaneHit {
    bool hit;
    double t;
    double dh;
    double px, py, pz;
};

inline LaneHit ray_box_lane(double ox, double oy, double oz, double dx, double dy, double dz,
                            double tmax, const double bmin[3], const double bmax[3],
                            const double center[3], double inv_half_diag) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double o[3] = {ox, oy, oz};
    const double d[3] = {dx, dy, dz};
    double tnear = -inf;
    double tfar = inf;
    for (int a = 0; a < 3; ++a) {
        const double inv = 1.0 / d[a];
        const double t1 = (bmin[a] - o[a]) * inv;
        const double t2 = (bmax[a] - o[a]) * inv;
        double lo = mm_min(t1, t2);
        double hi = mm_max(t1, t2);
        const bool parallel = std::fabs(d[a]) < kParallelEps;
        if (parallel) {
            const bool inside = o[a] >= bmin[a] && o[a] <= bmax[a];
            lo = inside ? -inf : inf;
            hi = inside ? inf : -inf;
        }
        tnear = mm_max(tnear, lo);
        tfar = mm_min(tfar, hi);
    }
    const double t = tnear > 0.0 ? tnear : tfar;
    const bool hit = (tfar >= tnear) && (t > 0.0) && (t <= tmax);
    LaneHit out{};
    if (hit) {
        out.hit = true;
        out.t = t;
        out.px = ox + t * dx;
        out.py = oy + t * dy;
        out.pz = oz + t * dz;
        const double rx = out.px - center[0];
        const double ry = out.py - center[1];
        const double rz = out.pz - center[2];
        double s = rx * rx + ry * ry;
        s = s + rz * rz;
        out.dh = std::sqrt(s) * inv_half_diag;
    } else {
        out.hit = false;
        out.t = 0.0;
        out.dh = 0.0;
        out.px = ox;
        out.py = oy;
        out.pz = oz;
    }
    return out;
}

}  // namespace mrl::kernels::lane
