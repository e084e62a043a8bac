#include "mrl/kernels.hpp"

#if (defined(__x86_64__) || defined(_M_X64)) && defined(__AVX2__)

#include <immintrin.h>

#include "kernels_lane.inl"

namespace mrl::kernels::detail {

namespace {

// mask ? b : a
inline __m256d blend(__m256d a, __m256d b, __m256d mask) { return _mm256_blendv_pd(a, b, mask); }

}  // namespace

void ray_box_entry_batch_avx2(const RayPack& rays, const BoxGeom& box, HitBatch& out) {
    const std::size_t n = rays.size();
    out.resize(n);

    const double o[3] = {rays.origin.x, rays.origin.y, rays.origin.z};

    const __m256d vinf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d vninf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    const __m256d vzero = _mm256_setzero_pd();
    const __m256d vone = _mm256_set1_pd(1.0);
    const __m256d veps = _mm256_set1_pd(lane::kParallelEps);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

    __m256d vo[3], vbmin[3], vbmax[3], vc[3];
    for (int a = 0; a < 3; ++a) {
        vo[a] = _mm256_set1_pd(o[a]);
        vbmin[a] = _mm256_set1_pd(box.bmin[a]);
        vbmax[a] = _mm256_set1_pd(box.bmax[a]);
        vc[a] = _mm256_set1_pd(box.center[a]);
    }
    const __m256d vihd = _mm256_set1_pd(box.inv_half_diag);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d[3] = {_mm256_loadu_pd(&rays.dx[i]), _mm256_loadu_pd(&rays.dy[i]),
                              _mm256_loadu_pd(&rays.dz[i])};
        __m256d tnear = vninf;
        __m256d tfar = vinf;
        for (int a = 0; a < 3; ++a) {
            const __m256d inv = _mm256_div_pd(vone, d[a]);
            const __m256d t1 = _mm256_mul_pd(_mm256_sub_pd(vbmin[a], vo[a]), inv);
            const __m256d t2 = _mm256_mul_pd(_mm256_sub_pd(vbmax[a], vo[a]), inv);
            __m256d lo = _mm256_min_pd(t1, t2);
            __m256d hi = _mm256_max_pd(t1, t2);
            const __m256d ad = _mm256_and_pd(d[a], abs_mask);
            const __m256d par = _mm256_cmp_pd(ad, veps, _CMP_LT_OQ);
            const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(vo[a], vbmin[a], _CMP_GE_OQ),
                                                 _mm256_cmp_pd(vo[a], vbmax[a], _CMP_LE_OQ));
            lo = blend(lo, blend(vinf, vninf, inside), par);
            hi = blend(hi, blend(vninf, vinf, inside), par);
            tnear = _mm256_max_pd(tnear, lo);
            tfar = _mm256_min_pd(tfar, hi);
        }

        const __m256d entry_pos = _mm256_cmp_pd(tnear, vzero, _CMP_GT_OQ);
        const __m256d t = blend(tfar, tnear, entry_pos);
        const __m256d tmaxv = _mm256_loadu_pd(&rays.tmax[i]);
        __m256d hit = _mm256_and_pd(_mm256_cmp_pd(tfar, tnear, _CMP_GE_OQ),
                                    _mm256_cmp_pd(t, vzero, _CMP_GT_OQ));
        hit = _mm256_and_pd(hit, _mm256_cmp_pd(t, tmaxv, _CMP_LE_OQ));

        const __m256d px = _mm256_add_pd(vo[0], _mm256_mul_pd(t, d[0]));
        const __m256d py = _mm256_add_pd(vo[1], _mm256_mul_pd(t, d[1]));
        const __m256d pz = _mm256_add_pd(vo[2], _mm256_mul_pd(t, d[2]));
        const __m256d rx = _mm256_sub_pd(px, vc[0]);
        const __m256d ry = _mm256_sub_pd(py, vc[1]);
        const __m256d rz = _mm256_sub_pd(pz, vc[2]);
        __m256d s = _mm256_add_pd(_mm256_mul_pd(rx, rx), _mm256_mul_pd(ry, ry));
        s = _mm256_add_pd(s, _mm256_mul_pd(rz, rz));
        const __m256d dh = _mm256_mul_pd(_mm256_sqrt_pd(s), vihd);

        _mm256_storeu_pd(&out.t[i], blend(vzero, t, hit));
        _mm256_storeu_pd(&out.dh[i], blend(vzero, dh, hit));
        _mm256_storeu_pd(&out.px[i], blend(vo[0], px, hit));
        _mm256_storeu_pd(&out.py[i], blend(vo[1], py, hit));
        _mm256_storeu_pd(&out.pz[i], blend(vo[2], pz, hit));
        const int m = _mm256_movemask_pd(hit);
        out.hit[i + 0] = static_cast<std::uint8_t>(m & 1);
        out.hit[i + 1] = static_cast<std::uint8_t>((m >> 1) & 1);
        out.hit[i + 2] = static_cast<std::uint8_t>((m >> 2) & 1);
        out.hit[i + 3] = static_cast<std::uint8_t>((m >> 3) & 1);
    }

    for (; i < n; ++i) {
        const lane::LaneHit h =
            lane::ray_box_lane(o[0], o[1], o[2], rays.dx[i], rays.dy[i], rays.dz[i], rays.tmax[i],
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

#endif
