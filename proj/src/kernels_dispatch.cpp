#include <atomic>

#include "mrl/kernels.hpp"

namespace mrl::kernels {

namespace {

enum class Mode { automatic, scalar, avx2 };
std::atomic<Mode> g_mode{Mode::automatic};

}  // namespace

bool avx2_supported() {
#if defined(MRL_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Isa active_isa() {
    switch (g_mode.load(std::memory_order_relaxed)) {
        case Mode::scalar:
            return Isa::scalar;
        case Mode::avx2:
            return avx2_supported() ? Isa::avx2 : Isa::scalar;
        case Mode::automatic:
        default:
            return avx2_supported() ? Isa::avx2 : Isa::scalar;
    }
}

void force_isa(Isa isa) {
    g_mode.store(isa == Isa::avx2 ? Mode::avx2 : Mode::scalar, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void ray_box_entry_batch(const RayPack& rays, const BoxGeom& box, HitBatch& out) {
#if defined(MRL_HAVE_AVX2)
    if (active_isa() == Isa::avx2) {
        detail::ray_box_entry_batch_avx2(rays, box, out);
        return;
    }
#endif
    detail::ray_box_entry_batch_scalar(rays, box, out);
}

}  // namespace mrl::kernels
