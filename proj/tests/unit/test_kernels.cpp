#include <doctest.h>

#include <cstring>
#include <limits>

#include "mrl/kernels.hpp"
#include "mrl/solver.hpp"

using namespace mrl;
using namespace mrl::kernels;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RayPack random_pack(Rng& rng, std::size_t n) {
    RayPack pack;
    pack.origin = Vec3{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
        // Mix in axis-parallel and near-parallel directions.
        const auto kind = rng.next_index(5);
        if (kind == 0) dir = Vec3{1.0, 0.0, 0.0};
        if (kind == 1) dir = Vec3{0.0, 0.0, -1.0};
        if (kind == 2) dir.y = 5e-10;  // below the parallel epsilon
        if (dir.norm() < 1e-6) dir = Vec3{0.0, 1.0, 0.0};
        dir = dir.normalized();
        const auto clip = rng.next_index(3);
        const double tmax = clip == 0 ? kInf : rng.uniform(0.1, 10.0);
        pack.push(dir, tmax);
    }
    return pack;
}

BoxGeom random_box(Rng& rng) {
    const Box3 box = Box3::validated(
        {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)},
        {rng.uniform(0.05, 2), rng.uniform(0.05, 2), rng.uniform(0.05, 2)});
    return BoxGeom::from(box);
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernel: entry, exit, miss, clip semantics") {
    RayPack pack;
    pack.origin = Vec3{-5.0, 0.0, 0.0};
    pack.push(Vec3{1, 0, 0}, kInf);   // entry at -0.5
    pack.push(Vec3{-1, 0, 0}, kInf);  // box behind: miss
    pack.push(Vec3{1, 0, 0}, 4.0);    // clipped before the box: miss
    pack.push(Vec3{1, 0, 0}, 4.5);    // clip exactly at entry: inclusive hit
    const BoxGeom box = BoxGeom::from(Box3::validated({0, 0, 0}, {0.5, 0.5, 0.5}));
    HitBatch out;
    detail::ray_box_entry_batch_scalar(pack, box, out);

    CHECK(out.hit[0] == 1);
    CHECK(out.t[0] == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(out.px[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(out.hit[1] == 0);
    CHECK(out.t[1] == 0.0);
    CHECK(out.hit[2] == 0);
    CHECK(out.hit[3] == 1);

    // Origin inside: exit point.
    RayPack inside;
    inside.origin = Vec3{0.0, 0.0, 0.0};
    inside.push(Vec3{1, 0, 0}, kInf);
    detail::ray_box_entry_batch_scalar(inside, box, out);
    CHECK(out.hit[0] == 1);
    CHECK(out.t[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.px[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scalar kernel: parallel rays respect the slab epsilon") {
    const BoxGeom box = BoxGeom::from(Box3::validated({0, 0, 0}, {0.5, 0.5, 0.5}));
    RayPack pack;
    pack.origin = Vec3{-5.0, 0.2, 0.0};
    pack.push(Vec3{1, 0, 0}, kInf);  // parallel inside the y/z slabs: hit
    HitBatch out;
    detail::ray_box_entry_batch_scalar(pack, box, out);
    CHECK(out.hit[0] == 1);

    RayPack outside;
    outside.origin = Vec3{-5.0, 0.7, 0.0};  // outside the y slab
    outside.push(Vec3{1, 0, 0}, kInf);
    detail::ray_box_entry_batch_scalar(outside, box, out);
    CHECK(out.hit[0] == 0);
}

#if defined(MRL_HAVE_AVX2)
TEST_CASE("avx2 kernel matches scalar bitwise on randomized packs") {
    if (!avx2_supported()) return;
    Rng rng(777);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.next_index(23);  // exercises tails of every length
        RayPack pack = random_pack(rng, n);
        const BoxGeom box = random_box(rng);
        // Some packs get origins pinned to a box face or inside the box.
        if (trial % 5 == 0) pack.origin = Vec3{box.bmin[0], box.center[1], box.center[2]};
        if (trial % 7 == 0) pack.origin = Vec3{box.center[0], box.center[1], box.center[2]};

        HitBatch scalar_out, avx2_out;
        detail::ray_box_entry_batch_scalar(pack, box, scalar_out);
        detail::ray_box_entry_batch_avx2(pack, box, avx2_out);

        REQUIRE(scalar_out.hit == avx2_out.hit);
        CHECK(bitwise_equal(scalar_out.t, avx2_out.t));
        CHECK(bitwise_equal(scalar_out.dh, avx2_out.dh));
        CHECK(bitwise_equal(scalar_out.px, avx2_out.px));
        CHECK(bitwise_equal(scalar_out.py, avx2_out.py));
        CHECK(bitwise_equal(scalar_out.pz, avx2_out.pz));
    }
}

TEST_CASE("dispatch honors forced isa") {
    if (!avx2_supported()) return;
    force_isa(Isa::avx2);
    CHECK(active_isa() == Isa::avx2);
    force_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    force_isa(Isa::avx2);  // leave the default-equivalent state
}
#endif

TEST_CASE("degenerate lanes (zero direction, negative tmax) always miss") {
    RayPack pack;
    pack.origin = Vec3{0.0, 0.0, 0.0};
    pack.push(Vec3{0, 0, 0}, -1.0);
    const BoxGeom box = BoxGeom::from(Box3::validated({0, 0, 0}, {1, 1, 1}));
    HitBatch out;
    ray_box_entry_batch(pack, box, out);
    CHECK(out.hit[0] == 0);
}
