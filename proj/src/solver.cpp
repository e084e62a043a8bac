#include "mrl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "mrl/errors.hpp"

namespace mrl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Vec3 clamp_to_bounds(const Vec3& p, const Box3& bounds) {
    const Vec3 lo = bounds.min_corner();
    const Vec3 hi = bounds.max_corner();
    return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y),
            std::clamp(p.z, lo.z, hi.z)};
}

double displacement_penalty(const Layout& layout, const Layout& reference, double weight) {
    if (weight == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& [id, pos] : layout.positions) {
        const auto it = reference.positions.find(id);
        if (it != reference.positions.end()) sum += (pos - it->second).norm2();
    }
    return weight * sum;
}

}  // namespace

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed * 0x9E3779B97F4A7C15ULL + index + 1);
}

std::uint64_t Rng::next_word() { return eng_(); }

double Rng::uniform() {
    return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::next_index(std::uint64_t n) {
    const std::uint64_t i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return i >= n ? n - 1 : i;
}

void SolverConfig::validate() const {
    if (restarts < 1) throw InputError("solver: restarts must be >= 1");
    if (iterations < 1) throw InputError("solver: iterations must be >= 1");
    if (!(sigma > 0.0)) throw InputError("solver: sigma must be positive");
    if (!(initial_temperature > 0.0)) throw InputError("solver: temperature must be positive");
    if (!(cooling > 0.0 && cooling <= 1.0)) throw InputError("solver: cooling must be in (0,1]");
    if (bounds) {
        const Vec3 he = bounds->half_extents;
        if (!(he.x > 0.0 && he.y > 0.0 && he.z > 0.0) || !bounds->center.finite())
            throw InfeasibleError("solver: degenerate search bounds");
    }
}

Box3 default_bounds(const UserPose& user) {
    return Box3{user.eye + user.forward, Vec3{1.0, 1.0, 1.0}};
}

namespace {

Layout initial_layout(const Scene& scene, const ObjectiveParams& params, const Box3& bounds,
                      int restart_index, const Layout* warm_start, Rng& rng) {
    Layout layout;
    if (restart_index == 0 && warm_start) {
        for (const auto& e : scene.elements)
            layout.positions[e.id] = clamp_to_bounds(warm_start->position_of(e.id), bounds);
        return layout;
    }
    if (restart_index == 0) {
        // Canonical start: elements fanned out at the preferred distance.
        const Vec3 right = scene.user.up.cross(scene.user.forward);
        const double d_pref = 0.5 * (params.distance_min + params.distance_max);
        const double m = static_cast<double>(scene.elements.size());
        int k = 0;
        for (const auto& e : scene.elements) {
            const double offset = (static_cast<double>(k) - 0.5 * (m - 1.0)) * 0.3;
            layout.positions[e.id] = clamp_to_bounds(
                scene.user.eye + scene.user.forward * d_pref + right * offset, bounds);
            ++k;
        }
        return layout;
    }
    const Vec3 lo = bounds.min_corner();
    const Vec3 hi = bounds.max_corner();
    for (const auto& e : scene.elements) {
        layout.positions[e.id] = Vec3{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y),
                                      rng.uniform(lo.z, hi.z)};
    }
    return layout;
}

}  // namespace

RestartResult run_restart(const Scene& scene, const WeightConfig& weights,
                          const ObjectiveParams& params, const SolverConfig& config,
                          int restart_index, const Layout* warm_start) {
    const Box3 bounds = config.bounds ? *config.bounds : default_bounds(scene.user);
    Rng rng(derive_stream(config.seed, static_cast<std::uint64_t>(restart_index)));

    Layout current = initial_layout(scene, params, bounds, restart_index, warm_start, rng);
    auto eval = [&](const Layout& l) {
        double q = evaluate_objective(scene, l, weights, params);
        if (warm_start) q += displacement_penalty(l, *warm_start, config.displacement_weight);
        return q;
    };

    double current_q = eval(current);
    RestartResult best{current, current_q, {}};
    best.trace.reserve(static_cast<std::size_t>(config.iterations));

    const std::size_t m = scene.elements.size();
    double temperature = config.initial_temperature;
    for (int it = 0; it < config.iterations; ++it) {
        if (m > 0) {
            // Swap moves escape role-assignment minima (two elements contending
            // for the same surface); Gaussian moves do the local work.
            const bool swap_move = m >= 2 && rng.uniform() < 0.15;
            std::string id_a, id_b;
            Vec3 old_a, old_b;
            if (swap_move) {
                const std::size_t i = rng.next_index(m);
                std::size_t j = rng.next_index(m - 1);
                if (j >= i) ++j;
                id_a = scene.elements[i].id;
                id_b = scene.elements[j].id;
                old_a = current.positions[id_a];
                old_b = current.positions[id_b];
                current.positions[id_a] = old_b;
                current.positions[id_b] = old_a;
            } else {
                const UiElement& element = scene.elements[static_cast<std::size_t>(it) % m];
                const double scale =
                    config.sigma *
                    std::max(std::sqrt(temperature / config.initial_temperature), 0.02);
                id_a = element.id;
                old_a = current.positions[id_a];
                current.positions[id_a] = clamp_to_bounds(
                    old_a +
                        Vec3{scale * rng.normal(), scale * rng.normal(), scale * rng.normal()},
                    bounds);
            }
            const double q = eval(current);
            const double delta = q - current_q;
            bool accept = delta <= 0.0;
            if (!accept) accept = rng.uniform() < std::exp(-delta / temperature);
            if (accept) {
                current_q = q;
                if (q < best.q) {
                    best.q = q;
                    best.layout = current;
                }
            } else {
                current.positions[id_a] = old_a;
                if (swap_move) current.positions[id_b] = old_b;
            }
        }
        temperature *= config.cooling;
        best.trace.push_back(TracePoint{it, best.q});
    }
    return best;
}

SolveResult optimize(const Scene& scene, const WeightConfig& weights,
                     const ObjectiveParams& params, const SolverConfig& config,
                     const Layout* warm_start) {
    config.validate();
    if (warm_start && !warm_start->covers(scene))
        throw InputError("warm start layout does not cover all scene elements");

    std::vector<RestartResult> results;
    results.reserve(static_cast<std::size_t>(config.restarts));
    if (config.parallel_restarts && config.restarts > 1) {
        std::vector<std::future<RestartResult>> futures;
        futures.reserve(static_cast<std::size_t>(config.restarts));
        for (int r = 0; r < config.restarts; ++r) {
            futures.push_back(std::async(std::launch::async, [&, r] {
                return run_restart(scene, weights, params, config, r, warm_start);
            }));
        }
        for (auto& f : futures) results.push_back(f.get());
    } else {
        for (int r = 0; r < config.restarts; ++r)
            results.push_back(run_restart(scene, weights, params, config, r, warm_start));
    }

    int best_index = 0;
    for (int r = 1; r < config.restarts; ++r) {
        if (results[static_cast<std::size_t>(r)].q <
            results[static_cast<std::size_t>(best_index)].q)
            best_index = r;
    }

    RestartResult& winner = results[static_cast<std::size_t>(best_index)];
    SolveResult out;
    out.layout = std::move(winner.layout);
    out.trace = std::move(winner.trace);
    out.best_restart = best_index;
    out.best_q = winner.q;
    out.report = total_objective(scene, out.layout, weights, params);
    return out;
}

namespace {

std::vector<double> lattice_axis(double lo, double hi, double spacing) {
    std::vector<double> values;
    const int count = static_cast<int>(std::floor((hi - lo) / spacing + 1e-9)) + 1;
    values.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) values.push_back(lo + spacing * k);
    return values;
}

}  // namespace

BruteForceResult brute_force(const Scene& scene, const WeightConfig& weights,
                             const ObjectiveParams& params, const Box3& bounds,
                             double grid_spacing, std::size_t cap) {
    if (!(grid_spacing > 0.0)) throw InputError("brute force: spacing must be positive");
    const Vec3 lo = bounds.min_corner();
    const Vec3 hi = bounds.max_corner();
    const std::vector<double> xs = lattice_axis(lo.x, hi.x, grid_spacing);
    const std::vector<double> ys = lattice_axis(lo.y, hi.y, grid_spacing);
    const std::vector<double> zs = lattice_axis(lo.z, hi.z, grid_spacing);
    const std::size_t lattice = xs.size() * ys.size() * zs.size();
    if (lattice == 0) throw InfeasibleError("brute force: empty candidate lattice");

    const std::size_t m = scene.elements.size();
    if (m == 0) throw InputError("brute force: scene has no elements");
    if (lattice * m > cap)
        throw InfeasibleError("brute force: candidate count exceeds cap");

    // Start in the lattice center; sweep one element at a time to a fixpoint.
    Layout layout;
    for (const auto& e : scene.elements) {
        layout.positions[e.id] =
            Vec3{xs[xs.size() / 2], ys[ys.size() / 2], zs[zs.size() / 2]};
    }
    double best_q = evaluate_objective(scene, layout, weights, params);

    const int max_passes = m == 1 ? 1 : 64;
    for (int pass = 0; pass < max_passes; ++pass) {
        bool improved = false;
        for (const auto& e : scene.elements) {
            Vec3 best_pos = layout.positions[e.id];
            for (const double x : xs) {
                for (const double y : ys) {
                    for (const double z : zs) {
                        layout.positions[e.id] = Vec3{x, y, z};
                        const double q = evaluate_objective(scene, layout, weights, params);
                        if (q < best_q) {
                            best_q = q;
                            best_pos = Vec3{x, y, z};
                            improved = true;
                        }
                    }
                }
            }
            layout.positions[e.id] = best_pos;
        }
        if (!improved) break;
    }
    return BruteForceResult{layout, best_q, m >= 2};
}

}  // namespace mrl
