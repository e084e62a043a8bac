#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mrl/objectives.hpp"
#include "mrl/scene.hpp"

namespace mrl {

struct SolverConfig {
    std::uint64_t seed = 0;
    int restarts = 8;
    int iterations = 2000;
    double initial_temperature = 1.0;
    double cooling = 0.995;
    double sigma = 0.15;  // meters, perturbation scale
    // Search bounds; when unset, a 2 m box centered 1 m ahead of the user.
    std::optional<Box3> bounds;
    // Quadratic penalty on displacement from the warm-start layout
    // (temporal-consistency regularizer, off by default).
    double displacement_weight = 0.0;
    bool parallel_restarts = true;

    void validate() const;
};

Box3 default_bounds(const UserPose& user);

struct TracePoint {
    int iteration;
    double best_q;
};

struct SolveResult {
    Layout layout;
    CostReport report;
    std::vector<TracePoint> trace;  // best-so-far Q of the winning restart
    int best_restart = 0;
    double best_q = 0.0;
};

// Simulated annealing over joint element positions, multi-restart; best
// layout across restarts (ties by restart index). Deterministic given
// (seed, inputs): restart RNG streams derive from (seed, restart index).
SolveResult optimize(const Scene& scene, const WeightConfig& weights,
                     const ObjectiveParams& params, const SolverConfig& config,
                     const Layout* warm_start = nullptr);

// One restart of the annealing loop, exposed for restart-independence tests.
struct RestartResult {
    Layout layout;
    double q;
    std::vector<TracePoint> trace;
};
RestartResult run_restart(const Scene& scene, const WeightConfig& weights,
                          const ObjectiveParams& params, const SolverConfig& config,
                          int restart_index, const Layout* warm_start);

struct BruteForceResult {
    Layout layout;
    double q;
    bool coordinate_sweep;  // true when >= 2 elements (sweep to fixpoint)
};

// Exact minimum over the position lattice for one element; for two or more
// elements a per-element exhaustive sweep iterated to a fixpoint.
BruteForceResult brute_force(const Scene& scene, const WeightConfig& weights,
                             const ObjectiveParams& params, const Box3& bounds,
                             double grid_spacing, std::size_t cap = 1000000);

// Deterministic RNG used by the solver: mt19937_64 raw words with explicit
// uniform/normal mappings, so results do not depend on libstdc++
// distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double normal();                       // standard normal, Box-Muller
    std::uint64_t next_index(std::uint64_t n);

  private:
    std::uint64_t next_word();
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace mrl
