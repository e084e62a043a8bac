#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrl/reasoning.hpp"

namespace mrl {

struct MannWhitneyResult {
    double u;  // U statistic of the first sample, midrank tie handling
    double p;  // two-sided
    bool exact;
};

// Exact null distribution (subset enumeration over midrank sums) when
// |a| + |b| <= 12; normal approximation with tie correction and continuity
// correction otherwise. Two-sided p doubles the smaller tail, capped at 1.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// Rectangular score matrix: raters x (scenario, area) cells, plus the
// population tag and optional reason categories per cell.
struct RatingMatrix {
    std::vector<std::string> rater_ids;
    std::vector<bool> is_vlm;
    std::vector<std::string> cell_keys;             // "scenario\x1farea", sorted
    std::vector<std::vector<int>> scores;           // [rater][cell], 1..5
    std::vector<std::vector<ReasonCategory>> categories;  // empty or [rater][cell]

    std::size_t rater_count() const { return rater_ids.size(); }
    std::size_t cell_count() const { return cell_keys.size(); }
    bool has_categories() const { return !categories.empty(); }
    std::vector<std::size_t> raters_of(bool vlm) const;
};

// Number of cells where the rater's score deviates from the remaining
// participant population at p < alpha (leave-one-out for participants).
int divergence_profile(const RatingMatrix& matrix, std::size_t rater, double alpha = 0.05);

// Over seeded iterations pairing a random VLM rater with a random
// participant, the fraction of pairs where the VLM diverges in more cells
// (ties split at 0.5). Deterministic given the seed.
double bootstrap_population_test(const RatingMatrix& matrix, int iterations,
                                 std::uint64_t seed);

// Fraction of masked cells where the two groups' modal reason categories
// agree (ties broken in factor declaration order).
double mode_agreement(const std::vector<std::vector<ReasonCategory>>& cells_a,
                      const std::vector<std::vector<ReasonCategory>>& cells_b,
                      const std::vector<bool>& unsuitable_mask);

// Median score per cell for one population.
std::vector<double> cell_medians(const RatingMatrix& matrix, bool vlm);

// Cells where both populations' median falls below 3 ("Neutral").
std::vector<bool> unsuitable_mask(const RatingMatrix& matrix);

// Per-cell category lists for one population.
std::vector<std::vector<ReasonCategory>> cell_categories(const RatingMatrix& matrix, bool vlm);

// CSV with header rater_id,population,scenario,area,score[,category][,question].
// population is "participant" or "vlm"; question (optional) partitions rows
// into independent matrices keyed by question name ("overlay" when absent).
std::vector<std::pair<std::string, RatingMatrix>> load_rating_matrices(const std::string& csv);

}  // namespace mrl
