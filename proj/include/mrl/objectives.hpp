#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrl/geometry.hpp"
#include "mrl/scene.hpp"

namespace mrl {

enum class Term {
    occlusion,
    look_towards,
    distance,
    field_of_view,
    constant_view_size,
    overlay_suitability,
    interaction_suitability,
};

inline constexpr int kTermCount = 7;
extern const std::array<const char*, kTermCount> kTermNames;

std::optional<Term> term_from_name(const std::string& name);

// Geometry knobs shared by the ray-cast terms. Suitability rays extend past
// the element by default: a box behind the element is covered from the
// user's viewpoint just like one in front. clip_at_element limits hits to
// t <= t_sample for sensitivity studies.
struct ObjectiveParams {
    int grid_n = 5;
    bool clip_at_element = false;
    double distance_min = 0.3;
    double distance_max = 0.7;
    double fov_half_angle = 0.7853981633974483;  // 45 degrees
    double reference_distance = 0.5;
};

// Global per-term weights with optional per-element overrides.
struct WeightConfig {
    std::array<double, kTermCount> global{};
    std::map<std::string, std::array<std::optional<double>, kTermCount>> overrides;

    static WeightConfig validated(std::array<double, kTermCount> global,
                                  decltype(overrides) overrides = {});
    double weight(Term term, const std::string& element_id) const;
};

struct CostReport {
    struct ElementCosts {
        std::string element_id;
        std::array<double, kTermCount> costs{};
        double weighted = 0.0;
    };
    std::vector<ElementCosts> elements;
    double total = 0.0;

    double cost_of(const std::string& element_id, Term term) const;
};

// Penalty of overlaying a box with overlay rating o_b: 0.5 - o_b when
// o_b <= 0.5, else 0 (boxes rated suitable carry no penalty).
double overlay_penalty(double o_b);

// Sum over rays and box entry hits of p_b * exp(-5 * d_h).
double overlay_cost(const Scene& scene, const UiElement& element, const Vec3& position,
                    const ObjectiveParams& params);

// Sum over rays and box entry hits of f_v * (0.5 - i_b) * exp(-5 * d_h);
// negative when hit boxes rate above 0.5.
double interaction_cost(const Scene& scene, const UiElement& element, const Vec3& position,
                        const ObjectiveParams& params);

// Sum over other elements of the fraction of this element's rays that pass
// through the other element's billboarded rectangle before their sample.
double occlusion_cost(const Scene& scene, const Layout& layout, const UiElement& element,
                      const ObjectiveParams& params);

// (1 - cos angle(forward, eye->element)) / 2.
double look_towards_cost(const UserPose& user, const Vec3& position);

// 0 inside [d_min, d_max], quadratic in the relative violation outside.
double distance_cost(const UserPose& user, const Vec3& position, double d_min, double d_max);

// 0 within the half-angle cone, quadratic in the relative excess outside.
double fov_cost(const UserPose& user, const Vec3& position, double half_angle);

// (1 - reference_distance / d)^2: apparent-size deviation from the size at
// the reference distance.
double view_size_cost(const UserPose& user, const Vec3& position, double reference_distance);

// Weighted total Q and the per-element, per-term decomposition.
CostReport total_objective(const Scene& scene, const Layout& layout, const WeightConfig& weights,
                           const ObjectiveParams& params);

// Same weighted sum without the report, skipping zero-weight terms.
double evaluate_objective(const Scene& scene, const Layout& layout, const WeightConfig& weights,
                          const ObjectiveParams& params);

}  // namespace mrl
