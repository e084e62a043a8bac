#include "mrl/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "mrl/errors.hpp"
#include "mrl/kernels.hpp"

namespace mrl {

const std::array<const char*, kTermCount> kTermNames = {
    "occlusion",          "look_towards",        "distance",
    "field_of_view",      "constant_view_size",  "overlay_suitability",
    "interaction_suitability",
};

std::optional<Term> term_from_name(const std::string& name) {
    for (int i = 0; i < kTermCount; ++i) {
        if (name == kTermNames[i]) return static_cast<Term>(i);
    }
    return std::nullopt;
}

WeightConfig WeightConfig::validated(std::array<double, kTermCount> global,
                                     decltype(WeightConfig::overrides) overrides) {
    bool any_positive = false;
    for (const double w : global) {
        if (!(w >= 0.0)) throw InputError("weights must be non-negative");
        if (w > 0.0) any_positive = true;
    }
    for (const auto& [id, terms] : overrides) {
        for (const auto& w : terms) {
            if (w && !(*w >= 0.0))
                throw InputError("override weight for '" + id + "' must be non-negative");
            if (w && *w > 0.0) any_positive = true;
        }
    }
    if (!any_positive) throw InputError("at least one weight must be positive");
    return WeightConfig{global, std::move(overrides)};
}

double WeightConfig::weight(Term term, const std::string& element_id) const {
    const auto it = overrides.find(element_id);
    if (it != overrides.end()) {
        const auto& w = it->second[static_cast<int>(term)];
        if (w) return *w;
    }
    return global[static_cast<int>(term)];
}

double CostReport::cost_of(const std::string& element_id, Term term) const {
    for (const auto& e : elements) {
        if (e.element_id == element_id) return e.costs[static_cast<int>(term)];
    }
    throw InputError("no cost entry for element '" + element_id + "'");
}

double overlay_penalty(double o_b) {
    if (!(o_b >= 0.0 && o_b <= 1.0)) throw InputError("overlay rating must be in [0,1]");
    return o_b <= 0.5 ? 0.5 - o_b : 0.0;
}

namespace {

// Accumulates coef_b * sum over entry hits of exp(-5*d_h) for one element's
// ray pack, entity by entity in scene order. coef_of decides the per-box
// factor and lets the caller skip zero-coefficient boxes.
template <typename CoefFn>
double accumulate_ray_term(const Scene& scene, const UiElement& element, const Vec3& position,
                           const ObjectiveParams& params, CoefFn coef_of) {
    kernels::RayPack pack;
    bool pack_built = false;
    kernels::HitBatch batch;
    double total = 0.0;
    for (const PhysicalEntity& entity : scene.entities) {
        const double coef = coef_of(entity);
        if (coef == 0.0) continue;
        if (!pack_built) {
            pack = element_ray_pack(scene, element, position, params.grid_n,
                                    params.clip_at_element);
            pack_built = true;
        }
        kernels::ray_box_entry_batch(pack, kernels::BoxGeom::from(entity.box), batch);
        double expsum = 0.0;
        for (std::size_t i = 0; i < pack.size(); ++i) {
            if (batch.hit[i]) expsum += std::exp(-5.0 * batch.dh[i]);
        }
        total += coef * expsum;
    }
    return total;
}

}  // namespace

double overlay_cost(const Scene& scene, const UiElement& element, const Vec3& position,
                    const ObjectiveParams& params) {
    return accumulate_ray_term(scene, element, position, params, [](const PhysicalEntity& e) {
        return overlay_penalty(e.overlay_rating);
    });
}

double interaction_cost(const Scene& scene, const UiElement& element, const Vec3& position,
                        const ObjectiveParams& params) {
    const double f_v = element.interaction_frequency;
    if (f_v == 0.0) return 0.0;
    return accumulate_ray_term(scene, element, position, params, [f_v](const PhysicalEntity& e) {
        return f_v * (0.5 - e.interaction_rating);
    });
}

double occlusion_cost(const Scene& scene, const Layout& layout, const UiElement& element,
                      const ObjectiveParams& params) {
    if (scene.elements.size() < 2) return 0.0;
    const Vec3 position = layout.position_of(element.id);
    const std::vector<Vec3> samples =
        rasterize_element(element, position, scene.user, params.grid_n);
    const Vec3 eye = scene.user.eye;

    double total = 0.0;
    for (const UiElement& other : scene.elements) {
        if (other.id == element.id) continue;
        const Vec3 other_pos = layout.position_of(other.id);
        const BillboardBasis basis = billboard_basis(other_pos, scene.user);
        const double hw = 0.5 * other.width;
        const double hh = 0.5 * other.height;
        int blocked = 0;
        for (const Vec3& sample : samples) {
            const Vec3 delta = sample - eye;
            const double t_sample = delta.norm();
            if (t_sample < 1e-12) continue;
            const Vec3 dir = delta / t_sample;
            const double denom = dir.dot(basis.normal);
            if (std::fabs(denom) < 1e-12) continue;
            const double t = (other_pos - eye).dot(basis.normal) / denom;
            if (t <= 0.0 || t >= t_sample) continue;  // only occluders in front
            const Vec3 q = eye + dir * t - other_pos;
            if (std::fabs(q.dot(basis.right)) <= hw && std::fabs(q.dot(basis.up)) <= hh)
                ++blocked;
        }
        total += static_cast<double>(blocked) / static_cast<double>(samples.size());
    }
    return total;
}

double look_towards_cost(const UserPose& user, const Vec3& position) {
    const Vec3 delta = position - user.eye;
    const double d = delta.norm();
    if (d < 1e-12) return 0.5;
    const double c = std::clamp(delta.dot(user.forward) / d, -1.0, 1.0);
    return (1.0 - c) / 2.0;
}

double distance_cost(const UserPose& user, const Vec3& position, double d_min, double d_max) {
    const double d = distance(position, user.eye);
    if (d < d_min) {
        const double v = (d_min - d) / d_min;
        return v * v;
    }
    if (d > d_max) {
        const double v = (d - d_max) / d_max;
        return v * v;
    }
    return 0.0;
}

double fov_cost(const UserPose& user, const Vec3& position, double half_angle) {
    const Vec3 delta = position - user.eye;
    const double d = delta.norm();
    if (d < 1e-12) return 0.0;
    const double c = std::clamp(delta.dot(user.forward) / d, -1.0, 1.0);
    const double angle = std::acos(c);
    if (angle <= half_angle) return 0.0;
    const double v = (angle - half_angle) / half_angle;
    return v * v;
}

double view_size_cost(const UserPose& user, const Vec3& position, double reference_distance) {
    const double d = std::max(distance(position, user.eye), 1e-12);
    const double v = 1.0 - reference_distance / d;
    return v * v;
}

namespace {

double term_cost(Term term, const Scene& scene, const Layout& layout, const UiElement& element,
                 const Vec3& position, const ObjectiveParams& params) {
    switch (term) {
        case Term::occlusion:
            return occlusion_cost(scene, layout, element, params);
        case Term::look_towards:
            return look_towards_cost(scene.user, position);
        case Term::distance:
            return distance_cost(scene.user, position, params.distance_min, params.distance_max);
        case Term::field_of_view:
            return fov_cost(scene.user, position, params.fov_half_angle);
        case Term::constant_view_size:
            return view_size_cost(scene.user, position, params.reference_distance);
        case Term::overlay_suitability:
            return overlay_cost(scene, element, position, params);
        case Term::interaction_suitability:
            return interaction_cost(scene, element, position, params);
    }
    return 0.0;
}

}  // namespace

CostReport total_objective(const Scene& scene, const Layout& layout, const WeightConfig& weights,
                           const ObjectiveParams& params) {
    if (!layout.covers(scene)) throw InputError("layout does not cover all scene elements");
    CostReport report;
    for (const UiElement& element : scene.elements) {
        CostReport::ElementCosts ec;
        ec.element_id = element.id;
        const Vec3 position = layout.position_of(element.id);
        for (int t = 0; t < kTermCount; ++t) {
            const Term term = static_cast<Term>(t);
            ec.costs[t] = term_cost(term, scene, layout, element, position, params);
            ec.weighted += weights.weight(term, element.id) * ec.costs[t];
        }
        report.total += ec.weighted;
        report.elements.push_back(std::move(ec));
    }
    return report;
}

double evaluate_objective(const Scene& scene, const Layout& layout, const WeightConfig& weights,
                          const ObjectiveParams& params) {
    double total = 0.0;
    for (const UiElement& element : scene.elements) {
        const Vec3 position = layout.position_of(element.id);
        double weighted = 0.0;
        for (int t = 0; t < kTermCount; ++t) {
            const Term term = static_cast<Term>(t);
            const double w = weights.weight(term, element.id);
            if (w == 0.0) continue;
            weighted += w * term_cost(term, scene, layout, element, position, params);
        }
        total += weighted;
    }
    return total;
}

}  // namespace mrl
