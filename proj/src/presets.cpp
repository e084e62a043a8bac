#include "mrl/presets.hpp"

#include <json.hpp>

#include "mrl/errors.hpp"

namespace mrl {

using nlohmann::json;

namespace {

WeightConfig make_weights(double occlusion, double look, double dist, double fov, double view,
                          double overlay, double interaction) {
    return WeightConfig::validated({occlusion, look, dist, fov, view, overlay, interaction});
}

}  // namespace

const std::vector<Preset>& builtin_presets() {
    static const std::vector<Preset> presets = {
        {"user-centric", make_weights(0.3, 0.1, 0.15, 0.3, 0.15, 0.0, 0.0)},
        {"surface-adapt", make_weights(0.2, 0.1, 0.1, 0.2, 0.1, 0.0, 0.3)},
        {"situation-adapt", make_weights(0.2, 0.05, 0.1, 0.2, 0.1, 0.15, 0.2)},
    };
    return presets;
}

const WeightConfig& preset_weights(const std::string& name) {
    for (const Preset& p : builtin_presets()) {
        if (p.name == name) return p.weights;
    }
    throw UsageError("unknown preset '" + name +
                     "' (user-centric|surface-adapt|situation-adapt)");
}

WeightConfig load_weights(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("weights parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("weights"))
        throw InputError("weights file: expected {\"weights\": {term: value}}");

    std::array<double, kTermCount> global{};
    for (const auto& [name, value] : j.at("weights").items()) {
        const auto term = term_from_name(name);
        if (!term) throw InputError("weights file: unknown term '" + name + "'");
        global[static_cast<int>(*term)] = value.get<double>();
    }

    decltype(WeightConfig::overrides) overrides;
    if (j.contains("overrides")) {
        for (const auto& [element, terms] : j.at("overrides").items()) {
            auto& slot = overrides[element];
            for (const auto& [name, value] : terms.items()) {
                const auto term = term_from_name(name);
                if (!term)
                    throw InputError("weights file: unknown term '" + name + "' for element '" +
                                     element + "'");
                slot[static_cast<int>(*term)] = value.get<double>();
            }
        }
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "weights" && key != "overrides")
            throw InputError("weights file: unknown field '" + key + "'");
    }
    return WeightConfig::validated(global, std::move(overrides));
}

std::string save_weights(const WeightConfig& weights) {
    json j;
    for (int t = 0; t < kTermCount; ++t) j["weights"][kTermNames[t]] = weights.global[t];
    for (const auto& [element, terms] : weights.overrides) {
        for (int t = 0; t < kTermCount; ++t) {
            if (terms[t]) j["overrides"][element][kTermNames[t]] = *terms[t];
        }
    }
    return j.dump(2) + "\n";
}

}  // namespace mrl
