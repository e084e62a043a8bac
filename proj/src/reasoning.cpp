#include "mrl/reasoning.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <regex>
#include <semaphore>
#include <sstream>

#include <json.hpp>

#include "mrl/errors.hpp"

namespace mrl {

using nlohmann::json;

const char* rating_mode_name(RatingMode mode) {
    return mode == RatingMode::overlay ? "overlay" : "interaction";
}

RatingMode rating_mode_from_name(const std::string& name) {
    if (name == "overlay") return RatingMode::overlay;
    if (name == "interaction") return RatingMode::interaction;
    throw InputError("unknown rating mode '" + name + "' (overlay|interaction)");
}

const char* category_name(ReasonCategory c) {
    switch (c) {
        case ReasonCategory::functionality:
            return "Functionality";
        case ReasonCategory::aesthetics:
            return "Aesthetics";
        case ReasonCategory::social:
            return "Social";
        case ReasonCategory::health_safety:
            return "HealthSafety";
        case ReasonCategory::other:
            return "Other";
        case ReasonCategory::unclassified:
            return "Unclassified";
    }
    return "Unclassified";
}

std::optional<ReasonCategory> category_from_name(const std::string& name) {
    for (int i = 0; i < kCategoryCount; ++i) {
        const auto c = static_cast<ReasonCategory>(i);
        if (name == category_name(c)) return c;
    }
    return std::nullopt;
}

ReasonCategory categorize_reason(const std::string& reason_text) {
    std::string lower(reason_text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    const auto has = [&](const char* kw) { return lower.find(kw) != std::string::npos; };
    if (has("functionalit")) return ReasonCategory::functionality;
    if (has("aesthetic")) return ReasonCategory::aesthetics;
    if (has("social")) return ReasonCategory::social;
    if (has("health") || has("safety")) return ReasonCategory::health_safety;
    if (has("other")) return ReasonCategory::other;
    return ReasonCategory::unclassified;
}

void RatingQuery::validate() const {
    if (areas.empty()) throw InputError("rating query: at least one area is required");
    std::vector<int> idx;
    for (const auto& a : areas) idx.push_back(a.index);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] != static_cast<int>(i) + 1)
            throw InputError("rating query: area indices must be unique and contiguous from 1");
    }
    for (const auto& ex : few_shot) {
        for (const auto& a : ex.areas) {
            if (a.median < 1.0 || a.median > 5.0 || a.sd < 0.0)
                throw InputError("rating query: few-shot example '" + ex.image +
                                 "' has an invalid median/sd");
        }
    }
}

namespace {

// Survey-mimicry context. The interaction variant is the source wording; the
// overlay variant substitutes the overlaying terminology in the task sentence.
std::string context_text(RatingMode mode) {
    std::string text =
        "You will mimic a participant of a survey in which participants had to rate the "
        "suitability of Mixed Reality layouts that overlay User Interfaces onto parts of the "
        "real world. Thus, you will rate the suitability of ";
    text += mode == RatingMode::interaction ? "directly interacting with virtual UI elements"
                                            : "overlaying virtual UI elements";
    text +=
        " that you imagine be placed on each highlighted area of an image. All virtual elements "
        "would only be visible to you, not to other people in the image. All virtual elements "
        "would not obstruct the view of other people or light. The people you can see in the "
        "image are someone else, not yourself. You will rate the suitability of each area on a "
        "score that ranges from 1 to 5 where 1 means 'unsuitable', 2 means 'somewhat "
        "unsuitable', 3 means 'neutral', 4 means 'somewhat suitable' and 5 means 'suitable'.\n"
        "\n"
        "You will be asked to give the primary reason for your choice of suitability. Optional "
        "reasons are: functionality, social, health & safety, aesthetics, and other. "
        "Functionality means: the UI element hinders the functionality of the physical object. "
        "Social acceptability means: looking at or interacting with the UI element would be "
        "socially inappropriate. Health & Safety means: the UI element occludes safety critical "
        "information or may lead to sanitation issues during interaction. Aesthetics means: the "
        "UI element impairs the visual appeal of the physical surroundings. Other means: your "
        "primary reason is not covered in the list above.\n"
        "\n"
        "To improve your ability to imitate a participant, you will be shown images they have "
        "evaluated and receive information about the median and standard deviation of their "
        "ratings for the highlighted areas of these images. Please take these ratings into "
        "account when judging new images.";
    return text;
}

std::string format_stat(double value, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string few_shot_block(const FewShotExample& example, RatingMode mode) {
    std::string block =
        "Participants of a survey provided the following median responses along with standard "
        "deviations for the ";
    block += mode == RatingMode::interaction ? "direct interaction" : "overlay";
    block += " suitability of the areas in this image:";
    for (const auto& area : example.areas) {
        block += " area " + std::to_string(area.index) + ": median " +
                 format_stat(area.median, 1) + ", standard deviation " + format_stat(area.sd, 2) +
                 ";";
    }
    return block;
}

constexpr const char* kMonitorRefinement =
    "When a monitor displays content, overlaying a virtual element on top of it is unsuitable.";

constexpr const char* kFormatInstruction =
    "Provide your answer in the format: Area <area index>: <score>, <reason>.";

}  // namespace

std::string build_context_prompt(const RatingQuery& query) {
    query.validate();
    std::string prompt = context_text(query.mode);
    for (const auto& example : query.few_shot) {
        prompt += "\n\n";
        prompt += few_shot_block(example, query.mode);
    }
    if (query.monitor_refinement) {
        prompt += "\n\n";
        prompt += kMonitorRefinement;
    }
    return prompt;
}

std::string build_query_prompt(RatingMode mode) {
    std::string prompt;
    if (mode == RatingMode::overlay) {
        prompt =
            "Please rate the suitability of overlaying a virtual UI element on each area in "
            "this image.";
    } else {
        prompt =
            "Please rate the suitability of directly interacting with virtual UI elements "
            "displayed in each area. Note: All virtual elements are positioned within your "
            "arm's reach. If a virtual element covers a physical object, interacting with it "
            "means physically touching that object.";
    }
    prompt += "\n";
    prompt += kFormatInstruction;
    return prompt;
}

std::vector<RatingResponse> parse_response(const std::string& text, ParseDiagnostics* diag) {
    static const std::regex line_re(R"(^\s*[Aa]rea\s+([0-9]+)\s*:\s*(-?[0-9]+)\s*,(.*)$)");
    std::vector<RatingResponse> responses;
    ParseDiagnostics local;
    ParseDiagnostics& d = diag ? *diag : local;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::smatch m;
        if (!std::regex_match(line, m, line_re)) {
            d.malformed.push_back("unrecognized line: " + line);
            continue;
        }
        const long area = std::strtol(m[1].str().c_str(), nullptr, 10);
        const long score = std::strtol(m[2].str().c_str(), nullptr, 10);
        if (area < 1) {
            d.malformed.push_back("area index out of range: " + line);
            continue;
        }
        if (score < 1 || score > 5) {
            d.malformed.push_back("score out of range: " + line);
            continue;
        }
        std::string reason = m[3].str();
        const auto b = reason.find_first_not_of(" \t");
        const auto e = reason.find_last_not_of(" \t");
        reason = b == std::string::npos ? std::string() : reason.substr(b, e - b + 1);
        RatingResponse r;
        r.area = static_cast<int>(area);
        r.score = static_cast<int>(score);
        r.reason_text = reason;
        r.category = categorize_reason(reason);
        responses.push_back(std::move(r));
    }
    if (responses.empty()) {
        std::string msg = "no well-formed rating lines";
        for (const auto& bad : d.malformed) msg += "\n  " + bad;
        throw InputError(msg);
    }
    return responses;
}

std::string render_responses(const std::vector<RatingResponse>& responses) {
    std::string out;
    for (const auto& r : responses) {
        out += "Area " + std::to_string(r.area) + ": " + std::to_string(r.score) + ", " +
               r.reason_text + "\n";
    }
    return out;
}

namespace {

double median_of(std::vector<int> scores) {
    std::sort(scores.begin(), scores.end());
    const std::size_t n = scores.size();
    if (n % 2 == 1) return scores[n / 2];
    return 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
}

double population_sd(const std::vector<int>& scores) {
    const double n = static_cast<double>(scores.size());
    double mean = 0.0;
    for (const int s : scores) mean += s;
    mean /= n;
    double var = 0.0;
    for (const int s : scores) var += (s - mean) * (s - mean);
    return std::sqrt(var / n);
}

ReasonCategory modal_category(const std::vector<ReasonCategory>& cats) {
    std::array<int, kCategoryCount> counts{};
    for (const ReasonCategory c : cats) counts[static_cast<int>(c)]++;
    int best = 0;
    for (int i = 1; i < kCategoryCount; ++i) {
        if (counts[i] > counts[best]) best = i;  // ties keep declaration order
    }
    return static_cast<ReasonCategory>(best);
}

}  // namespace

std::vector<AreaAggregate> aggregate_ratings(
    const std::vector<std::vector<RatingResponse>>& per_instance) {
    std::map<int, std::vector<int>> scores;
    std::map<int, std::vector<ReasonCategory>> categories;
    for (const auto& responses : per_instance) {
        for (const auto& r : responses) {
            scores[r.area].push_back(r.score);
            categories[r.area].push_back(r.category);
        }
    }
    std::vector<AreaAggregate> out;
    for (const auto& [area, s] : scores) {
        AreaAggregate agg;
        agg.area = area;
        agg.median = median_of(s);
        agg.sd = population_sd(s);
        agg.category_mode = modal_category(categories[area]);
        out.push_back(agg);
    }
    return out;
}

namespace {

std::string mock_key(const std::string& image, RatingMode mode, std::uint64_t seed) {
    return image + '\x1f' + rating_mode_name(mode) + '\x1f' + std::to_string(seed);
}

}  // namespace

MockProvider MockProvider::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("mock fixtures parse error: ") + e.what());
    }
    if (!j.is_object()) throw InputError("mock fixtures: expected {image: {mode: {seed: text}}}");
    MockProvider provider;
    for (const auto& [image, modes] : j.items()) {
        if (!modes.is_object()) throw InputError("mock fixtures: '" + image + "' must map modes");
        for (const auto& [mode_name, seeds] : modes.items()) {
            const RatingMode mode = rating_mode_from_name(mode_name);
            if (!seeds.is_object())
                throw InputError("mock fixtures: '" + image + "." + mode_name +
                                 "' must map seeds");
            for (const auto& [seed_str, body] : seeds.items()) {
                std::uint64_t seed = 0;
                try {
                    seed = std::stoull(seed_str);
                } catch (...) {
                    throw InputError("mock fixtures: seed key '" + seed_str +
                                     "' is not an integer");
                }
                provider.add(image, mode, seed, body.get<std::string>());
            }
        }
    }
    return provider;
}

void MockProvider::add(const std::string& image, RatingMode mode, std::uint64_t seed,
                       std::string text) {
    canned_[mock_key(image, mode, seed)] = std::move(text);
}

std::string MockProvider::query(const std::string& /*prompt*/, const std::string& image,
                                RatingMode mode, std::uint64_t instance_seed) {
    const auto it = canned_.find(mock_key(image, mode, instance_seed));
    if (it == canned_.end()) {
        throw ProviderError("mock provider has no fixture for (" + image + ", " +
                            rating_mode_name(mode) + ", seed " +
                            std::to_string(instance_seed) + ")");
    }
    return it->second;
}

std::vector<std::vector<RatingResponse>> run_rating_instances(RatingProvider& provider,
                                                              const RatingQuery& query,
                                                              int n_instances,
                                                              int max_in_flight) {
    if (n_instances < 1) throw InputError("instances must be >= 1");
    if (max_in_flight < 1) max_in_flight = 1;

    const std::string prompt =
        build_context_prompt(query) + "\n\n" + build_query_prompt(query.mode);

    std::counting_semaphore<4096> slots(std::min(max_in_flight, 4096));
    std::vector<std::future<std::string>> futures;
    futures.reserve(static_cast<std::size_t>(n_instances));
    for (int i = 0; i < n_instances; ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
            slots.acquire();
            struct Release {
                std::counting_semaphore<4096>* s;
                ~Release() { s->release(); }
            } release{&slots};
            return provider.query(prompt, query.image, query.mode,
                                  static_cast<std::uint64_t>(i));
        }));
    }

    std::vector<std::vector<RatingResponse>> out;
    out.reserve(static_cast<std::size_t>(n_instances));
    for (int i = 0; i < n_instances; ++i) {
        std::string body = futures[static_cast<std::size_t>(i)].get();
        try {
            out.push_back(parse_response(body));
        } catch (const InputError& e) {
            throw InputError("instance " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

ApplyRatingsResult apply_ratings(const std::vector<AreaAggregate>& aggregates,
                                 const std::map<int, std::string>& links,
                                 std::vector<PhysicalEntity> entities, RatingMode mode) {
    ApplyRatingsResult result;
    for (const auto& agg : aggregates) {
        const auto link = links.find(agg.area);
        if (link == links.end()) {
            result.unlinked_areas.push_back(agg.area);
            continue;
        }
        auto entity = std::find_if(entities.begin(), entities.end(),
                                   [&](const PhysicalEntity& e) { return e.id == link->second; });
        if (entity == entities.end())
            throw InputError("area " + std::to_string(agg.area) + " links to unknown entity '" +
                             link->second + "'");
        const int rounded = static_cast<int>(std::floor(agg.median + 0.5));  // ties round up
        const double rating = normalize_rating(rounded);
        if (mode == RatingMode::overlay)
            entity->overlay_rating = rating;
        else
            entity->interaction_rating = rating;
    }
    result.entities = std::move(entities);
    return result;
}

}  // namespace mrl
