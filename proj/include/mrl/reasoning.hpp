#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mrl/scene.hpp"

namespace mrl {

enum class RatingMode { overlay, interaction };
const char* rating_mode_name(RatingMode mode);
RatingMode rating_mode_from_name(const std::string& name);

enum class ReasonCategory {
    functionality,
    aesthetics,
    social,
    health_safety,
    other,
    unclassified,
};
inline constexpr int kCategoryCount = 6;
const char* category_name(ReasonCategory c);
std::optional<ReasonCategory> category_from_name(const std::string& name);
// Case-insensitive keyword match on the factor names; Other when the text
// says so; unclassified when no factor name appears.
ReasonCategory categorize_reason(const std::string& reason_text);

struct AreaAnnotation {
    int index = 0;  // >= 1, unique and contiguous per image
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    std::string entity_id;  // optional link into the scene
};

struct FewShotArea {
    int index = 0;
    double median = 0.0;  // 1..5
    double sd = 0.0;      // >= 0
};

struct FewShotExample {
    std::string image;  // opaque attachment id
    std::vector<FewShotArea> areas;
};

struct RatingQuery {
    RatingMode mode = RatingMode::overlay;
    std::string image;
    std::vector<AreaAnnotation> areas;
    std::vector<FewShotExample> few_shot;
    bool monitor_refinement = false;

    void validate() const;
};

// Survey-mimicry context, one few-shot block per example, and (when flagged)
// the monitor refinement sentence last.
std::string build_context_prompt(const RatingQuery& query);
// Mode-specific question plus the response format instruction.
std::string build_query_prompt(RatingMode mode);

struct RatingResponse {
    int area = 0;
    int score = 0;  // 1..5
    std::string reason_text;
    ReasonCategory category = ReasonCategory::unclassified;
};

struct ParseDiagnostics {
    std::vector<std::string> malformed;  // offending line + why
};

// One response per well-formed "Area N: S, R" line; malformed lines land in
// diagnostics. Zero well-formed lines is a parse failure.
std::vector<RatingResponse> parse_response(const std::string& text,
                                           ParseDiagnostics* diag = nullptr);
// Canonical rendering, one "Area N: S, R" line each (round-trips through
// parse_response).
std::string render_responses(const std::vector<RatingResponse>& responses);

struct AreaAggregate {
    int area = 0;
    double median = 0.0;
    double sd = 0.0;  // population standard deviation
    ReasonCategory category_mode = ReasonCategory::unclassified;
};

// Median/SD of scores per area across instances; modal reason category with
// ties broken in factor declaration order.
std::vector<AreaAggregate> aggregate_ratings(
    const std::vector<std::vector<RatingResponse>>& per_instance);

class RatingProvider {
  public:
    virtual ~RatingProvider() = default;
    virtual std::string query(const std::string& prompt, const std::string& image,
                              RatingMode mode, std::uint64_t instance_seed) = 0;
};

// Canned responses keyed by (image id, mode, instance seed); bit-deterministic.
class MockProvider : public RatingProvider {
  public:
    static MockProvider from_json(const std::string& text);
    std::string query(const std::string& prompt, const std::string& image, RatingMode mode,
                      std::uint64_t instance_seed) override;
    void add(const std::string& image, RatingMode mode, std::uint64_t seed, std::string text);

  private:
    std::map<std::string, std::string> canned_;  // "image\x1fmode\x1fseed" -> text
};

struct HttpProviderConfig {
    std::string endpoint;  // http://host:port/path
    std::string api_key;
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_ms = 100;

    // Reads MRL_PROVIDER_ENDPOINT / MRL_PROVIDER_API_KEY plus optional
    // MRL_PROVIDER_TIMEOUT_MS / MRL_PROVIDER_RETRIES / MRL_PROVIDER_BACKOFF_MS.
    static HttpProviderConfig from_env();
};

// Posts {prompt, image, mode, seed} as JSON and returns the response body.
// Retries transport failures, 429 and 5xx with backoff; other statuses fail
// immediately. All failures raise ProviderError.
class HttpProvider : public RatingProvider {
  public:
    explicit HttpProvider(HttpProviderConfig config);
    std::string query(const std::string& prompt, const std::string& image, RatingMode mode,
                      std::uint64_t instance_seed) override;

  private:
    HttpProviderConfig config_;
};

// Runs instance seeds 0..n-1 through the provider (concurrently up to
// max_in_flight) and parses each response. Aggregation order is by instance
// index, so results are deterministic for a deterministic provider.
std::vector<std::vector<RatingResponse>> run_rating_instances(RatingProvider& provider,
                                                              const RatingQuery& query,
                                                              int n_instances,
                                                              int max_in_flight = 4);

struct ApplyRatingsResult {
    std::vector<PhysicalEntity> entities;
    std::vector<int> unlinked_areas;
};

// Writes normalize_rating(round-half-up(median)) into the linked entities'
// overlay or interaction rating; unlinked areas are reported, not applied.
ApplyRatingsResult apply_ratings(const std::vector<AreaAggregate>& aggregates,
                                 const std::map<int, std::string>& links,
                                 std::vector<PhysicalEntity> entities, RatingMode mode);

}  // namespace mrl
