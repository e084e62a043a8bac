#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mrl/errors.hpp"
#include "mrl/reasoning.hpp"

namespace mrl {

namespace {

int env_int(const char* name, int fallback) {
    const char* v = std::getenv(name);
    return v ? std::atoi(v) : fallback;
}

// Split "http://host:port/path" into base url and path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string::npos)
        throw ProviderError("provider endpoint must be an http(s) URL: " + endpoint);
    const auto slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

HttpProviderConfig HttpProviderConfig::from_env() {
    HttpProviderConfig config;
    const char* endpoint = std::getenv("MRL_PROVIDER_ENDPOINT");
    if (!endpoint || !*endpoint)
        throw ProviderError("MRL_PROVIDER_ENDPOINT is not set (required for --provider live)");
    config.endpoint = endpoint;
    if (const char* key = std::getenv("MRL_PROVIDER_API_KEY")) config.api_key = key;
    config.timeout_ms = env_int("MRL_PROVIDER_TIMEOUT_MS", config.timeout_ms);
    config.max_retries = env_int("MRL_PROVIDER_RETRIES", config.max_retries);
    config.backoff_ms = env_int("MRL_PROVIDER_BACKOFF_MS", config.backoff_ms);
    return config;
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ProviderError("provider endpoint is empty");
}

std::string HttpProvider::query(const std::string& prompt, const std::string& image,
                                RatingMode mode, std::uint64_t instance_seed) {
    const auto [base, path] = split_endpoint(config_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    nlohmann::json payload;
    payload["prompt"] = prompt;
    payload["image"] = image;
    payload["mode"] = rating_mode_name(mode);
    payload["seed"] = instance_seed;
    const std::string body = payload.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(
                static_cast<long long>(config_.backoff_ms) * attempt));
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   err == httplib::Error::Read || err == httplib::Error::Write;
            last_error = timed_out ? "provider timeout" : "provider transport failure";
            last_error += " (" + std::string(httplib::to_string(err)) + ")";
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        if (!retryable_status(res->status))
            throw ProviderError("provider returned status " + std::to_string(res->status));
        last_error = res->status == 429
                         ? "provider rate-limited (429)"
                         : "provider server error (" + std::to_string(res->status) + ")";
    }
    throw ProviderError(last_error + " after " + std::to_string(config_.max_retries) +
                        " retries");
}

}  // namespace mrl
