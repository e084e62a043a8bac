#pragma once

#include <stdexcept>
#include <string>

namespace mrl {

// Error categories map 1:1 onto CLI exit codes (see tools/main.cpp).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or invariant-violating input (files, schemas, value ranges).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rating-provider failures: missing endpoint config, transport, bad status.
struct ProviderError : std::runtime_error {
    explicit ProviderError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimization cannot produce a candidate (degenerate bounds, empty lattice).
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mrl
