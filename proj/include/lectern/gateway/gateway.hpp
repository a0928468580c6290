#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace lectern::gateway {

enum class ServiceKind { llm, tts };

std::string to_name(ServiceKind kind);

struct ServiceRequest {
    ServiceKind service = ServiceKind::llm;
    std::string payload;  // canonical text
    std::string purpose;  // e.g. "composer.skeletonize"
};

struct ServiceResponse {
    std::string payload;
    double latency_ms = 0.0;
    int attempt_count = 0;
};

// Moves one request over the wire. Throws TransportError for failures the
// gateway may retry.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string send(const ServiceRequest& request) = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    double base_delay_s = 1.0;
    double factor = 2.0;
    double jitter = 0.25;  // each delay is scaled by a factor in [1 - jitter, 1 + jitter]
};

// Delays slept before retries 1..retries. Pure function of its inputs.
std::vector<double> backoff_schedule(const RetryPolicy& policy, std::uint64_t seed, int retries);

std::string sha256_hex(std::string_view bytes);

// Stable key over service, purpose tag and canonical payload (SHA-256 hex).
std::string request_hash(const ServiceRequest& request);

enum class FixtureMode { record, replay, passthrough };

// Recorded responses stored as <root>/<purpose>/<hash>.
class FixtureStore {
public:
    FixtureStore(std::filesystem::path root, FixtureMode mode);

    FixtureMode mode() const { return mode_; }
    const std::filesystem::path& root() const { return root_; }

    std::optional<std::string> lookup(const ServiceRequest& request, const std::string& hash) const;
    void record(const ServiceRequest& request, const std::string& hash, const std::string& response);

    // Every fixture file under root; used by `fixtures verify`.
    std::vector<std::filesystem::path> list() const;

private:
    std::filesystem::path root_;
    FixtureMode mode_;
    mutable std::shared_mutex mutex_;
};

// Checks every fixture under `root`: canonical Fixture envelope, stored at
// <purpose>/<hash>, hash matching its request. Returns the count; throws
// SchemaError naming the first bad file.
std::size_t verify_fixtures(const std::filesystem::path& root);

using Clock = std::function<double()>;           // seconds, monotonic
using Sleeper = std::function<void(double)>;     // seconds

Clock steady_clock();
Sleeper real_sleeper();

// Token bucket admitting at most `per_minute` requests per minute with a
// burst of one; zero disables it.
class TokenBucket {
public:
    TokenBucket(double per_minute, Clock clock, Sleeper sleeper);
    void acquire();

private:
    double per_second_;
    Clock clock_;
    Sleeper sleeper_;
    std::mutex mutex_;
    double tokens_ = 1.0;
    double last_ = -1.0;
};

struct GatewayStats {
    std::int64_t network_calls = 0;
    std::int64_t fixture_hits = 0;
    std::int64_t fixture_writes = 0;
    std::int64_t retries = 0;
};

struct GatewayOptions {
    FixtureMode mode = FixtureMode::passthrough;
    std::filesystem::path fixture_dir;
    std::uint64_t seed = 0;
    double llm_per_minute = 0.0;
    double tts_per_minute = 0.0;
    Clock clock = steady_clock();
    Sleeper sleeper = real_sleeper();
};

// Single access point for external services. Safe for concurrent callers.
class Gateway {
public:
    Gateway(GatewayOptions options, std::shared_ptr<Transport> llm, std::shared_ptr<Transport> tts);

    // Replay: fixture lookup only (FixtureMiss on a miss). Otherwise up to
    // policy.max_attempts tries with seeded exponential backoff; ServiceError
    // once they are exhausted. Record mode stores each successful response.
    ServiceResponse call(const ServiceRequest& request, const RetryPolicy& policy);

    GatewayStats stats() const;
    FixtureMode mode() const { return store_.mode(); }

private:
    Transport* transport_for(ServiceKind kind) const;

    GatewayOptions options_;
    FixtureStore store_;
    std::shared_ptr<Transport> llm_;
    std::shared_ptr<Transport> tts_;
    TokenBucket llm_bucket_;
    TokenBucket tts_bucket_;
    std::atomic<std::int64_t> network_calls_{0};
    std::atomic<std::int64_t> fixture_hits_{0};
    std::atomic<std::int64_t> fixture_writes_{0};
    std::atomic<std::int64_t> retries_{0};
};

}  // namespace lectern::gateway
