#include "lectern/gateway/gateway.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "lectern/core/errors.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/fs.hpp"

namespace lectern::gateway {

std::string to_name(ServiceKind kind) { return kind == ServiceKind::llm ? "llm" : "tts"; }

std::vector<double> backoff_schedule(const RetryPolicy& policy, std::uint64_t seed, int retries) {
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    double delay = policy.base_delay_s;
    for (int i = 0; i < retries; ++i) {
        // 53 random bits mapped to [0, 1).
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        out.push_back(delay * (1.0 + policy.jitter * (2.0 * u - 1.0)));
        delay *= policy.factor;
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned char b : digest) {
        hex += kHex[b >> 4];
        hex += kHex[b & 0xF];
    }
    return hex;
}

std::string request_hash(const ServiceRequest& request) {
    std::string material = to_name(request.service);
    material += '\n';
    material += request.purpose;
    material += '\n';
    material += request.payload;
    return sha256_hex(material);
}

FixtureStore::FixtureStore(std::filesystem::path root, FixtureMode mode)
    : root_(std::move(root)), mode_(mode) {}

std::optional<std::string> FixtureStore::lookup(const ServiceRequest& request,
                                                const std::string& hash) const {
    std::shared_lock lock(mutex_);
    const auto path = root_ / request.purpose / hash;
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    Json doc = canonical_parse(ss.str(), path.string());
    Json v = with_schema_errors("fixture", [&] { return open_envelope(doc, "Fixture"); });
    if (v.at("request_payload").get<std::string>() != request.payload) return std::nullopt;
    return v.at("response_payload").get<std::string>();
}

void FixtureStore::record(const ServiceRequest& request, const std::string& hash,
                          const std::string& response) {
    std::unique_lock lock(mutex_);
    Json v = {{"service", to_name(request.service)},
              {"purpose", request.purpose},
              {"hash", hash},
              {"request_payload", request.payload},
              {"response_payload", response}};
    write_atomic(root_ / request.purpose / hash, canonical_dump(envelope("Fixture", v)));
}

std::vector<std::filesystem::path> FixtureStore::list() const {
    std::shared_lock lock(mutex_);
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::exists(root_)) return out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root_))
        if (entry.is_regular_file()) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t verify_fixtures(const std::filesystem::path& root) {
    const auto files = FixtureStore(root, FixtureMode::replay).list();
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        const std::string where = path.string();
        try {
            const Json v = open_envelope(canonical_parse(text, where), "Fixture");
            const std::string service = v.at("service").get<std::string>();
            if (service != "llm" && service != "tts") throw SchemaError("unknown service '" + service + "'");
            ServiceRequest req{service == "llm" ? ServiceKind::llm : ServiceKind::tts,
                               v.at("request_payload").get<std::string>(), v.at("purpose").get<std::string>()};
            const std::string hash = request_hash(req);
            if (v.at("hash").get<std::string>() != hash) throw SchemaError("stored hash does not match the request");
            if (path.lexically_relative(root) != std::filesystem::path(req.purpose) / hash)
                throw SchemaError("fixture is not stored at " + req.purpose + "/" + hash);
            if (canonical_dump(envelope("Fixture", v)) != text) throw SchemaError("not in canonical form");
        } catch (const SchemaError& e) {
            throw SchemaError(where + ": " + e.what(), where);
        } catch (const Json::exception& e) {
            throw SchemaError(where + ": " + e.what(), where);
        }
    }
    return files.size();
}

Clock steady_clock() {
    return [] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    };
}

Sleeper real_sleeper() {
    return [](double s) {
        if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
}

TokenBucket::TokenBucket(double per_minute, Clock clock, Sleeper sleeper)
    : per_second_(per_minute / 60.0), clock_(std::move(clock)), sleeper_(std::move(sleeper)) {}

void TokenBucket::acquire() {
    if (per_second_ <= 0) return;
    std::lock_guard lock(mutex_);
    const double now = clock_();
    if (last_ >= 0) tokens_ = std::min(1.0, tokens_ + (now - last_) * per_second_);
    last_ = now;
    if (tokens_ < 1.0) {
        const double wait = (1.0 - tokens_) / per_second_;
        sleeper_(wait);
        last_ = now + wait;
        tokens_ = 1.0;
    }
    tokens_ -= 1.0;
}

Gateway::Gateway(GatewayOptions options, std::shared_ptr<Transport> llm, std::shared_ptr<Transport> tts)
    : options_(std::move(options)),
      store_(options_.fixture_dir, options_.mode),
      llm_(std::move(llm)),
      tts_(std::move(tts)),
      llm_bucket_(options_.llm_per_minute, options_.clock, options_.sleeper),
      tts_bucket_(options_.tts_per_minute, options_.clock, options_.sleeper) {}

Transport* Gateway::transport_for(ServiceKind kind) const {
    return kind == ServiceKind::llm ? llm_.get() : tts_.get();
}

ServiceResponse Gateway::call(const ServiceRequest& request, const RetryPolicy& policy) {
    const std::string hash = request_hash(request);

    if (store_.mode() == FixtureMode::replay) {
        auto hit = store_.lookup(request, hash);
        if (!hit) throw FixtureMiss(hash, request.purpose);
        ++fixture_hits_;
        return {std::move(*hit), 0.0, 1};
    }

    Transport* transport = transport_for(request.service);
    if (!transport) throw ServiceError(request.purpose + ": no " + to_name(request.service) + " service configured");

    // Seed per request so concurrent callers get reproducible schedules.
    std::uint64_t seed = options_.seed;
    for (char c : hash.substr(0, 16)) seed = seed * 131 + static_cast<unsigned char>(c);
    const int attempts = std::max(1, policy.max_attempts);
    const auto delays = backoff_schedule(policy, seed, attempts - 1);

    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        (request.service == ServiceKind::llm ? llm_bucket_ : tts_bucket_).acquire();
        const double t0 = options_.clock();
        try {
            ++network_calls_;
            std::string payload = transport->send(request);
            const double latency_ms = (options_.clock() - t0) * 1000.0;
            if (store_.mode() == FixtureMode::record) {
                store_.record(request, hash, payload);
                ++fixture_writes_;
            }
            return {std::move(payload), latency_ms, attempt};
        } catch (const TransportError& e) {
            last_error = e.what();
        }
        if (attempt < attempts) {
            ++retries_;
            options_.sleeper(delays[static_cast<std::size_t>(attempt - 1)]);
        }
    }
    throw ServiceError(request.purpose + ": exhausted " + std::to_string(attempts) +
                       " attempts; last error: " + last_error);
}

GatewayStats Gateway::stats() const {
    return {network_calls_.load(), fixture_hits_.load(), fixture_writes_.load(), retries_.load()};
}

}  // namespace lectern::gateway
