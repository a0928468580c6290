#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "lectern/gateway/http.hpp"

#include <cstdlib>
#include <regex>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/gateway/llm.hpp"

namespace lectern::gateway {

namespace {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

UrlParts split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("malformed service endpoint '" + url + "'");
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string post_json(const HttpEndpoint& ep, const std::string& body) {
    const UrlParts parts = split_url(ep.url);
    httplib::Client client(parts.origin);
    const auto secs = static_cast<time_t>(ep.timeout_s);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    httplib::Headers headers;
    if (!ep.key.empty()) headers.emplace("Authorization", "Bearer " + ep.key);
    auto res = client.Post(parts.path, headers, body, "application/json");
    if (!res) throw TransportError("request to " + ep.url + " failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("service returned HTTP " + std::to_string(res->status));
    if (res->status >= 400)
        throw ServiceError("service rejected request with HTTP " + std::to_string(res->status) + ": " +
                           res->body.substr(0, 512));
    return res->body;
}

class HttpLlmTransport final : public Transport {
public:
    explicit HttpLlmTransport(HttpEndpoint ep) : ep_(std::move(ep)) {}

    std::string send(const ServiceRequest& request) override {
        Json payload = canonical_parse(request.payload, "llm request");
        Json body = {{"model", ep_.model}, {"messages", payload.at("messages")}, {"temperature", 0}};
        const std::string raw = post_json(ep_, body.dump());
        Json resp;
        try {
            resp = Json::parse(raw);
            return llm_response_payload(resp.at("choices").at(0).at("message").at("content").get<std::string>());
        } catch (const Json::exception& e) {
            throw TransportError(std::string("unexpected chat response: ") + e.what());
        }
    }

private:
    HttpEndpoint ep_;
};

class HttpTtsTransport final : public Transport {
public:
    explicit HttpTtsTransport(HttpEndpoint ep) : ep_(std::move(ep)) {}

    std::string send(const ServiceRequest& request) override {
        const std::string raw = post_json(ep_, request.payload);
        try {
            Json resp = Json::parse(raw);
            Json out = {{"duration_s", resp.at("duration_s").get<double>()},
                        {"per_unit_durations_s", resp.at("per_unit_durations_s")},
                        {"media_ref", resp.value("media_ref", Json(nullptr))}};
            return canonical_dump(out);
        } catch (const Json::exception& e) {
            throw TransportError(std::string("unexpected tts response: ") + e.what());
        }
    }

private:
    HttpEndpoint ep_;
};

}  // namespace

std::optional<HttpEndpoint> endpoint_from_env(const std::string& prefix) {
    auto get = [&](const char* suffix) {
        const char* v = std::getenv(("LECTERN_" + prefix + "_" + suffix).c_str());
        return v ? std::string(v) : std::string();
    };
    HttpEndpoint ep{get("ENDPOINT"), get("MODEL"), get("KEY")};
    if (ep.url.empty()) return std::nullopt;
    return ep;
}

std::shared_ptr<Transport> make_http_llm_transport(HttpEndpoint endpoint) {
    return std::make_shared<HttpLlmTransport>(std::move(endpoint));
}

std::shared_ptr<Transport> make_http_tts_transport(HttpEndpoint endpoint) {
    return std::make_shared<HttpTtsTransport>(std::move(endpoint));
}

}  // namespace lectern::gateway
