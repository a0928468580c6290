#pragma once

#include <memory>
#include <string>

#include "lectern/gateway/gateway.hpp"

namespace lectern::gateway {

struct HttpEndpoint {
    std::string url;    // scheme://host[:port]/path
    std::string model;  // LLM only
    std::string key;
    double timeout_s = 120.0;
};

// Reads LECTERN_<PREFIX>_ENDPOINT / _MODEL / _KEY. nullopt if no endpoint.
std::optional<HttpEndpoint> endpoint_from_env(const std::string& prefix);

// Chat-completion transport. Sends the payload's messages to the endpoint
// and wraps choices[0].message.content as a canonical response payload.
std::shared_ptr<Transport> make_http_llm_transport(HttpEndpoint endpoint);

// TTS transport. Posts {text, voice_id, language, units} and expects
// {duration_s, per_unit_durations_s, media_ref}; returns it canonicalized.
std::shared_ptr<Transport> make_http_tts_transport(HttpEndpoint endpoint);

}  // namespace lectern::gateway
