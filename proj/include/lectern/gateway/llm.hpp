#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/gateway/gateway.hpp"

namespace lectern::gateway {

struct ChatMessage {
    std::string role;
    std::string content;
};

// A rendered prompt. `template_name` ("composer/skeletonize@1") is logged in
// the run trace and hashed into the request.
struct Prompt {
    std::string template_name;
    std::vector<ChatMessage> messages;
};

// Renders assets/prompts/<name>. Template files start with a "version: N"
// line followed by "--- system" and "--- user" sections.
Prompt render_prompt(const std::string& name,
                     const std::vector<std::pair<std::string, std::string>>& vars);

// Canonical LLM request payload. `input` is the structured view of the
// prompt variables; template agents answer from it, chat backends ignore it.
std::string llm_payload(const Prompt& prompt, const Json& input, const std::string& purpose, int attempt);

// Canonical response payload carrying the assistant text.
std::string llm_response_payload(const std::string& content);
std::string llm_response_content(const std::string& payload);

// Strips an optional ```json fence and parses the assistant text.
Json parse_llm_json(const std::string& content);

// Raised when every attempt returned text that failed the caller's schema.
// detail() holds the last raw response.
class LlmSchemaFailure : public Error {
public:
    LlmSchemaFailure(const std::string& message, std::string raw, int attempts)
        : Error("LlmSchemaFailure", message, std::move(raw)), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

using SchemaCheck = std::function<void(const Json&)>;  // throws SchemaError

// Structured-output LLM calls with schema validation. A response that fails
// to parse or validate is retried (with the attempt number in the payload)
// up to policy.max_attempts times.
class LlmClient {
public:
    LlmClient(Gateway& gateway, RetryPolicy policy);

    Json complete(const std::string& purpose, const Prompt& prompt, const Json& input,
                  const SchemaCheck& check);

    Gateway& gateway() { return gateway_; }
    const RetryPolicy& policy() const { return policy_; }

private:
    Gateway& gateway_;
    RetryPolicy policy_;
};

}  // namespace lectern::gateway
