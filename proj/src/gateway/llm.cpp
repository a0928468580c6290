#include "lectern/gateway/llm.hpp"

#include "lectern/core/assets.hpp"
#include "lectern/core/serialize.hpp"

namespace lectern::gateway {

Prompt render_prompt(const std::string& name,
                     const std::vector<std::pair<std::string, std::string>>& vars) {
    const std::string text = fill_template(asset("prompts/" + name), vars);
    Prompt prompt;
    std::string version = "0";
    std::string* current = nullptr;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.rfind("version:", 0) == 0 && prompt.messages.empty()) {
            version = line.substr(8);
            version.erase(0, version.find_first_not_of(' '));
        } else if (line.rfind("--- ", 0) == 0) {
            prompt.messages.push_back({line.substr(4), ""});
            current = &prompt.messages.back().content;
        } else if (current) {
            if (!current->empty()) *current += '\n';
            *current += line;
        }
    }
    for (auto& m : prompt.messages) {
        while (!m.content.empty() && m.content.back() == '\n') m.content.pop_back();
    }
    prompt.template_name = name + "@" + version;
    return prompt;
}

std::string llm_payload(const Prompt& prompt, const Json& input, const std::string& purpose, int attempt) {
    Json messages = Json::array();
    for (const auto& m : prompt.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    Json doc = {{"purpose", purpose},
                {"template", prompt.template_name},
                {"attempt", attempt},
                {"messages", messages},
                {"input", input}};
    return canonical_dump(doc);
}

std::string llm_response_payload(const std::string& content) {
    return canonical_dump(Json{{"content", content}});
}

std::string llm_response_content(const std::string& payload) {
    Json doc = canonical_parse(payload, "llm response");
    return with_schema_errors("llm response", [&] { return doc.at("content").get<std::string>(); });
}

Json parse_llm_json(const std::string& content) {
    std::string_view body = content;
    const auto fence = body.find("```");
    if (fence != std::string_view::npos) {
        auto start = body.find('\n', fence);
        auto end = body.rfind("```");
        if (start != std::string_view::npos && end > start) body = body.substr(start + 1, end - start - 1);
    }
    return canonical_parse(body, "llm output");
}

LlmClient::LlmClient(Gateway& gateway, RetryPolicy policy) : gateway_(gateway), policy_(policy) {}

Json LlmClient::complete(const std::string& purpose, const Prompt& prompt, const Json& input,
                         const SchemaCheck& check) {
    const int attempts = std::max(1, policy_.max_attempts);
    std::string raw;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        ServiceRequest req{ServiceKind::llm, llm_payload(prompt, input, purpose, attempt), purpose};
        ServiceResponse resp = gateway_.call(req, policy_);
        try {
            raw = llm_response_content(resp.payload);
            Json out = parse_llm_json(raw);
            with_schema_errors(purpose, [&] {
                check(out);
                return 0;
            });
            return out;
        } catch (const ParseError& e) {
            last_error = e.what();
        } catch (const SchemaError& e) {
            last_error = e.what();
        }
    }
    throw LlmSchemaFailure(purpose + ": response failed schema after " + std::to_string(attempts) +
                               " attempts: " + last_error,
                           raw, attempts);
}

}  // namespace lectern::gateway
