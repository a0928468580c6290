#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "lectern/gateway/gateway.hpp"
#include "lectern/gateway/llm.hpp"
#include "lectern/mock/template_llm.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("lectern-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline lectern::gateway::GatewayOptions quiet_options() {
    lectern::gateway::GatewayOptions o;
    o.sleeper = [](double) {};
    o.clock = [] { return 0.0; };
    return o;
}

// Gateway over the template LLM, or over `llm` when given.
struct MockServices {
    explicit MockServices(std::shared_ptr<lectern::gateway::Transport> llm = lectern::mock::make_template_llm(),
                          lectern::gateway::RetryPolicy policy = {3, 1.0, 2.0, 0.25})
        : gateway(quiet_options(), std::move(llm), nullptr), client(gateway, policy) {}
    lectern::gateway::Gateway gateway;
    lectern::gateway::LlmClient client;
};

// LLM transport answering with the template agent, except that `patch`
// may rewrite the parsed answer for matching purposes.
inline std::shared_ptr<lectern::gateway::Transport> patched_llm(
    std::function<void(const std::string& purpose, const lectern::Json& input, lectern::Json& answer)> patch) {
    auto base = lectern::mock::make_template_llm();
    return std::make_shared<lectern::mock::FunctionTransport>([base, patch](const lectern::gateway::ServiceRequest& r) {
        const auto content = lectern::gateway::llm_response_content(base->send(r));
        lectern::Json answer = lectern::canonical_parse(content);
        const lectern::Json input = lectern::canonical_parse(r.payload).at("input");
        patch(r.purpose, input, answer);
        return lectern::gateway::llm_response_payload(lectern::canonical_dump(answer));
    });
}

}  // namespace testing
