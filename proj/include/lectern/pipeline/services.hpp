#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "lectern/core/types.hpp"
#include "lectern/debugger/renderer.hpp"
#include "lectern/gateway/gateway.hpp"
#include "lectern/gateway/llm.hpp"
#include "lectern/narrator/narrator.hpp"
#include "lectern/pipeline/pipeline.hpp"

namespace lectern::pipeline {

enum class LlmSource { environment, template_agent };

struct ServiceOptions {
    gateway::FixtureMode mode = gateway::FixtureMode::passthrough;
    std::filesystem::path fixture_dir;  // replay source or record target
    LlmSource llm = LlmSource::environment;
};

// Gateway, LLM client, TTS, renderer and muxer wired from a config. In
// passthrough and record modes the LLM comes from LECTERN_LLM_* (or the
// built-in template agent); replay never touches a transport.
class ServiceBundle {
public:
    ServiceBundle(const PipelineConfig& config, const ServiceOptions& options);

    Services services();
    const gateway::Gateway& gateway() const { return *gateway_; }

private:
    std::unique_ptr<gateway::Gateway> gateway_;
    std::unique_ptr<gateway::LlmClient> llm_;
    std::unique_ptr<narrator::TtsBackend> tts_;
    std::shared_ptr<debugger::Renderer> renderer_;
    std::shared_ptr<Muxer> muxer_;
};

}  // namespace lectern::pipeline
