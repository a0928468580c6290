#include "lectern/pipeline/services.hpp"

#include "lectern/core/errors.hpp"
#include "lectern/gateway/http.hpp"
#include "lectern/mock/template_llm.hpp"

namespace lectern::pipeline {

ServiceBundle::ServiceBundle(const PipelineConfig& config, const ServiceOptions& options) {
    gateway::GatewayOptions g;
    g.mode = options.mode;
    g.fixture_dir = options.fixture_dir;
    g.seed = static_cast<std::uint64_t>(config.seed);
    g.llm_per_minute = config.rate_limit_rpm;
    g.tts_per_minute = config.rate_limit_rpm;

    std::shared_ptr<gateway::Transport> llm;
    std::shared_ptr<gateway::Transport> tts;
    if (options.mode != gateway::FixtureMode::replay) {
        if (options.llm == LlmSource::template_agent) {
            llm = mock::make_template_llm();
        } else if (auto ep = gateway::endpoint_from_env("LLM")) {
            llm = gateway::make_http_llm_transport(*ep);
        } else {
            throw ConfigError("no LLM service configured: set LECTERN_LLM_ENDPOINT or replay recorded fixtures");
        }
        if (config.tts_backend == "service") {
            auto ep = gateway::endpoint_from_env("TTS");
            if (!ep) throw ConfigError("tts_backend is \"service\" but LECTERN_TTS_ENDPOINT is not set");
            tts = gateway::make_http_tts_transport(*ep);
        }
    }
    gateway_ = std::make_unique<gateway::Gateway>(g, std::move(llm), std::move(tts));

    gateway::RetryPolicy policy;
    policy.max_attempts = config.llm_max_attempts;
    llm_ = std::make_unique<gateway::LlmClient>(*gateway_, policy);

    if (config.tts_backend == "mock")
        tts_ = std::make_unique<narrator::MockTts>(config.words_per_minute_default);
    else if (config.tts_backend == "service")
        tts_ = std::make_unique<narrator::ServiceTts>(*gateway_, policy);
    else
        throw ConfigError("unknown tts_backend '" + config.tts_backend + "'");

    renderer_ = debugger::make_renderer(config.renderer);
    muxer_ = make_muxer(config.muxer);
}

Services ServiceBundle::services() { return {*llm_, *tts_, *renderer_, *muxer_}; }

}  // namespace lectern::pipeline
