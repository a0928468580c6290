#pragma once

#include <optional>
#include <string>

#include "lectern/core/types.hpp"
#include "lectern/gateway/llm.hpp"

namespace lectern::narrator {

inline constexpr std::size_t kLookBackUnits = 2;

// The last kLookBackUnits units of `prev`, oldest first.
std::vector<NarrationUnit> look_back(const std::optional<NarrationScript>& prev);

struct NarrationRequest {
    gateway::Prompt prompt;
    Json input;
};

// Prompt and structured input for one page. Only the look-back tail of
// `prev` is included.
NarrationRequest build_narration_request(const PageBlueprint& page, const SceneProgram& scene,
                                         const std::optional<NarrationScript>& prev, const std::string& language);

NarrationScript compose_narration(const PageBlueprint& page, const SceneProgram& scene,
                                  const std::optional<NarrationScript>& prev, const std::string& language,
                                  gateway::LlmClient& llm);

// Text-to-speech contract: per-unit timing for a script.
class TtsBackend {
public:
    virtual ~TtsBackend() = default;
    virtual SynthesisResult synthesize(const NarrationScript& script, const std::string& voice_id,
                                       const std::string& language) = 0;
};

// Timing-only synthesis at a fixed words-per-minute rate. Durations are on
// the canonical micro grid; unit boundaries are rounded cumulatively so the
// unit durations sum exactly to the total.
class MockTts final : public TtsBackend {
public:
    explicit MockTts(double words_per_minute);
    SynthesisResult synthesize(const NarrationScript& script, const std::string& voice_id,
                               const std::string& language) override;

private:
    double wpm_;
};

// Synthesis through the gateway's TTS service.
class ServiceTts final : public TtsBackend {
public:
    ServiceTts(gateway::Gateway& gateway, gateway::RetryPolicy policy);
    SynthesisResult synthesize(const NarrationScript& script, const std::string& voice_id,
                               const std::string& language) override;

    static std::string request_payload(const NarrationScript& script, const std::string& voice_id,
                                       const std::string& language);

private:
    gateway::Gateway& gateway_;
    gateway::RetryPolicy policy_;
};

// Validates the backend's answer (length, sum within 1e-6) and fills the
// page index and speaking rate. Throws TtsError.
SynthesisResult synthesize(const NarrationScript& script, const std::string& voice_id, const std::string& language,
                           TtsBackend& backend);

}  // namespace lectern::narrator
