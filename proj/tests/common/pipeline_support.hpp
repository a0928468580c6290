#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lectern/debugger/renderer.hpp"
#include "lectern/narrator/narrator.hpp"
#include "lectern/pipeline/pipeline.hpp"
#include "support.hpp"

namespace testing {

class CountingTts final : public lectern::narrator::TtsBackend {
public:
    explicit CountingTts(double wpm) : inner_(wpm) {}
    lectern::SynthesisResult synthesize(const lectern::NarrationScript& script, const std::string& voice_id,
                                        const std::string& language) override {
        ++calls;
        return inner_.synthesize(script, voice_id, language);
    }
    std::atomic<int> calls{0};

private:
    lectern::narrator::MockTts inner_;
};

inline lectern::LectureOutline sample_outline() {
    lectern::LectureOutline o;
    o.topic_keywords = {"gradient descent", "learning rate", "convergence"};
    o.audience_level = lectern::AudienceLevel::intro;
    o.language = "en";
    o.free_notes = "Keep the math light.";
    return o;
}

inline lectern::PipelineConfig sample_config(bool review = false) {
    lectern::PipelineConfig c;
    c.target_duration_s = 120.0;
    c.review_enabled = review;
    c.parallelism = 3;
    return c;
}

// Offline services plus a pipeline over `root`.
struct Rig {
    explicit Rig(std::filesystem::path root, lectern::pipeline::RunOptions options = {})
        : tts(160.0), renderer(lectern::debugger::ScriptedRenderer::Options{}),
          pipeline(std::move(root), {svc.client, tts, renderer, muxer}, std::move(options)) {}
    MockServices svc;
    CountingTts tts;
    lectern::debugger::ScriptedRenderer renderer;
    lectern::pipeline::ManifestMuxer muxer;
    lectern::pipeline::Pipeline pipeline;
};

// Relative path → bytes of every regular file under `root`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[std::filesystem::relative(e.path(), root).generic_string()] = ss.str();
    }
    return out;
}

}  // namespace testing
