#pragma once

#include <string>
#include <vector>

#include "lectern/codegen/codegen.hpp"
#include "lectern/core/types.hpp"

namespace lectern::sync {

inline constexpr double kDriftTolerance = 0.1;
// Anchor prefix of the waits align inserts; they are dropped and rebuilt on
// every call, which keeps align idempotent.
inline constexpr const char* kWaitPrefix = "sync-wait-";

struct AlignResult {
    SceneProgram scene;
    std::vector<std::string> warnings;
};

// Schedules every event from narration timing and fills the gaps with
// explicit waits so the scene's timeline spans exactly the audio.
//
// Units start at the running sum of their durations. An event referenced by
// a unit starts with the first such unit. Unreferenced events travel with
// the closest referenced event before them; the first and last event, when
// unreferenced, are pinned to 0 and to the audio end, and the rest are
// spread linearly (floored to the micro grid) between their nearest
// scheduled neighbours. Durations are cut so an event ends before the next
// one starts.
AlignResult align(const SceneProgram& scene, const NarrationScript& script, const SynthesisResult& synth,
                  const codegen::DialectSpec& dialect);

struct Overrun {
    std::string anchor_id;
    double start_s = 0.0;
    double excess_s = 0.0;
    bool operator==(const Overrun&) const = default;
};

struct DriftReport {
    double audio_s = 0.0;
    double last_end_s = 0.0;
    double drift_s = 0.0;  // |last_end_s - audio_s|
    std::vector<Overrun> overruns;

    // True when drift and every overrun are within kDriftTolerance.
    bool empty() const;
};

DriftReport check_sync(const SceneProgram& scene, const SynthesisResult& synth);

}  // namespace lectern::sync
