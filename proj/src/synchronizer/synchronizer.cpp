#include "lectern/synchronizer/synchronizer.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"

namespace lectern::sync {

namespace {

bool is_injected_wait(const AnimationEvent& ev) {
    return ev.verb == EventVerb::wait && ev.anchor_id.rfind(kWaitPrefix, 0) == 0;
}

std::int64_t floor_div(__int128 a, __int128 b) {
    __int128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return static_cast<std::int64_t>(q);
}

}  // namespace

AlignResult align(const SceneProgram& scene, const NarrationScript& script, const SynthesisResult& synth,
                  const codegen::DialectSpec& dialect) {
    if (synth.per_unit_durations_s.size() != script.units.size())
        throw SyncError("synthesis has " + std::to_string(synth.per_unit_durations_s.size()) +
                        " unit durations for " + std::to_string(script.units.size()) + " units");

    std::vector<AnimationEvent> events;
    for (const auto& ev : scene.events)
        if (!is_injected_wait(ev)) events.push_back(ev);

    std::vector<std::int64_t> unit_start(script.units.size());
    std::int64_t cursor = 0;
    for (std::size_t u = 0; u < script.units.size(); ++u) {
        unit_start[u] = cursor;
        cursor += to_micro(synth.per_unit_durations_s[u]);
    }
    const std::int64_t total = to_micro(synth.audio.duration_s);

    std::map<std::string, std::int64_t> ref_time;
    for (std::size_t u = 0; u < script.units.size(); ++u) {
        const auto& ref = script.units[u].anchor_ref;
        if (!ref) continue;
        const bool known = std::any_of(events.begin(), events.end(),
                                       [&](const AnimationEvent& e) { return e.anchor_id == *ref; });
        if (!known) throw SyncError("unit '" + script.units[u].unit_id + "' references unknown anchor '" + *ref + "'");
        ref_time.emplace(*ref, unit_start[u]);
    }

    AlignResult result;
    if (ref_time.empty() && !events.empty())
        result.warnings.push_back("no narration unit references an anchor; events spread uniformly");

    // Blocks: a referenced event plus the unreferenced events after it.
    struct Block {
        std::int64_t key;
        std::vector<AnimationEvent> events;
    };
    std::vector<Block> blocks;
    for (auto& ev : events) {
        auto it = ref_time.find(ev.anchor_id);
        if (it != ref_time.end() || blocks.empty())
            blocks.push_back({it != ref_time.end() ? it->second : INT64_MIN, {}});
        blocks.back().events.push_back(std::move(ev));
    }
    std::stable_sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) { return a.key < b.key; });
    std::vector<AnimationEvent> order;
    for (auto& b : blocks)
        for (auto& ev : b.events) order.push_back(std::move(ev));

    const std::size_t n = order.size();
    std::vector<std::optional<std::int64_t>> start(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = ref_time.find(order[i].anchor_id);
        if (it != ref_time.end()) start[i] = it->second;
    }
    if (n > 0 && !start[0]) start[0] = 0;
    if (n > 1 && !start[n - 1]) start[n - 1] = total;
    const auto fixed = start;
    for (std::size_t i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        std::size_t l = i, r = i;
        while (!fixed[l]) --l;
        while (!fixed[r]) ++r;
        const __int128 span = static_cast<__int128>(*fixed[r]) - *fixed[l];
        start[i] = *fixed[l] + floor_div(span * static_cast<__int128>(i - l), static_cast<__int128>(r - l));
    }

    std::set<std::string> taken;
    for (const auto& ev : order) taken.insert(ev.anchor_id);
    int wait_no = 0;
    auto wait_event = [&](std::int64_t at, std::int64_t length) {
        std::string id;
        do id = kWaitPrefix + std::to_string(++wait_no);
        while (taken.count(id));
        return AnimationEvent{id, EventVerb::wait, {}, from_micro(length), from_micro(at)};
    };

    std::vector<AnimationEvent> out;
    std::int64_t clock = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t t = *start[i];
        const std::int64_t next = i + 1 < n ? *start[i + 1] : total;
        if (t > clock) out.push_back(wait_event(clock, t - clock));
        AnimationEvent ev = std::move(order[i]);
        const std::int64_t d = std::clamp<std::int64_t>(to_micro(ev.duration_s), 0, std::max<std::int64_t>(0, next - t));
        ev.start_s = from_micro(t);
        ev.duration_s = from_micro(d);
        clock = std::max(clock, t + d);
        out.push_back(std::move(ev));
    }
    if (clock < total) out.push_back(wait_event(clock, total - clock));

    result.scene = scene;
    result.scene.events = std::move(out);
    if (result.scene.stage < SceneStage::synced) result.scene.stage = SceneStage::synced;
    result.scene.source_text = codegen::emit(result.scene, dialect);
    return result;
}

bool DriftReport::empty() const {
    if (to_micro(drift_s) > to_micro(kDriftTolerance)) return false;
    return std::all_of(overruns.begin(), overruns.end(),
                       [](const Overrun& o) { return to_micro(o.excess_s) <= to_micro(kDriftTolerance); });
}

DriftReport check_sync(const SceneProgram& scene, const SynthesisResult& synth) {
    DriftReport r;
    const std::int64_t total = to_micro(synth.audio.duration_s);
    std::int64_t last_end = 0;
    for (const auto& ev : scene.events) {
        if (!ev.start_s) throw SyncError("event '" + ev.anchor_id + "' has no start time");
        const std::int64_t s = to_micro(*ev.start_s);
        last_end = std::max(last_end, s + to_micro(ev.duration_s));
        if (s > total) r.overruns.push_back({ev.anchor_id, from_micro(s), from_micro(s - total)});
    }
    r.audio_s = from_micro(total);
    r.last_end_s = from_micro(last_end);
    r.drift_s = from_micro(last_end > total ? last_end - total : total - last_end);
    return r;
}

}  // namespace lectern::sync
