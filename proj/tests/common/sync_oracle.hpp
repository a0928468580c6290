#pragma once

// Brute-force scheduler used as an independent check of sync::align.

#include <boost/rational.hpp>
#include <algorithm>
#include <climits>
#include <optional>
#include <tuple>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "generators.hpp"
#include "lectern/core/canonical.hpp"
#include "lectern/core/types.hpp"

namespace oracle {

struct Scheduled {
    std::string anchor_id;
    std::int64_t start_micro = 0;
    bool operator==(const Scheduled&) const = default;
};

// Expected (anchor, start) sequence of the non-injected events, in output
// order. Each start is found by walking the unit boundaries from zero.
inline std::vector<Scheduled> schedule(const lectern::SceneProgram& scene, const lectern::NarrationScript& script,
                                       const lectern::SynthesisResult& synth) {
    using Q = boost::rational<long long>;
    std::vector<lectern::AnimationEvent> events;
    for (const auto& e : scene.events)
        if (!(e.verb == lectern::EventVerb::wait && e.anchor_id.rfind("sync-wait-", 0) == 0)) events.push_back(e);

    auto unit_time = [&](const std::string& anchor) -> std::optional<std::int64_t> {
        std::int64_t t = 0;
        for (std::size_t u = 0; u < script.units.size(); ++u) {
            if (script.units[u].anchor_ref == anchor) return t;
            t += lectern::to_micro(synth.per_unit_durations_s[u]);
        }
        return std::nullopt;
    };
    const std::int64_t total = lectern::to_micro(synth.audio.duration_s);

    struct Row {
        std::optional<std::int64_t> ref;
        long long head_key;  // ref time of the governing referenced event
        std::size_t head_index;
        std::size_t index;
        std::string anchor;
    };
    std::vector<Row> rows;
    long long head_key = LLONG_MIN;
    std::size_t head_index = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto ref = unit_time(events[i].anchor_id);
        if (ref) head_key = *ref, head_index = i;
        rows.push_back({ref, head_key, head_index, i, events[i].anchor_id});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.head_key, a.head_index, a.index) < std::tie(b.head_key, b.head_index, b.index);
    });

    const std::size_t n = rows.size();
    std::vector<std::optional<std::int64_t>> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = rows[i].ref;
    if (n && !t[0]) t[0] = 0;
    if (n > 1 && !t[n - 1]) t[n - 1] = total;
    std::vector<Scheduled> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t v;
        if (t[i]) {
            v = *t[i];
        } else {
            std::size_t l = 0, r = n - 1;
            for (std::size_t k = 0; k < i; ++k)
                if (t[k]) l = k;
            for (std::size_t k = n - 1; k > i; --k)
                if (t[k]) r = k;
            const Q exact = Q(*t[l]) + Q(*t[r] - *t[l]) * Q(static_cast<long long>(i - l), static_cast<long long>(r - l));
            v = static_cast<std::int64_t>(exact.numerator() / exact.denominator());
            if (exact < Q(v)) --v;
        }
        out.push_back({rows[i].anchor, v});
    }
    return out;
}

// Random (scene, script, timing) triple. Scripts reference a random subset
// of anchors in random order; durations come from random word counts.
struct Triple {
    lectern::SceneProgram scene;
    lectern::NarrationScript script;
    lectern::SynthesisResult synth;
};

inline Triple random_triple(gen::Rng& rng) {
    using namespace lectern;
    Triple x;
    x.scene.page_index = 1;
    const int elements = gen::uniform_int(rng, 1, 5);
    for (int i = 0; i < elements; ++i)
        x.scene.elements.push_back({"e" + std::to_string(i), ElementKind::text, "c", gen::bbox(rng), {}, {}});
    const int events = gen::uniform_int(rng, 0, 9);
    for (int k = 0; k < events; ++k) {
        AnimationEvent ev;
        ev.anchor_id = "k" + std::to_string(k);
        ev.verb = gen::uniform_int(rng, 0, 5) == 0 ? EventVerb::wait : EventVerb::appear;
        if (ev.verb != EventVerb::wait) ev.target_ids = {"e" + std::to_string(gen::uniform_int(rng, 0, elements - 1))};
        ev.duration_s = gen::micro_real(rng, 0.0, 4.0);
        x.scene.events.push_back(ev);
    }
    const int units = gen::uniform_int(rng, 0, 8);
    std::int64_t total = 0;
    for (int u = 0; u < units; ++u) {
        NarrationUnit unit{"u" + std::to_string(u), "words here", std::nullopt};
        if (events && gen::uniform_int(rng, 0, 2) > 0)
            unit.anchor_ref = "k" + std::to_string(gen::uniform_int(rng, 0, events - 1));
        x.script.units.push_back(unit);
        const double d = gen::micro_real(rng, 0.0, 6.0);
        x.synth.per_unit_durations_s.push_back(d);
        total += to_micro(d);
    }
    x.synth.audio.duration_s = from_micro(total);
    x.synth.audio.speaking_rate = 2.0;
    return x;
}

}  // namespace oracle
