#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lectern/core/types.hpp"
#include "lectern/gateway/llm.hpp"

namespace lectern::composer {

inline constexpr double kDurationTolerance = 0.15;
inline constexpr int kMaxRefineIterations = 5;

enum class RefinementKind { trim_section, expand_section, no_op };
std::string to_name(RefinementKind kind);

struct RefinementAction {
    RefinementKind kind = RefinementKind::no_op;
    int section_index = 0;
    std::int64_t delta_words_target = 0;

    bool operator==(const RefinementAction&) const = default;
};

// One LLM call; the response must be a valid skeleton.
Skeleton skeletonize(const LectureOutline& outline, gateway::LlmClient& llm);

// One LLM call per concept, at most `parallelism` in flight. Sections come
// back in skeleton order.
Manuscript expand(const Skeleton& skeleton, const LectureOutline& outline, gateway::LlmClient& llm,
                  int parallelism = 1);

// word_count / wpm * 60.
double estimate_duration(const Manuscript& manuscript, double wpm);
double estimate_duration(std::int64_t words, double wpm);

// Text of the first sentence of `body` (through its terminator).
std::string first_sentence(const std::string& body);

// The action refine would issue next; no_op when within tolerance or when
// the chosen section cannot move any further.
RefinementAction plan_refinement(const Manuscript& manuscript, double target_s, double wpm);

struct RefineResult {
    Manuscript manuscript;
    std::vector<RefinementAction> actions;
    int iterations = 0;
    bool converged = false;
    double final_estimate_s = 0.0;
};

RefineResult refine(const Manuscript& manuscript, double target_s, double wpm, gateway::LlmClient& llm);

}  // namespace lectern::composer
