#pragma once

#include <string>
#include <vector>

#include "lectern/core/types.hpp"
#include "lectern/gateway/llm.hpp"

namespace lectern::paginator {

// Text of one section as it appears inside a segment.
std::string section_text(const ManuscriptSection& section);
// Concatenation of every section_text, in order.
std::string manuscript_text(const Manuscript& manuscript);

// Greedy packing of whole sections under `max_words` (body word counts).
std::vector<Segment> segment(const Manuscript& manuscript, int max_words);

// One local agent call. Page indices are 1-based within the segment.
std::vector<PageBlueprint> paginate_segment(const Segment& seg, const Manuscript& manuscript, int density_max,
                                            gateway::LlmClient& llm);

// Checks the structural rules paginate_segment enforces on agent output.
// Throws SchemaError.
void check_segment_pages(const std::vector<PageBlueprint>& pages, const Segment& seg, int density_max);

// Per-section coverage of `pages` over [0, section_count).
std::vector<bool> coverage(const std::vector<PageBlueprint>& pages, int section_count);

// Joins per-segment pages, renumbers 1..n, checks coverage and marks a page
// that repeats the previous segment's last title with " (cont.)".
std::vector<PageBlueprint> aggregate(const std::vector<std::vector<PageBlueprint>>& per_segment, int section_count);

inline constexpr const char* kContinuedSuffix = " (cont.)";

}  // namespace lectern::paginator
