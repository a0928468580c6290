#pragma once

#include <cstdint>
#include <string_view>

namespace lectern {

// Shared word-counting rule used for durations, speaking rates and segment
// budgets. Whitespace-delimited tokens count once unless they consist only of
// punctuation; every Han character counts as its own word, and any non-Han
// run inside a token that carries a letter or digit counts once more.
std::int64_t count_words(std::string_view text);

// True for CJK unified ideographs (and extensions / compatibility block).
bool is_han(char32_t cp);

}  // namespace lectern
