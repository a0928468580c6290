#pragma once

// Canonical text format: JSON with lexicographically sorted keys, two-space
// indentation, integers verbatim and every real written with exactly six
// fractional digits. Byte equality of two documents implies structural
// equality of the values they encode.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace lectern {

using Json = nlohmann::json;

inline constexpr double kQuantum = 1e-6;

// Rounds to the canonical resolution. -0 is normalized to +0.
double quantize(double v);

// Real value in canonical micro-units (exact for quantized inputs).
std::int64_t to_micro(double v);
double from_micro(std::int64_t micro);

// "%.6f" with the sign of zero dropped.
std::string format_real(double v);

std::string canonical_dump(const Json& value);

// Parses canonical (or any JSON) text. Syntax errors throw ParseError with
// 1-based line/column. `what` names the document in messages.
Json canonical_parse(std::string_view text, std::string_view what = "document");

}  // namespace lectern
