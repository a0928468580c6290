#include "lectern/core/canonical.hpp"

#include <cmath>
#include <cstdio>

#include "lectern/core/errors.hpp"

namespace lectern {

double quantize(double v) {
    double q = std::round(v * 1e6) / 1e6;
    return q + 0.0;
}

std::int64_t to_micro(double v) { return std::llround(v * 1e6); }

double from_micro(std::int64_t micro) { return static_cast<double>(micro) / 1e6 + 0.0; }

std::string format_real(double v) {
    if (!std::isfinite(v)) throw SchemaError("non-finite real cannot be serialized");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

namespace {

void dump_into(const Json& v, std::string& out, int depth) {
    auto indent = [&](int d) { out.append(static_cast<std::size_t>(d) * 2, ' '); };
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            // nlohmann's default object is a std::map, so iteration is sorted.
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                indent(depth + 1);
                out += Json(it.key()).dump(-1, ' ', false, Json::error_handler_t::strict);
                out += ": ";
                dump_into(it.value(), out, depth + 1);
            }
            out += "\n";
            indent(depth);
            out += "}";
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                indent(depth + 1);
                dump_into(v[i], out, depth + 1);
            }
            out += "\n";
            indent(depth);
            out += "]";
            return;
        }
        case Json::value_t::number_float:
            out += format_real(v.get<double>());
            return;
        case Json::value_t::discarded:
            throw SchemaError("discarded value cannot be serialized");
        default:
            out += v.dump(-1, ' ', false, Json::error_handler_t::strict);
            return;
    }
}

}  // namespace

std::string canonical_dump(const Json& value) {
    std::string out;
    dump_into(value, out, 0);
    out += "\n";
    return out;
}

Json canonical_parse(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        // e.byte is 1-based position of the failing byte.
        std::size_t pos = e.byte == 0 ? 0 : e.byte - 1;
        if (pos > text.size()) pos = text.size();
        int line = 1;
        int col = 1;
        for (std::size_t i = 0; i < pos; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(std::string(what) + ": parse error at line " + std::to_string(line) +
                             ", column " + std::to_string(col) + ": " + e.what(),
                         line, col);
    }
}

}  // namespace lectern
