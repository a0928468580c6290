#include "lectern/core/assets.hpp"

#include <algorithm>
#include <map>

#include "lectern/core/errors.hpp"

namespace lectern {

// Defined in the generated assets_data.cpp.
const std::map<std::string_view, std::string_view>& embedded_assets();

std::string_view asset(std::string_view name) {
    const auto& all = embedded_assets();
    auto it = all.find(name);
    if (it == all.end()) throw Error("AssetError", "unknown asset '" + std::string(name) + "'");
    return it->second;
}

bool has_asset(std::string_view name) { return embedded_assets().count(name) > 0; }

std::vector<std::string> asset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : embedded_assets()) out.emplace_back(k);
    return out;
}

std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const auto open = tmpl.find("{{", i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        const std::string_view key = tmpl.substr(open + 2, close - open - 2);
        auto it = std::find_if(vars.begin(), vars.end(), [&](const auto& kv) { return kv.first == key; });
        if (it != vars.end())
            out += it->second;
        else
            out.append(tmpl.substr(open, close + 2 - open));
        i = close + 2;
    }
    return out;
}

}  // namespace lectern
