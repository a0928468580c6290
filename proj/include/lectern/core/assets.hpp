#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lectern {

// Text assets compiled into the binary from assets/ (prompt templates and
// dialect templates). Names are paths relative to assets/ without extension,
// e.g. "prompts/composer/skeletonize".
std::string_view asset(std::string_view name);
bool has_asset(std::string_view name);
std::vector<std::string> asset_names();

// Replaces every {{key}} with its value; unknown keys are left verbatim.
std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& vars);

}  // namespace lectern
