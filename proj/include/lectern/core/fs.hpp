#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace lectern {

// Writes through a sibling temp file and renames it into place, so readers
// never observe a partially written artifact. Parent directories are created.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

// Whole file as bytes; nullopt if it does not exist or cannot be opened.
std::optional<std::string> read_file(const std::filesystem::path& path);

}  // namespace lectern
