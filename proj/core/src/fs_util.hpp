#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bw {

std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace bw
