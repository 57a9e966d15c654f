#pragma once

#include <string>
#include <string_view>

namespace learnafe::io {

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written artifact. Creates parent directories.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

}  // namespace learnafe::io
