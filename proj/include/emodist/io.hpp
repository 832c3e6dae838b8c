#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace emodist {

/// Reads a whole file as bytes; throws DataError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes bytes to a file, replacing it; throws DataError on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace emodist
