#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ibias {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// Reads a whole file. Throws MissingInputError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace ibias
