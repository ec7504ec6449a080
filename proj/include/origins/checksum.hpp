#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace origins {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Whole-file helpers; both throw IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace origins
