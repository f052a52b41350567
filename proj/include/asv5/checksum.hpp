#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace asv5 {

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);
// Throws Io when the file cannot be read.
std::string Sha256File(const std::filesystem::path &path);

}  // namespace asv5
