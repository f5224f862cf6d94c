// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace xling {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// SHA-256 of a file's bytes. Throws IoError when unreadable.
std::string file_sha256(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace xling
