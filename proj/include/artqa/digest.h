/// @file digest.h
#pragma once

#include <string>
#include <string_view>

namespace artqa {

/// Lowercase hex SHA-256 of `bytes` (64 characters).
std::string sha256_hex(std::string_view bytes);

}  // namespace artqa
