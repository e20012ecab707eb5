#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sabc {

std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Parses a full string as a double; throws ValidationError on junk.
double parse_double(std::string_view text);

}  // namespace sabc
