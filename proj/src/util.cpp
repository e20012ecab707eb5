#include "sabc/util.hpp"

#include "sabc/error.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace sabc {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf.data(), 16);
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw ValidationError("format_double: conversion failed");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [end, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || end != last) {
        throw ValidationError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace sabc
