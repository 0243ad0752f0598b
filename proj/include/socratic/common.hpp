#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace socratic {

// Error hierarchy shared by the library and the CLI. exit_code() follows the
// CLI contract: 2 = usage/config, 3 = backend, 4 = input data.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 1; }
    virtual const char* kind() const { return "error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
    const char* kind() const override { return "config"; }
};

class BackendError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
    const char* kind() const override { return "backend"; }
};

class InputError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
    const char* kind() const override { return "input"; }
};

// FNV-1a, used everywhere a stable cross-process hash is needed. std::hash is
// not guaranteed stable across runs, so it never touches persisted state.
constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 14695981039346656037ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
    return fnv1a64(tag, seed ^ 0x9E3779B97F4A7C15ULL);
}

// 12-hour clock rendering, "H:MM AM|PM". Hours carry no leading zero; 0:00 is
// "12:00 AM" and 12:00 is "12:00 PM".
std::string clock_12h(std::int64_t t_ms);

// Parses "H:MM AM|PM" back to milliseconds since midnight. Returns -1 when the
// text is not a clock stamp.
std::int64_t parse_clock_12h(std::string_view text);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Entity normalization used for dedup and equilibrium equality: lowercase,
// trim, strip terminal punctuation, collapse internal whitespace.
std::string normalize_entity(std::string_view s);

}  // namespace socratic
