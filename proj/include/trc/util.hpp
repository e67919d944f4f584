#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trc {

// Error categories map 1:1 onto CLI exit codes and C API status values.
enum class ErrorKind { input = 2, backend = 3, capability = 4, internal = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_input(const std::string& msg) { throw Error(ErrorKind::input, msg); }
[[noreturn]] inline void fail_backend(const std::string& msg) { throw Error(ErrorKind::backend, msg); }
[[noreturn]] inline void fail_capability(const std::string& msg) { throw Error(ErrorKind::capability, msg); }
[[noreturn]] inline void fail_internal(const std::string& msg) { throw Error(ErrorKind::internal, msg); }

// FNV-1a, used for prompt hashes and config hashes.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

std::string lowercase(std::string_view s);

// Collapses any whitespace run to a single space and trims the ends.
std::string normalize_spaces(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

}  // namespace trc
