#pragma once

#include <cstdint>
#include <string>

namespace spikelimits {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a 64-bit, hex-encoded; used to stamp outputs with a config digest.
inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace spikelimits
