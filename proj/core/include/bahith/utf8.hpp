#pragma once

// Minimal UTF-8 decode/encode helpers. Invalid byte sequences are skipped on
// decode; all processing downstream works on codepoints.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bahith::utf8 {

// A decoded codepoint together with the byte span it occupies in the source.
struct Cp {
    char32_t cp;
    uint32_t begin;  // byte offset of first byte
    uint32_t end;    // byte offset one past last byte
};

std::vector<Cp> decode(std::string_view s);

void append(std::string& out, char32_t cp);

std::string encode(const char32_t* cps, std::size_t n);

std::size_t count(std::string_view s);

}  // namespace bahith::utf8
