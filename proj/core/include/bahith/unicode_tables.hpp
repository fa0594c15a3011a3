#pragma once

#include <cstddef>

namespace bahith::textnorm {

struct CpRange {
    char32_t lo;
    char32_t hi;
};

// Category range tables generated from UnicodeData (see unicode_tables.cpp).
extern const CpRange kPunctRanges[];   // general category P*
extern const std::size_t kPunctRanges_len;
extern const CpRange kSpaceRanges[];   // general category Zs
extern const std::size_t kSpaceRanges_len;
extern const CpRange kFormatRanges[];  // general category Cf
extern const std::size_t kFormatRanges_len;
extern const CpRange kSymbolRanges[];  // general category S*
extern const std::size_t kSymbolRanges_len;

bool in_ranges(char32_t cp, const CpRange* ranges, std::size_t n);

}  // namespace bahith::textnorm
