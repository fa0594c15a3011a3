#include "bahith/textnorm.hpp"

#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "bahith/unicode_tables.hpp"
#include "bahith/utf8.hpp"
#include "default_resources.hpp"

namespace bahith::textnorm {

namespace {

// Arabic codepoints handled by character normalization.
constexpr char32_t kAlef = 0x0627;
constexpr char32_t kAlefMadda = 0x0622;
constexpr char32_t kAlefHamzaAbove = 0x0623;
constexpr char32_t kAlefHamzaBelow = 0x0625;
constexpr char32_t kAlefWasla = 0x0671;
constexpr char32_t kAlefMaqsura = 0x0649;
constexpr char32_t kYa = 0x064A;
constexpr char32_t kTatweel = 0x0640;
constexpr char32_t kTaMarbuta = 0x0629;
constexpr char32_t kHa = 0x0647;

// A codepoint tagged with the byte span it came from in the raw input.
struct TaggedCp {
    char32_t cp;
    uint32_t begin;
    uint32_t end;
};

std::vector<TaggedCp> decode_tagged(std::string_view raw) {
    std::vector<TaggedCp> out;
    auto cps = utf8::decode(raw);
    out.reserve(cps.size());
    for (const auto& c : cps) out.push_back({c.cp, c.begin, c.end});
    return out;
}

bool is_space_sep(char32_t cp) {
    return in_ranges(cp, kSpaceRanges, kSpaceRanges_len);
}

bool is_format_char(char32_t cp) {
    return in_ranges(cp, kFormatRanges, kFormatRanges_len);
}

bool is_symbol(char32_t cp) {
    return in_ranges(cp, kSymbolRanges, kSymbolRanges_len);
}

bool is_control(char32_t cp) {
    return cp < 0x20 || (cp >= 0x7F && cp <= 0x9F);
}

// Step 1: map every whitespace flavor to a plain space, drop control and
// zero-width/format characters.
void apply_formatting(std::vector<TaggedCp>& v) {
    std::vector<TaggedCp> out;
    out.reserve(v.size());
    for (const auto& t : v) {
        if (t.cp == U'\t' || t.cp == U'\n' || t.cp == U'\r' || is_space_sep(t.cp)) {
            out.push_back({U' ', t.begin, t.end});
        } else if (is_control(t.cp) || is_format_char(t.cp)) {
            continue;
        } else {
            out.push_back(t);
        }
    }
    v = std::move(out);
}

// Comparison normal form for citation keywords and span content.
std::string match_form(std::string_view s) {
    return dediacritize(normalize_chars(s, /*ta_marbuta_to_ha=*/true));
}

std::vector<std::string> whitespace_split(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\n' && s[i] != '\r') ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

bool marker_content(const std::vector<TaggedCp>& v, std::size_t from, std::size_t to) {
    // Content is a footnote marker when it holds at least one digit and
    // nothing but digits and spaces.
    bool saw_digit = false;
    for (std::size_t i = from; i < to; ++i) {
        if (v[i].cp == U' ') continue;
        if (!is_digit(v[i].cp)) return false;
        saw_digit = true;
    }
    return saw_digit;
}

bool pair_content_matches(const std::vector<TaggedCp>& v, std::size_t from, std::size_t to,
                          const std::vector<std::string>& keywords) {
    std::string content;
    for (std::size_t i = from; i < to; ++i) utf8::append(content, v[i].cp);
    const std::string normalized = match_form(content);
    for (const auto& tok : whitespace_split(normalized)) {
        for (const auto& kw : keywords) {
            if (tok == kw) return true;
        }
    }
    return false;
}

// Step 2: remove bracketed citation spans per the rule set. For each rule the
// scan pairs an opening delimiter with the nearest following closing one.
void apply_citations(std::vector<TaggedCp>& v, const CitationRules& rules) {
    for (const auto& rule : rules.rules()) {
        std::size_t i = 0;
        while (i < v.size()) {
            if (v[i].cp != rule.open) {
                ++i;
                continue;
            }
            std::size_t j = i + 1;
            while (j < v.size() && v[j].cp != rule.close) ++j;
            if (j >= v.size()) break;  // unmatched open; later opens have no close either
            const bool remove = rule.kind == CitationRule::Kind::Marker
                                    ? marker_content(v, i + 1, j)
                                    : pair_content_matches(v, i + 1, j, rule.keywords);
            if (remove) {
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(i),
                        v.begin() + static_cast<std::ptrdiff_t>(j + 1));
            } else {
                ++i;
            }
        }
    }
}

// Step 3: punctuation becomes a space so adjacent words never fuse.
void apply_punct(std::vector<TaggedCp>& v) {
    for (auto& t : v) {
        if (is_punct(t.cp)) t.cp = U' ';
    }
}

// Step 4: character normalization.
void apply_charnorm(std::vector<TaggedCp>& v, bool ta_marbuta_to_ha) {
    std::vector<TaggedCp> out;
    out.reserve(v.size());
    for (auto t : v) {
        switch (t.cp) {
            case kAlefMadda:
            case kAlefHamzaAbove:
            case kAlefHamzaBelow:
            case kAlefWasla:
                t.cp = kAlef;
                break;
            case kAlefMaqsura:
                t.cp = kYa;
                break;
            case kTatweel:
                continue;
            case kTaMarbuta:
                if (ta_marbuta_to_ha) t.cp = kHa;
                break;
            default:
                break;
        }
        out.push_back(t);
    }
    v = std::move(out);
}

// Step 5: drop diacritics.
void apply_dediac(std::vector<TaggedCp>& v) {
    std::vector<TaggedCp> out;
    out.reserve(v.size());
    for (const auto& t : v) {
        if (!is_diacritic(t.cp)) out.push_back(t);
    }
    v = std::move(out);
}

// Step 6: collapse whitespace runs to one space and trim both ends.
void collapse_ws(std::vector<TaggedCp>& v) {
    std::vector<TaggedCp> out;
    out.reserve(v.size());
    bool pending_space = false;
    for (const auto& t : v) {
        if (t.cp == U' ') {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back({U' ', t.begin, t.begin});
            pending_space = false;
        }
        out.push_back(t);
    }
    v = std::move(out);
}

std::vector<TaggedCp> light_pipeline(std::string_view raw, const NormConfig& cfg) {
    auto v = decode_tagged(raw);
    apply_formatting(v);
    apply_citations(v, cfg.citations);
    apply_punct(v);
    apply_charnorm(v, cfg.ta_marbuta_to_ha);
    apply_dediac(v);
    collapse_ws(v);
    return v;
}

std::string to_string(const std::vector<TaggedCp>& v) {
    std::string out;
    out.reserve(v.size() * 2);
    for (const auto& t : v) utf8::append(out, t.cp);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Character classes
// ---------------------------------------------------------------------------

bool is_punct(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x23) || (cp >= 0x25 && cp <= 0x2A) ||
               (cp >= 0x2C && cp <= 0x2F) || cp == 0x3A || cp == 0x3B || cp == 0x3F ||
               cp == 0x40 || (cp >= 0x5B && cp <= 0x5D) || cp == 0x5F || cp == 0x7B ||
               cp == 0x7D;
    }
    return in_ranges(cp, kPunctRanges, kPunctRanges_len);
}

bool is_diacritic(char32_t cp) {
    return (cp >= 0x0610 && cp <= 0x061A) ||  // honorific signs
           (cp >= 0x064B && cp <= 0x065F) ||  // harakat, tanwin, sukun, shadda
           cp == 0x0670 ||                    // superscript alef
           (cp >= 0x06D6 && cp <= 0x06ED);    // Quranic annotation marks
}

bool is_arabic_letter(char32_t cp) {
    return (cp >= 0x0621 && cp <= 0x064A) || (cp >= 0x066E && cp <= 0x06D3) || cp == 0x06D5 ||
           (cp >= 0x06EE && cp <= 0x06EF) || (cp >= 0x06FA && cp <= 0x06FF) ||
           (cp >= 0x0750 && cp <= 0x077F) || (cp >= 0xFB50 && cp <= 0xFDC7) ||
           (cp >= 0xFE70 && cp <= 0xFEFC);
}

bool is_digit(char32_t cp) {
    return (cp >= U'0' && cp <= U'9') || (cp >= 0x0660 && cp <= 0x0669) ||
           (cp >= 0x06F0 && cp <= 0x06F9);
}

// ---------------------------------------------------------------------------
// Character-level operations
// ---------------------------------------------------------------------------

std::string dediacritize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (const auto& c : utf8::decode(raw)) {
        if (!is_diacritic(c.cp)) utf8::append(out, c.cp);
    }
    return out;
}

std::string normalize_chars(std::string_view raw, bool ta_marbuta_to_ha) {
    std::string out;
    out.reserve(raw.size());
    for (const auto& c : utf8::decode(raw)) {
        char32_t cp = c.cp;
        switch (cp) {
            case kAlefMadda:
            case kAlefHamzaAbove:
            case kAlefHamzaBelow:
            case kAlefWasla:
                cp = kAlef;
                break;
            case kAlefMaqsura:
                cp = kYa;
                break;
            case kTatweel:
                continue;
            case kTaMarbuta:
                if (ta_marbuta_to_ha) cp = kHa;
                break;
            default:
                break;
        }
        utf8::append(out, cp);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Citation rules
// ---------------------------------------------------------------------------

CitationRules CitationRules::parse(std::string_view text) {
    CitationRules out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        auto fields = whitespace_split(line);
        if (fields.empty() || fields[0][0] == '#') continue;

        auto delimiter = [&](const std::string& f) -> char32_t {
            auto cps = utf8::decode(f);
            if (cps.size() != 1) {
                throw std::runtime_error("citation rules line " + std::to_string(line_no) +
                                         ": delimiter must be a single character: '" + f + "'");
            }
            return cps[0].cp;
        };

        CitationRule rule;
        if (fields[0] == "pair") {
            if (fields.size() < 4) {
                throw std::runtime_error("citation rules line " + std::to_string(line_no) +
                                         ": pair needs <open> <close> and at least one keyword");
            }
            rule.kind = CitationRule::Kind::Pair;
            rule.open = delimiter(fields[1]);
            rule.close = delimiter(fields[2]);
            for (std::size_t i = 3; i < fields.size(); ++i) {
                rule.keywords.push_back(match_form(fields[i]));
            }
        } else if (fields[0] == "marker") {
            if (fields.size() != 3) {
                throw std::runtime_error("citation rules line " + std::to_string(line_no) +
                                         ": marker needs exactly <open> <close>");
            }
            rule.kind = CitationRule::Kind::Marker;
            rule.open = delimiter(fields[1]);
            rule.close = delimiter(fields[2]);
        } else {
            throw std::runtime_error("citation rules line " + std::to_string(line_no) +
                                     ": unknown rule kind '" + fields[0] + "'");
        }
        out.rules_.push_back(std::move(rule));
    }
    return out;
}

CitationRules CitationRules::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open citation rules file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const CitationRules& CitationRules::defaults() {
    static const CitationRules rules = parse(detail::kDefaultCitationRulesText);
    return rules;
}

// ---------------------------------------------------------------------------
// Stopwords
// ---------------------------------------------------------------------------

StopwordSet parse_stopwords(std::string_view text, bool ta_marbuta_to_ha) {
    StopwordSet out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        auto fields = whitespace_split(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        for (const auto& f : fields) {
            std::string normalized = dediacritize(normalize_chars(f, ta_marbuta_to_ha));
            if (!normalized.empty()) out.insert(std::move(normalized));
        }
    }
    return out;
}

StopwordSet load_stopwords(const std::string& path, bool ta_marbuta_to_ha) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open stopword file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_stopwords(ss.str(), ta_marbuta_to_ha);
}

const StopwordSet& default_stopwords() {
    static const StopwordSet words = parse_stopwords(detail::kDefaultStopwordsText);
    return words;
}

// ---------------------------------------------------------------------------
// Light / full pipelines
// ---------------------------------------------------------------------------

std::string normalize_light(std::string_view raw, const NormConfig& cfg) {
    return to_string(light_pipeline(raw, cfg));
}

LightAnalysis analyze_light(std::string_view raw, const NormConfig& cfg) {
    auto v = light_pipeline(raw, cfg);
    LightAnalysis out;
    out.light = to_string(v);
    std::size_t i = 0;
    while (i < v.size()) {
        if (v[i].cp == U' ') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < v.size() && v[j].cp != U' ') ++j;
        LightToken tok;
        for (std::size_t k = i; k < j; ++k) utf8::append(tok.text, v[k].cp);
        tok.begin = v[i].begin;
        tok.end = v[j - 1].end;
        out.tokens.push_back(std::move(tok));
        i = j;
    }
    return out;
}

bool passes_token_filter(std::string_view token) {
    const auto cps = utf8::decode(token);
    if (cps.size() < 2) return false;
    bool all_digits = true;
    bool has_word_char = false;
    for (const auto& c : cps) {
        if (!is_digit(c.cp)) all_digits = false;
        if (is_arabic_letter(c.cp) || is_digit(c.cp) ||
            (c.cp < 0x80 && ((c.cp >= U'a' && c.cp <= U'z') || (c.cp >= U'A' && c.cp <= U'Z'))) ||
            (c.cp >= 0x80 && !is_punct(c.cp) && !is_symbol(c.cp) && !is_space_sep(c.cp) &&
             !is_format_char(c.cp) && !is_diacritic(c.cp))) {
            has_word_char = true;
        }
    }
    return !all_digits && has_word_char;
}

std::vector<std::string> normalize_full(std::string_view raw, const StopwordSet& stopwords,
                                        const NormConfig& cfg) {
    auto analysis = analyze_light(raw, cfg);
    std::vector<std::string> out;
    out.reserve(analysis.tokens.size());
    for (auto& tok : analysis.tokens) {
        if (!passes_token_filter(tok.text)) continue;
        if (stopwords.count(tok.text) > 0) continue;
        out.push_back(std::move(tok.text));
    }
    return out;
}

}  // namespace bahith::textnorm
