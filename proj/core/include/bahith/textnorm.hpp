#pragma once

// Two-tier Arabic text preprocessing.
//
// The light pass (formatting cleanup, citation removal, punctuation removal,
// character normalization, dediacritization) keeps running text for embedding
// and cross-encoder input. The full pass additionally tokenizes, drops
// stopwords and applies a length/content filter, producing the token stream
// the lexical index sees. Non-Arabic text passes through both unharmed.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace bahith::textnorm {

// ---------------------------------------------------------------------------
// Citation rules
// ---------------------------------------------------------------------------

// One bracket rule. `Pair` removes a delimited span (delimiters included)
// when any keyword equals a whitespace token of the span content; `Marker`
// removes a span whose content is only digits (footnote markers).
struct CitationRule {
    enum class Kind { Pair, Marker };
    Kind kind = Kind::Pair;
    char32_t open = U'(';
    char32_t close = U')';
    std::vector<std::string> keywords;  // stored in comparison normal form
};

class CitationRules {
public:
    CitationRules() = default;

    // Parses the rule mini-syntax: one rule per line, `#` comments.
    //   pair <open> <close> <keyword> [<keyword> ...]
    //   marker <open> <close>
    // Throws std::runtime_error on a malformed line (names the line number).
    static CitationRules parse(std::string_view text);
    static CitationRules load(const std::string& path);
    static const CitationRules& defaults();  // shipped rule set

    const std::vector<CitationRule>& rules() const { return rules_; }
    bool empty() const { return rules_.empty(); }

private:
    std::vector<CitationRule> rules_;
};

// ---------------------------------------------------------------------------
// Stopwords
// ---------------------------------------------------------------------------

using StopwordSet = std::unordered_set<std::string>;

// One token per line, `#` comments and blank lines ignored. Entries are
// re-normalized (character normalization + dediacritization) so that list
// entries and emitted tokens compare in the same normal form.
StopwordSet parse_stopwords(std::string_view text, bool ta_marbuta_to_ha = true);
StopwordSet load_stopwords(const std::string& path, bool ta_marbuta_to_ha = true);
const StopwordSet& default_stopwords();  // shipped list

// ---------------------------------------------------------------------------
// Character classes and character-level operations
// ---------------------------------------------------------------------------

bool is_punct(char32_t cp);      // Unicode P* (covers ، ؛ ؟)
bool is_diacritic(char32_t cp);  // harakat U+064B..U+065F, U+0670, honorific
                                 // and Quranic annotation marks
bool is_arabic_letter(char32_t cp);
bool is_digit(char32_t cp);      // ASCII, Arabic-Indic and extended digits

// Removes every codepoint in the diacritic set; all others unchanged, order
// preserved.
std::string dediacritize(std::string_view raw);

// Alef variants to bare alef, alef maqsura to ya, tatweel removed, and
// (by default) ta marbuta to ha.
std::string normalize_chars(std::string_view raw, bool ta_marbuta_to_ha = true);

// ---------------------------------------------------------------------------
// Light / full pipelines
// ---------------------------------------------------------------------------

struct NormConfig {
    bool ta_marbuta_to_ha = true;
    CitationRules citations = CitationRules::defaults();
};

// Light normalization: formatting cleanup, citation removal, punctuation
// removal, character normalization, dediacritization, in that order, then
// whitespace collapsed to single spaces and trimmed. Total function; empty
// input yields empty output.
std::string normalize_light(std::string_view raw, const NormConfig& cfg = {});

// Token of the light text with the byte span of the original it came from.
struct LightToken {
    std::string text;
    uint32_t begin = 0;  // byte offset into the raw input
    uint32_t end = 0;    // one past the last byte
};

struct LightAnalysis {
    std::string light;
    std::vector<LightToken> tokens;
};

// Light normalization that also reports, per whitespace token, the source
// byte span. The chunker uses the spans to cut original text at token
// boundaries.
LightAnalysis analyze_light(std::string_view raw, const NormConfig& cfg = {});

// Length/content filter applied by the full pass: drops tokens shorter than
// two codepoints, purely-digit tokens, and tokens with no Arabic letter or
// alphanumeric content.
bool passes_token_filter(std::string_view token);

// Full normalization: whitespace tokens of the light text with stopwords
// removed and the length/content filter applied; token order preserved.
std::vector<std::string> normalize_full(std::string_view raw, const StopwordSet& stopwords,
                                        const NormConfig& cfg = {});

// ---------------------------------------------------------------------------
// Normalizer: stopwords + config bundled for corpus construction
// ---------------------------------------------------------------------------

class Normalizer {
public:
    Normalizer() : stopwords_(default_stopwords()) {}
    Normalizer(StopwordSet stopwords, NormConfig cfg)
        : stopwords_(std::move(stopwords)), cfg_(std::move(cfg)) {}

    std::string light(std::string_view raw) const { return normalize_light(raw, cfg_); }
    LightAnalysis analyze(std::string_view raw) const { return analyze_light(raw, cfg_); }
    std::vector<std::string> full(std::string_view raw) const {
        return normalize_full(raw, stopwords_, cfg_);
    }

    const NormConfig& config() const { return cfg_; }
    const StopwordSet& stopwords() const { return stopwords_; }

private:
    StopwordSet stopwords_;
    NormConfig cfg_;
};

}  // namespace bahith::textnorm
