#pragma once

// Shipped resource texts embedded at configure time from resources/ so the
// engine runs without a data directory. File-based overrides use the same
// formats.

namespace bahith::detail {

extern const char* const kDefaultStopwordsText;
extern const char* const kDefaultCitationRulesText;
extern const char* const kDefaultPromptTemplateText;

}  // namespace bahith::detail
