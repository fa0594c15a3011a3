#include <algorithm>
#include <cctype>
#include <string>

#include "bahith/corpus.hpp"
#include "bahith/utf8.hpp"

namespace bahith::corpus {

ParseError::ParseError(std::string message, std::size_t byte_offset)
    : std::runtime_error(message + " (byte " + std::to_string(byte_offset) + ")"),
      offset_(byte_offset) {}

namespace {

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

std::string collapse_block(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : s) {
        if (is_ws(c)) {
            if (!out.empty()) pending = true;
            continue;
        }
        if (pending) {
            out.push_back(' ');
            pending = false;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split_blank_lines(std::string_view doc) {
    std::vector<std::string> out;
    std::string block;
    std::size_t pos = 0;
    auto flush = [&] {
        auto collapsed = collapse_block(block);
        if (!collapsed.empty()) out.push_back(std::move(collapsed));
        block.clear();
    };
    while (pos <= doc.size()) {
        std::size_t eol = doc.find('\n', pos);
        std::string_view line =
            doc.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? doc.size() + 1 : eol + 1;
        bool blank = true;
        for (char c : line) {
            if (!is_ws(c)) {
                blank = false;
                break;
            }
        }
        if (blank) {
            flush();
        } else {
            if (!block.empty()) block.push_back(' ');
            block.append(line);
        }
    }
    flush();
    return out;
}

void append_entity(std::string& out, std::string_view name, std::size_t at) {
    if (name == "amp") {
        out.push_back('&');
    } else if (name == "lt") {
        out.push_back('<');
    } else if (name == "gt") {
        out.push_back('>');
    } else if (name == "quot") {
        out.push_back('"');
    } else if (name == "apos") {
        out.push_back('\'');
    } else if (name == "nbsp") {
        out.push_back(' ');
    } else if (!name.empty() && name[0] == '#') {
        char32_t cp = 0;
        bool ok = name.size() > 1;
        if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
            for (std::size_t i = 2; i < name.size() && ok; ++i) {
                char c = name[i];
                cp <<= 4;
                if (c >= '0' && c <= '9')
                    cp |= static_cast<char32_t>(c - '0');
                else if (c >= 'a' && c <= 'f')
                    cp |= static_cast<char32_t>(c - 'a' + 10);
                else if (c >= 'A' && c <= 'F')
                    cp |= static_cast<char32_t>(c - 'A' + 10);
                else
                    ok = false;
            }
        } else {
            for (std::size_t i = 1; i < name.size() && ok; ++i) {
                char c = name[i];
                if (c < '0' || c > '9') {
                    ok = false;
                    break;
                }
                cp = cp * 10 + static_cast<char32_t>(c - '0');
            }
        }
        if (!ok || cp == 0 || cp > 0x10FFFF) {
            throw ParseError("bad numeric character reference '&" + std::string(name) + ";'", at);
        }
        utf8::append(out, cp);
    } else {
        // Unknown named entity: keep it verbatim, some sources use loose HTML.
        out.push_back('&');
        out.append(name);
        out.push_back(';');
    }
}

std::string decode_entities(std::string_view s, std::size_t base) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(s[i++]);  // stray ampersand
            continue;
        }
        append_entity(out, s.substr(i + 1, semi - i - 1), base + i);
        i = semi + 1;
    }
    return out;
}

bool block_tag(std::string_view name) {
    static const char* const kBlocks[] = {"p",  "div", "br",  "li", "ul", "ol",    "h1",
                                          "h2", "h3",  "h4",  "h5", "h6", "table", "tr",
                                          "td", "th",  "blockquote", "section", "article"};
    return std::any_of(std::begin(kBlocks), std::end(kBlocks),
                       [&](const char* b) { return name == b; });
}

std::vector<std::string> extract_html(std::string_view doc) {
    std::vector<std::string> out;
    std::string block;
    auto flush = [&] {
        auto collapsed = collapse_block(decode_entities(block, 0));
        if (!collapsed.empty()) out.push_back(std::move(collapsed));
        block.clear();
    };
    std::size_t i = 0;
    while (i < doc.size()) {
        if (doc[i] != '<') {
            block.push_back(doc[i++]);
            continue;
        }
        if (doc.compare(i, 4, "<!--") == 0) {
            std::size_t end = doc.find("-->", i + 4);
            if (end == std::string_view::npos) throw ParseError("unterminated comment", i);
            i = end + 3;
            continue;
        }
        std::size_t close = doc.find('>', i + 1);
        if (close == std::string_view::npos) throw ParseError("unterminated tag", i);
        std::string_view tag = doc.substr(i + 1, close - i - 1);
        bool closing = !tag.empty() && tag[0] == '/';
        if (closing) tag.remove_prefix(1);
        std::size_t name_end = 0;
        while (name_end < tag.size() && !is_ws(tag[name_end]) && tag[name_end] != '/') ++name_end;
        std::string name(tag.substr(0, name_end));
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (name.empty()) throw ParseError("empty tag name", i);

        if (!closing && (name == "script" || name == "style")) {
            std::string end_tag = "</" + name;
            std::size_t end = i;
            // find the matching close tag, case-insensitively
            std::string lowered(doc.substr(close + 1));
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            std::size_t rel = lowered.find(end_tag);
            if (rel == std::string::npos) {
                throw ParseError("unterminated <" + name + "> element", i);
            }
            end = close + 1 + rel;
            std::size_t end_close = doc.find('>', end);
            if (end_close == std::string_view::npos) throw ParseError("unterminated tag", end);
            i = end_close + 1;
            continue;
        }
        if (block_tag(name)) {
            flush();
        } else {
            // Inline tag: make sure words separated only by markup stay apart.
            block.push_back(' ');
        }
        i = close + 1;
    }
    flush();
    return out;
}

// Reads the main document part of a DOCX (word/document.xml, already
// extracted from the container): every <w:p> is a paragraph, text lives in
// <w:t> elements.
std::vector<std::string> extract_docx_xml(std::string_view doc) {
    std::vector<std::string> out;
    std::string para;
    bool in_para = false;
    std::size_t i = 0;

    auto read_tag = [&](std::size_t at) -> std::pair<std::string, std::size_t> {
        std::size_t close = doc.find('>', at + 1);
        if (close == std::string_view::npos) throw ParseError("unterminated tag", at);
        return {std::string(doc.substr(at + 1, close - at - 1)), close + 1};
    };

    auto flush = [&] {
        auto collapsed = collapse_block(para);
        if (!collapsed.empty()) out.push_back(std::move(collapsed));
        para.clear();
    };

    while (i < doc.size()) {
        std::size_t lt = doc.find('<', i);
        if (lt == std::string_view::npos) break;
        if (doc.compare(lt, 4, "<!--") == 0) {
            std::size_t end = doc.find("-->", lt + 4);
            if (end == std::string_view::npos) throw ParseError("unterminated comment", lt);
            i = end + 3;
            continue;
        }
        if (doc.compare(lt, 2, "<?") == 0) {
            std::size_t end = doc.find("?>", lt + 2);
            if (end == std::string_view::npos) throw ParseError("unterminated declaration", lt);
            i = end + 2;
            continue;
        }
        auto [tag, after] = read_tag(lt);
        std::string_view name(tag);
        bool closing = !name.empty() && name[0] == '/';
        if (closing) name.remove_prefix(1);
        std::size_t name_end = 0;
        while (name_end < name.size() && !is_ws(name[name_end]) && name[name_end] != '/') ++name_end;
        name = name.substr(0, name_end);

        if (name == "w:p") {
            if (closing) {
                flush();
                in_para = false;
            } else {
                in_para = true;
                if (!tag.empty() && tag.back() == '/') in_para = false;  // self-closing
            }
            i = after;
            continue;
        }
        if (name == "w:t" && !closing && (tag.empty() || tag.back() != '/')) {
            std::size_t end = doc.find("</w:t>", after);
            if (end == std::string_view::npos) throw ParseError("unterminated <w:t> element", lt);
            if (in_para) {
                para += decode_entities(doc.substr(after, end - after), after);
            }
            i = end + 6;
            continue;
        }
        if (name == "w:tab" && !closing) para.push_back(' ');
        if (name == "w:br" && !closing) para.push_back(' ');
        i = after;
    }
    flush();
    return out;
}

}  // namespace

std::vector<std::string> extract_paragraphs(std::string_view doc, DocFormat format) {
    switch (format) {
        case DocFormat::Plain:
            return split_blank_lines(doc);
        case DocFormat::Html:
            return extract_html(doc);
        case DocFormat::DocxXml:
            return extract_docx_xml(doc);
    }
    throw std::invalid_argument("unknown document format");
}

}  // namespace bahith::corpus
