#pragma once
// Engine tokenizer: deterministic word-plus-punctuation tokenization.
//
// A token is either a maximal run of [A-Za-z0-9_] or a single other
// non-whitespace character. Byte offsets are tracked so chunk text can be
// sliced out of the original document without re-synthesizing whitespace.
// All token budgets in the engine (chunk lengths, field caps) are measured
// with this tokenizer; it is locale-independent on purpose.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace graphmem {

struct TokenSpan {
    std::size_t begin = 0;  // byte offset, inclusive
    std::size_t end = 0;    // byte offset, exclusive
};

inline bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
}

inline bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (is_space_char(c)) {
            ++i;
            continue;
        }
        if (is_word_char(c)) {
            std::size_t j = i + 1;
            while (j < n && is_word_char(text[j])) ++j;
            spans.push_back({i, j});
            i = j;
        } else {
            // every other byte stands alone (punctuation, UTF-8 lead/cont bytes)
            spans.push_back({i, i + 1});
            ++i;
        }
    }
    return spans;
}

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (const TokenSpan& s : tokenize_spans(text)) {
        out.emplace_back(text.substr(s.begin, s.end - s.begin));
    }
    return out;
}

inline std::size_t token_count(std::string_view text) {
    std::size_t count = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (is_space_char(c)) {
            ++i;
        } else if (is_word_char(c)) {
            ++count;
            ++i;
            while (i < n && is_word_char(text[i])) ++i;
        } else {
            ++count;
            ++i;
        }
    }
    return count;
}

// Inverse-ish of tokenize: joins tokens with single spaces. The pair
// satisfies tokenize(detokenize(toks)) == toks whenever toks came from
// tokenize (each token is itself a single token and contains no space).
inline std::string detokenize(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace graphmem
