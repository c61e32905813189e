#pragma once
// Bit-exact externalization of edges: the "Relevant Knowledge:" evidence
// block, prompt composition, and the inverse parser. The serialized bytes
// are a normative external interface; do not change them casually.

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphmem/model.hpp"

namespace graphmem {

inline constexpr std::string_view kEvidenceHeader = "Relevant Knowledge:";
inline constexpr std::string_view kEmptyEvidence = "[none]";

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Serialized evidence block. Header line, then one "[h|r|t]" line per edge,
// or the single line "[none]".
struct EvidenceText {
    std::string text;
};

// Reserved characters | [ ] \ and newline are escaped as \| \[ \] \\ \n.
inline std::string escape_field(std::string_view field) {
    std::string out;
    out.reserve(field.size());
    for (char c : field) {
        switch (c) {
            case '|': out += "\\|"; break;
            case '[': out += "\\["; break;
            case ']': out += "\\]"; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string serialize_triple_line(const Triple& t) {
    std::string line = "[";
    line += escape_field(t.head);
    line += '|';
    line += escape_field(t.relation);
    line += '|';
    line += escape_field(t.tail);
    line += ']';
    return line;
}

inline EvidenceText serialize_triples(std::span<const Triple> triples) {
    std::string out(kEvidenceHeader);
    if (triples.empty()) {
        out += '\n';
        out += kEmptyEvidence;
        return EvidenceText{std::move(out)};
    }
    for (const Triple& t : triples) {
        out += '\n';
        out += serialize_triple_line(t);
    }
    return EvidenceText{std::move(out)};
}

inline EvidenceText serialize(std::span<const Edge> edges) {
    std::vector<Triple> triples;
    triples.reserve(edges.size());
    for (const Edge& e : edges) triples.push_back(e.triple);
    return serialize_triples(triples);
}

// Prompt composition: evidence ++ question ++ answer cue, exact bytes.
inline std::string compose_prompt(const EvidenceText& evidence, std::string_view q) {
    std::string out = evidence.text;
    out += "\n\nQuestion: ";
    out += q;
    out += "\nAnswer:";
    return out;
}

struct ParsedEvidence {
    std::vector<Triple> triples;
    std::vector<std::string> warnings;
};

namespace detail {

// Parses one "[h|r|t]" line. Returns false (with a reason) for malformed
// lines: bad delimiters, wrong arity, or an invalid escape.
inline bool parse_triple_line(std::string_view line, Triple& out, std::string& reason) {
    if (line.size() < 2 || line.front() != '[' || line.back() != ']') {
        reason = "not bracket-delimited";
        return false;
    }
    std::string_view body = line.substr(1, line.size() - 2);
    std::vector<std::string> fields(1);
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '\\') {
            if (i + 1 >= body.size()) {
                reason = "dangling escape";
                return false;
            }
            char e = body[++i];
            switch (e) {
                case '|': fields.back() += '|'; break;
                case '[': fields.back() += '['; break;
                case ']': fields.back() += ']'; break;
                case '\\': fields.back() += '\\'; break;
                case 'n': fields.back() += '\n'; break;
                default: reason = "invalid escape"; return false;
            }
        } else if (c == '|') {
            fields.emplace_back();
        } else if (c == '[' || c == ']') {
            reason = "unescaped bracket";
            return false;
        } else {
            fields.back() += c;
        }
    }
    if (fields.size() != 3) {
        reason = "expected 3 fields, got " + std::to_string(fields.size());
        return false;
    }
    out = Triple{std::move(fields[0]), std::move(fields[1]), std::move(fields[2])};
    return true;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

}  // namespace detail

// Lenient line parser shared with the remote extractor: no header required,
// malformed lines are skipped with a diagnostic.
inline ParsedEvidence parse_triple_lines(std::string_view text) {
    ParsedEvidence out;
    int lineno = 0;
    for (std::string_view line : detail::split_lines(text)) {
        ++lineno;
        if (line.empty()) continue;
        if (line == kEmptyEvidence) continue;
        Triple t;
        std::string reason;
        if (detail::parse_triple_line(line, t, reason)) {
            out.triples.push_back(std::move(t));
        } else {
            out.warnings.push_back("line " + std::to_string(lineno) + ": " + reason);
        }
    }
    return out;
}

// Strict inverse of serialize: requires the evidence header.
inline ParsedEvidence parse(std::string_view text) {
    auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0] != kEvidenceHeader) {
        throw parse_error("missing evidence header");
    }
    std::string_view body = text.substr(kEvidenceHeader.size());
    if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
    return parse_triple_lines(body);
}

}  // namespace graphmem
