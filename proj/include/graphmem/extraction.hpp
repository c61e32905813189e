#pragma once
// Per-chunk candidate triple extraction. The Extractor interface is
// pluggable: RuleExtractor is the deterministic desk-scale implementation
// (exact inverse of the synthetic generator); the remote LLM-backed
// extractor lives in remote.hpp.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphmem/chunker.hpp"
#include "graphmem/model.hpp"
#include "graphmem/tokenizer.hpp"

namespace graphmem {

// Candidate order is the extractor's confidence order. Capping happens in
// the builder, not here.
class Extractor {
public:
    virtual ~Extractor() = default;
    virtual std::vector<Triple> extract(const Chunk& chunk) = 0;
};

// Closed set of relation surface templates "<head> <phrase> <tail>.".
// Phrases must not be prefixes of one another so matches are unambiguous.
struct RuleGrammar {
    struct Rule {
        std::vector<std::string> phrase;  // surface tokens, e.g. {"works", "at"}
        std::string relation;             // canonical relation name, e.g. "works_at"
    };
    std::vector<Rule> rules;

    bool valid() const {
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (rules[i].phrase.empty() || rules[i].relation.empty()) return false;
            for (std::size_t j = 0; j < rules.size(); ++j) {
                if (i == j) continue;
                const auto& a = rules[i].phrase;
                const auto& b = rules[j].phrase;
                if (a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin())) {
                    return false;  // a is a prefix of b
                }
            }
        }
        return !rules.empty();
    }
};

inline RuleGrammar default_grammar() {
    return RuleGrammar{{
        {{"works", "at"}, "works_at"},
        {{"lives", "in"}, "lives_in"},
        {{"reports", "to"}, "reports_to"},
        {{"located", "in"}, "located_in"},
        {{"founded", "by"}, "founded_by"},
        {{"married", "to"}, "married_to"},
        {{"supplies"}, "supplies"},
        {{"owns"}, "owns"},
        {{"leads"}, "leads"},
        {{"born", "in"}, "born_in"},
    }};
}

namespace detail {

inline bool phrase_at(const std::vector<std::string>& toks, std::size_t pos,
                      const std::vector<std::string>& phrase) {
    if (pos + phrase.size() > toks.size()) return false;
    for (std::size_t i = 0; i < phrase.size(); ++i) {
        if (toks[pos + i] != phrase[i]) return false;
    }
    return true;
}

}  // namespace detail

// Extracts every sentence matching a grammar template, in document order.
// A sentence is a '.'-terminated token run; the leftmost phrase occurrence
// with at least one head token before and one tail token after wins, one
// triple per sentence. Non-matching sentences are ignored.
inline std::vector<Triple> rule_extract(const Chunk& chunk, const RuleGrammar& grammar) {
    if (!grammar.valid()) throw std::invalid_argument("invalid rule grammar");
    std::vector<Triple> out;
    const auto toks = tokenize(chunk.text);
    std::size_t sent_begin = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i] != ".") continue;
        // sentence tokens are [sent_begin, i)
        const std::size_t len = i - sent_begin;
        for (std::size_t pos = sent_begin + 1; pos + 1 < sent_begin + len; ++pos) {
            const RuleGrammar::Rule* hit = nullptr;
            for (const auto& rule : grammar.rules) {
                if (pos + rule.phrase.size() < sent_begin + len &&
                    detail::phrase_at(toks, pos, rule.phrase)) {
                    hit = &rule;
                    break;
                }
            }
            if (!hit) continue;
            std::vector<std::string> head(toks.begin() + sent_begin, toks.begin() + pos);
            std::vector<std::string> tail(toks.begin() + pos + hit->phrase.size(),
                                          toks.begin() + sent_begin + len);
            out.push_back(Triple{detokenize(head), hit->relation, detokenize(tail)});
            break;
        }
        sent_begin = i + 1;
    }
    return out;
}

class RuleExtractor : public Extractor {
public:
    explicit RuleExtractor(RuleGrammar grammar = default_grammar())
        : grammar_(std::move(grammar)) {}

    std::vector<Triple> extract(const Chunk& chunk) override {
        return rule_extract(chunk, grammar_);
    }

    const RuleGrammar& grammar() const { return grammar_; }

private:
    RuleGrammar grammar_;
};

}  // namespace graphmem
