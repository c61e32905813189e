#pragma once
// Core domain types: triples, edges, the capped graph state, and the
// global build configuration shared by every other module.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graphmem/tokenizer.hpp"

namespace graphmem {

// A (head, relation, tail) fact; the unit of memory.
struct Triple {
    std::string head;
    std::string relation;
    std::string tail;

    bool operator==(const Triple&) const = default;
};

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 14695981039346656037ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64_byte(unsigned char c, std::uint64_t h) {
    h ^= c;
    h *= 1099511628211ULL;
    return h;
}

// Stable 64-bit identifier of a canonical triple. Fields are digested with
// an 0x1F separator so ("a b", r, "c") and ("a", "r b", "c") cannot collide
// on concatenation. FNV-1a keeps memory files portable across platforms.
inline std::uint64_t edge_id(const Triple& t) {
    std::uint64_t h = fnv1a64(t.head);
    h = fnv1a64_byte(0x1F, h);
    h = fnv1a64(t.relation, h);
    h = fnv1a64_byte(0x1F, h);
    h = fnv1a64(t.tail, h);
    return h;
}

inline bool is_ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Canonical entity/relation form: ASCII lowercase, whitespace collapsed to
// single spaces, leading/trailing non-alphanumeric bytes stripped.
// Idempotent. Returns nullopt when nothing survives normalization; the
// caller drops the candidate triple.
inline std::optional<std::string> canonicalize_entity(std::string_view raw) {
    std::string s;
    s.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_space_char(c)) {
            pending_space = !s.empty();
            continue;
        }
        if (pending_space) {
            s += ' ';
            pending_space = false;
        }
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        s += c;
    }
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && !is_ascii_alnum(s[b])) ++b;
    while (e > b && !is_ascii_alnum(s[e - 1])) --e;
    if (b == e) return std::nullopt;
    return s.substr(b, e - b);
}

// Canonicalizes all three fields; nullopt when any field collapses to nothing.
inline std::optional<Triple> canonicalize_triple(const Triple& t) {
    auto h = canonicalize_entity(t.head);
    auto r = canonicalize_entity(t.relation);
    auto tl = canonicalize_entity(t.tail);
    if (!h || !r || !tl) return std::nullopt;
    return Triple{std::move(*h), std::move(*r), std::move(*tl)};
}

// A retained fact with provenance. `insertion_order` is monotone over the
// life of one GraphState and is never reused after an eviction.
struct Edge {
    Triple triple;  // canonical form
    std::uint64_t id = 0;
    long occurrence_count = 1;
    int first_chunk = 0;
    long insertion_order = 0;
};

// Build-time budgets. Defaults follow the engine-wide configuration:
// 1024-token chunks with 128-token overlap, 32 candidates per chunk,
// 150 edges globally, 16 tokens per field.
struct BuildConfig {
    int chunk_len = 1024;     // L
    int overlap = 128;        // O
    int per_chunk_cap = 32;   // m_chunk
    int global_cap = 150;     // M
    int field_cap = 16;       // L_field

    bool valid() const {
        return overlap >= 0 && overlap < chunk_len && per_chunk_cap >= 1 &&
               global_cap >= 1 && field_cap >= 1;
    }
    void require_valid() const {
        if (!valid()) throw std::invalid_argument("invalid build config");
    }
};

// The evolving capped edge set plus its canonical entity index.
// Single-writer while building; freeze() before handing to readers.
class GraphState {
public:
    std::vector<Edge> edges;  // insertion order
    int step = 0;             // chunks consumed
    int capacity = 150;       // M

    const std::unordered_map<std::string, int>& entity_index() const { return entity_index_; }
    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }

    // Position of an edge id in `edges`, or -1.
    long find(std::uint64_t id) const {
        auto it = id_to_pos_.find(id);
        return it == id_to_pos_.end() ? -1 : static_cast<long>(it->second);
    }

    long take_insertion_order() { return next_insertion_order_++; }

    // Appends an edge and updates both indexes incrementally.
    void push_edge(Edge e) {
        id_to_pos_[e.id] = edges.size();
        for (const std::string* ent : {&e.triple.head, &e.triple.tail}) {
            entity_index_.emplace(*ent, static_cast<int>(entity_index_.size()));
        }
        edges.push_back(std::move(e));
    }

    // Recomputes entity ids (first-appearance order over edges) and the
    // id->position map. Called by the builder after removal passes.
    void reindex() {
        entity_index_.clear();
        id_to_pos_.clear();
        int next_entity = 0;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            id_to_pos_[edges[i].id] = i;
            for (const std::string* ent : {&edges[i].triple.head, &edges[i].triple.tail}) {
                if (entity_index_.emplace(*ent, next_entity).second) ++next_entity;
            }
        }
    }

private:
    std::unordered_map<std::string, int> entity_index_;
    std::unordered_map<std::uint64_t, std::size_t> id_to_pos_;
    long next_insertion_order_ = 0;
    bool frozen_ = false;
};

// One QA training/evaluation instance. gold_edge_ids is populated only for
// synthetic corpora where the supporting facts are known exactly.
struct QAInstance {
    std::string id;
    std::string context;
    std::string question;
    std::vector<std::string> answers;
    std::vector<std::uint64_t> gold_edge_ids;
};

}  // namespace graphmem
