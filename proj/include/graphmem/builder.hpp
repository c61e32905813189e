#pragma once
// Stage-I streaming builder: per chunk, Extract -> Merge -> Filter -> Cap
// under the per-chunk and global budgets. Building one document is a
// strictly sequential fold; independent documents may be built in parallel.

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "graphmem/chunker.hpp"
#include "graphmem/extraction.hpp"
#include "graphmem/model.hpp"
#include "graphmem/reasoner.hpp"
#include "graphmem/serializer.hpp"

namespace graphmem {

struct FilterCounts {
    long schema = 0;        // empty/uncanonicalizable fields
    long field_length = 0;  // field longer than L_field tokens
    long relation_type = 0; // relation outside [a-z0-9_ ]
    long duplicate = 0;     // duplicate edge ids (unreachable after merge)

    long total() const { return schema + field_length + relation_type + duplicate; }
};

// Observability of one build. `candidates_emitted` counts candidates that
// entered Merge, i.e. after per-chunk truncation; the conservation
// invariant candidates == |E| + merged_duplicates + filtered + evicted
// holds over that definition.
struct BuildReport {
    int chunks_processed = 0;
    long candidates_emitted = 0;
    long merged_duplicates = 0;
    FilterCounts filtered;
    long evicted_by_cap = 0;

    // extra counters for budget/property checks
    long truncated_by_chunk_cap = 0;  // extractor candidates dropped by the m_chunk budget
    int max_chunk_slots_used = 0;     // max distinct candidates admitted in one chunk
    long occurrences_removed = 0;     // occurrence-weighted filter+cap removals

    bool conserved(const GraphState& state) const {
        return candidates_emitted == static_cast<long>(state.edges.size()) +
                                         merged_duplicates + filtered.total() + evicted_by_cap;
    }
};

namespace builder_detail {

inline bool relation_charset_ok(std::string_view relation) {
    for (char c : relation) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == ' ';
        if (!ok) return false;
    }
    return true;
}

}  // namespace builder_detail

// Canonicalizes candidates into the state: existing edges get their
// occurrence count bumped, novel ones are appended in insertion order.
// Candidates that do not survive canonicalization are counted as schema
// rejections.
inline void merge(GraphState& state, const std::vector<Triple>& candidates,
                  BuildReport& report, int chunk_index) {
    if (state.frozen()) throw std::logic_error("merge on frozen graph state");
    for (const Triple& raw : candidates) {
        ++report.candidates_emitted;
        auto canonical = canonicalize_triple(raw);
        if (!canonical) {
            ++report.filtered.schema;
            continue;
        }
        const std::uint64_t id = edge_id(*canonical);
        const long pos = state.find(id);
        if (pos >= 0) {
            ++state.edges[static_cast<std::size_t>(pos)].occurrence_count;
            ++report.merged_duplicates;
        } else {
            state.push_edge(Edge{std::move(*canonical), id, 1, chunk_index,
                                 state.take_insertion_order()});
        }
    }
}

// Removes edges violating quality constraints: field token length,
// relation charset, schema validity. Duplicate ids cannot survive merge;
// finding one here is a logic error.
inline void filter(GraphState& state, const BuildConfig& cfg, BuildReport& report) {
    if (state.frozen()) throw std::logic_error("filter on frozen graph state");
    std::unordered_set<std::uint64_t> seen;
    std::vector<Edge> kept;
    kept.reserve(state.edges.size());
    for (Edge& e : state.edges) {
        if (!seen.insert(e.id).second) {
            ++report.filtered.duplicate;
            report.occurrences_removed += e.occurrence_count;
            assert(false && "duplicate edge id survived merge");
            continue;
        }
        if (e.triple.head.empty() || e.triple.relation.empty() || e.triple.tail.empty()) {
            ++report.filtered.schema;
            report.occurrences_removed += e.occurrence_count;
            continue;
        }
        const std::size_t cap = static_cast<std::size_t>(cfg.field_cap);
        if (token_count(e.triple.head) > cap || token_count(e.triple.relation) > cap ||
            token_count(e.triple.tail) > cap) {
            ++report.filtered.field_length;
            report.occurrences_removed += e.occurrence_count;
            continue;
        }
        if (!builder_detail::relation_charset_ok(e.triple.relation)) {
            ++report.filtered.relation_type;
            report.occurrences_removed += e.occurrence_count;
            continue;
        }
        kept.push_back(std::move(e));
    }
    state.edges = std::move(kept);
    state.reindex();
}

// Hard capacity limit: evicts edges in ascending (occurrence_count,
// -insertion_order) priority until |E| <= M, i.e. rarest-and-newest first.
inline void cap(GraphState& state, const BuildConfig& cfg, BuildReport& report) {
    if (state.frozen()) throw std::logic_error("cap on frozen graph state");
    const std::size_t limit = static_cast<std::size_t>(cfg.global_cap);
    while (state.edges.size() > limit) {
        auto victim = std::min_element(
            state.edges.begin(), state.edges.end(), [](const Edge& a, const Edge& b) {
                if (a.occurrence_count != b.occurrence_count)
                    return a.occurrence_count < b.occurrence_count;
                return a.insertion_order > b.insertion_order;
            });
        ++report.evicted_by_cap;
        report.occurrences_removed += victim->occurrence_count;
        state.edges.erase(victim);
    }
    state.reindex();
}

// One streaming step. The per-chunk budget is measured in extraction
// slots: duplicate candidates of an already-admitted triple ride along for
// free, distinct triples beyond m_chunk are truncated.
inline void step(GraphState& state, const Chunk& chunk, Extractor& extractor,
                 const BuildConfig& cfg, BuildReport& report) {
    cfg.require_valid();
    if (state.frozen()) throw std::logic_error("step on frozen graph state");
    if (chunk.index != state.step + 1) {
        throw std::logic_error("chunk index does not continue the stream");
    }
    const std::vector<Triple> raw = extractor.extract(chunk);

    std::vector<Triple> admitted;
    std::unordered_set<std::uint64_t> slots;
    for (const Triple& t : raw) {
        auto canonical = canonicalize_triple(t);
        // uncanonicalizable candidates spend a slot and die in merge
        const std::uint64_t id = canonical ? edge_id(*canonical) : edge_id(t);
        if (slots.count(id) || slots.size() < static_cast<std::size_t>(cfg.per_chunk_cap)) {
            slots.insert(id);
            admitted.push_back(t);
        } else {
            ++report.truncated_by_chunk_cap;
        }
    }
    report.max_chunk_slots_used =
        std::max(report.max_chunk_slots_used, static_cast<int>(slots.size()));

    merge(state, admitted, report, chunk.index);
    filter(state, cfg, report);
    cap(state, cfg, report);
    ++state.step;
    ++report.chunks_processed;
}

// Folds `step` over the chunking of x and freezes the result. The question
// is never consulted: building is query-independent.
inline std::pair<GraphState, BuildReport> build(std::string_view x, Extractor& extractor,
                                                const BuildConfig& cfg) {
    cfg.require_valid();
    GraphState state;
    state.capacity = cfg.global_cap;
    BuildReport report;
    for (const Chunk& c : chunk(x, cfg)) {
        step(state, c, extractor, cfg, report);
    }
    state.freeze();
    return {std::move(state), report};
}

// Full-graph interface value: teacher-forced cross-entropy of the gold
// answer under the reasoner, conditioned on Serialize(E) ++ q. Evaluation
// only when the reasoner is not differentiable.
inline double stage1_loss(const GraphState& graph, std::string_view q,
                          std::string_view answer, Reasoner& reasoner) {
    const std::string prompt = compose_prompt(serialize(graph.edges), q);
    const std::vector<std::string> answer_tokens = tokenize(answer);
    const std::vector<double> lp = reasoner.logprobs(prompt, answer_tokens);
    double loss = 0.0;
    for (double v : lp) loss -= v;
    return loss;
}

}  // namespace graphmem
