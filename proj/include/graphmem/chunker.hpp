#pragma once
// Deterministic token-level splitting of a long context into overlapping
// chunks. Stride is exactly L - O; the final chunk may be shorter and is
// always kept.

#include <string>
#include <string_view>
#include <vector>

#include "graphmem/model.hpp"
#include "graphmem/tokenizer.hpp"

namespace graphmem {

struct Chunk {
    int index = 1;               // 1-based
    std::size_t token_begin = 0; // [token_begin, token_end)
    std::size_t token_end = 0;
    std::string text;
};

inline std::vector<Chunk> chunk(std::string_view x, const BuildConfig& cfg) {
    cfg.require_valid();
    const auto spans = tokenize_spans(x);
    const std::size_t total = spans.size();
    std::vector<Chunk> chunks;
    if (total == 0) return chunks;

    const std::size_t len = static_cast<std::size_t>(cfg.chunk_len);
    const std::size_t stride = static_cast<std::size_t>(cfg.chunk_len - cfg.overlap);
    std::size_t start = 0;
    int index = 1;
    while (true) {
        const std::size_t end = std::min(start + len, total);
        const std::size_t byte_begin = spans[start].begin;
        const std::size_t byte_end = spans[end - 1].end;
        chunks.push_back(Chunk{index, start, end,
                               std::string(x.substr(byte_begin, byte_end - byte_begin))});
        if (end == total) break;
        start += stride;
        ++index;
    }
    return chunks;
}

}  // namespace graphmem
