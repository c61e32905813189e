#pragma once
// Latent view of memory: signed feature-hash embeddings for edges and
// queries, bilinear relevance scoring s_i = v^T W u_i, budgeted hard top-k
// selection, the softmax relaxation used for gradient flow, and the exact
// analytic gradients of the selection surrogate loss.
//
// The straight-through contract: forward/reporting paths use the hard
// top-k mask z, the backward path differentiates only through the softmax
// weights alpha. Nothing in the gradient depends on z.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphmem/model.hpp"
#include "graphmem/tokenizer.hpp"

namespace graphmem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// splitmix64 finalizer; spreads FNV output across all 64 bits so that
// bucket (low bits) and sign (top bit) are independent-ish.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Builder-side embedding parameters: hashing dimension, the trainable
// linear map applied after hashing, and the hash seed that pins U across
// process restarts.
struct EmbedderParams {
    int dim = 64;
    Matrix edge_map;  // A, d x d, identity-initialized
    std::uint64_t hash_seed = 0x6d656d6f72794231ULL;

    static EmbedderParams make(int d, std::uint64_t seed = 0x6d656d6f72794231ULL) {
        if (d < 2) throw std::invalid_argument("embedding dim must be >= 2");
        EmbedderParams p;
        p.dim = d;
        p.edge_map = Matrix::Identity(d, d);
        p.hash_seed = seed;
        return p;
    }
    bool valid() const {
        return dim >= 2 && edge_map.rows() == dim && edge_map.cols() == dim &&
               edge_map.allFinite();
    }
};

// Retriever-side parameters: bilinear weight, query encoder map,
// relaxation temperature, selection budget.
struct RetrieverParams {
    Matrix W;          // d x d
    Matrix query_map;  // Q, d x d, identity-initialized
    double temperature = 0.5;  // tau
    int budget = 30;           // k

    static RetrieverParams make(int d, double tau = 0.5, int k = 30) {
        RetrieverParams p;
        p.W = Matrix::Identity(d, d);
        p.query_map = Matrix::Identity(d, d);
        p.temperature = tau;
        p.budget = k;
        return p;
    }
    bool valid() const {
        return temperature > 0.0 && budget >= 1 && W.allFinite() && query_map.allFinite();
    }
};

namespace latent_detail {

// Accumulates signed hash buckets for one prefixed token.
inline void hash_token(std::string_view prefix, std::string_view token, int dim,
                       std::uint64_t seed, Vector& acc) {
    std::uint64_t h = fnv1a64(prefix);
    h = fnv1a64(token, h);
    h = mix64(h ^ seed);
    const int bucket = static_cast<int>(h % static_cast<std::uint64_t>(dim));
    const double sign = (h >> 63) ? -1.0 : 1.0;
    acc[bucket] += sign;
}

inline void normalize_or_zero(Vector& v) {
    const double n = v.norm();
    if (n > 0.0) v /= n;
}

}  // namespace latent_detail

// Raw hashed feature of an edge (before the trainable map): tokens of
// head/relation/tail hashed under field prefixes so (a,r,b) and (b,r,a)
// embed differently, then L2-normalized.
inline Vector edge_raw_feature(const Edge& e, const EmbedderParams& p) {
    Vector acc = Vector::Zero(p.dim);
    for (const std::string& t : tokenize(e.triple.head))
        latent_detail::hash_token("h:", t, p.dim, p.hash_seed, acc);
    for (const std::string& t : tokenize(e.triple.relation))
        latent_detail::hash_token("r:", t, p.dim, p.hash_seed, acc);
    for (const std::string& t : tokenize(e.triple.tail))
        latent_detail::hash_token("t:", t, p.dim, p.hash_seed, acc);
    latent_detail::normalize_or_zero(acc);
    return acc;
}

// u_i = A f_i
inline Vector embed_edge(const Edge& e, const EmbedderParams& p) {
    return p.edge_map * edge_raw_feature(e, p);
}

// Rows of F are raw features f_i, row i bound to edge insertion rank i.
inline Matrix raw_feature_matrix(const GraphState& graph, const EmbedderParams& p) {
    Matrix F(static_cast<Eigen::Index>(graph.edges.size()), p.dim);
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        F.row(static_cast<Eigen::Index>(i)) = edge_raw_feature(graph.edges[i], p).transpose();
    }
    return F;
}

// U = F A^T, rows are u_i^T.
inline Matrix embed_graph(const GraphState& graph, const EmbedderParams& p) {
    return raw_feature_matrix(graph, p) * p.edge_map.transpose();
}

// Raw hashed feature of a question (bag of "q:"-prefixed tokens).
inline Vector query_raw_feature(std::string_view q, const EmbedderParams& p) {
    const auto toks = tokenize(q);
    if (toks.empty()) throw std::invalid_argument("question has zero tokens");
    Vector acc = Vector::Zero(p.dim);
    for (const std::string& t : toks) {
        latent_detail::hash_token("q:", t, p.dim, p.hash_seed, acc);
    }
    latent_detail::normalize_or_zero(acc);
    return acc;
}

// v = Q g
inline Vector encode_query(std::string_view q, const RetrieverParams& rp,
                           const EmbedderParams& ep) {
    return rp.query_map * query_raw_feature(q, ep);
}

// s_i = v^T W u_i for every row of U.
inline Vector score(const Vector& v, const Matrix& W, const Matrix& U) {
    if (v.size() != W.rows() || W.cols() != U.cols()) {
        throw std::invalid_argument("score: shape mismatch");
    }
    return U * (W.transpose() * v);
}

// Indices of the k largest scores, descending score, ties by ascending
// index. Returns all indices when k >= |s|.
inline std::vector<int> topk(const Vector& s, int k) {
    if (k < 1) throw std::invalid_argument("topk: k must be >= 1");
    std::vector<int> idx(static_cast<std::size_t>(s.size()));
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(take), idx.end(),
                      [&s](int a, int b) {
                          if (s[a] != s[b]) return s[a] > s[b];
                          return a < b;
                      });
    idx.resize(take);
    return idx;
}

// Numerically stable softmax of s / tau.
inline Vector relax(const Vector& s, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("relax: tau must be positive");
    if (s.size() == 0) return Vector();
    const double m = s.maxCoeff();
    Vector a = ((s.array() - m) / tau).exp();
    return a / a.sum();
}

// Hard mask (forward path), soft weights (backward path), cached scores.
struct SelectionRelaxation {
    Vector hard_mask;    // z, 0/1, sum = min(k, |s|)
    Vector soft_weights; // alpha, positive, sums to 1
    Vector scores;       // s
    std::vector<int> selected;  // top-k indices in rank order
};

inline SelectionRelaxation ste_select(const Vector& s, int k, double tau) {
    SelectionRelaxation out;
    out.scores = s;
    out.selected = topk(s, k);
    out.hard_mask = Vector::Zero(s.size());
    for (int i : out.selected) out.hard_mask[i] = 1.0;
    out.soft_weights = relax(s, tau);
    return out;
}

// The externalized evidence: selected edge indices (0-based ranks into the
// graph's insertion order), the edges themselves, and aligned scores,
// ordered by descending score then ascending index.
struct Subgraph {
    std::vector<int> indices;
    std::vector<Edge> edges;
    std::vector<double> scores;

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
};

// Composes encode -> score -> topk over a frozen graph.
inline Subgraph retrieve(const GraphState& graph, const Matrix& U, std::string_view q,
                         const RetrieverParams& rp, const EmbedderParams& ep) {
    if (!graph.frozen()) throw std::logic_error("retrieve requires a frozen graph");
    if (static_cast<std::size_t>(U.rows()) != graph.edges.size()) {
        throw std::invalid_argument("retrieve: U rows and graph edges disagree");
    }
    Subgraph out;
    if (graph.edges.empty()) return out;
    const Vector v = encode_query(q, rp, ep);
    const Vector s = score(v, rp.W, U);
    for (int i : topk(s, rp.budget)) {
        out.indices.push_back(i);
        out.edges.push_back(graph.edges[static_cast<std::size_t>(i)]);
        out.scores.push_back(s[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Surrogate-loss gradient path.
//
// Per instance: f_i raw edge features (rows of F), g raw query feature,
// u_i = A f_i, v = Q g, s_i = v^T W u_i, alpha = softmax(s / tau),
// L = -log(sum_{i in gold} alpha_i + eps).
// ---------------------------------------------------------------------------

struct RetrievalInstance {
    Matrix edge_features;   // F, |E| x d
    Vector query_feature;   // g
    std::vector<int> gold;  // gold rows of F, non-empty
};

struct SurrogateGrads {
    Matrix W;
    Matrix Q;
    Matrix A;
    double loss = 0.0;
};

// Loss and dL/ds for one score vector. Shift-invariant in s.
inline std::pair<double, Vector> score_loss_grad(const Vector& s, const std::vector<int>& gold,
                                                 double tau, double eps) {
    if (gold.empty()) throw std::invalid_argument("gold index set is empty");
    const Vector alpha = relax(s, tau);
    double p = 0.0;
    for (int i : gold) p += alpha[i];
    const double loss = -std::log(p + eps);

    // dL/ds_j = -(1 / (p + eps)) * (alpha_j / tau) * ([j in gold] - p)
    Vector ds = alpha * (p / tau / (p + eps));
    for (int i : gold) ds[i] -= alpha[i] / tau / (p + eps);
    return {loss, ds};
}

// Exact analytic gradients of the mean surrogate loss over a batch.
//   dL/dW = v (U^T ds)^T
//   dL/dQ = (W U^T ds) g^T
//   dL/dA = (W^T v) (F^T ds)^T
inline SurrogateGrads grad_surrogate(const EmbedderParams& ep, const RetrieverParams& rp,
                                     std::span<const RetrievalInstance> batch,
                                     double eps = 1e-9) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const int d = ep.dim;
    SurrogateGrads out;
    out.W = Matrix::Zero(d, d);
    out.Q = Matrix::Zero(d, d);
    out.A = Matrix::Zero(d, d);

    for (const RetrievalInstance& inst : batch) {
        const Matrix U = inst.edge_features * ep.edge_map.transpose();
        const Vector v = rp.query_map * inst.query_feature;
        const Vector s = score(v, rp.W, U);
        auto [loss, ds] = score_loss_grad(s, inst.gold, rp.temperature, eps);
        out.loss += loss;

        const Vector wu = U.transpose() * ds;               // sum_j ds_j u_j
        out.W.noalias() += v * wu.transpose();
        out.Q.noalias() += (rp.W * wu) * inst.query_feature.transpose();
        const Vector wr = inst.edge_features.transpose() * ds;  // sum_j ds_j f_j
        out.A.noalias() += (rp.W.transpose() * v) * wr.transpose();
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    out.W *= inv;
    out.Q *= inv;
    out.A *= inv;
    out.loss *= inv;
    return out;
}

// Forward-only value of the mean surrogate loss (used by finite-difference
// checks and training diagnostics).
inline double surrogate_batch_loss(const EmbedderParams& ep, const RetrieverParams& rp,
                                   std::span<const RetrievalInstance> batch,
                                   double eps = 1e-9) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    double total = 0.0;
    for (const RetrievalInstance& inst : batch) {
        const Matrix U = inst.edge_features * ep.edge_map.transpose();
        const Vector v = rp.query_map * inst.query_feature;
        const Vector s = score(v, rp.W, U);
        total += score_loss_grad(s, inst.gold, rp.temperature, eps).first;
    }
    return total / static_cast<double>(batch.size());
}

}  // namespace graphmem
