#pragma once

/*
 * Supervision: deriving the canonical ordering pi0 from labeled documents and
 * locking those documents' intent structure during sampling.
 *
 * pi0 is built in three steps: collapse each labeled intent sequence to the
 * order of its distinct labels, accumulate pairwise precedence counts g[i][j],
 * then topologically sort the graph with edges {(i,j) : g[i][j] >= g[j][i]},
 * breaking cycles by deleting one random edge per detected cycle.
 */

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "gmmlda/corpus.hpp"
#include "gmmlda/model.hpp"
#include "gmmlda/permutation.hpp"
#include "gmmlda/rng.hpp"

namespace gmmlda {

// Distinct labels of z in document order. A label occurring in disconnected
// runs is placed at the start of its longest run (earliest run on ties).
inline std::vector<int> collapse_labels(const std::vector<int>& z) {
    if (z.empty()) throw std::invalid_argument("collapse_labels: empty sequence");
    struct Best {
        int len = 0;
        int start = -1;
    };
    std::vector<Best> best;
    std::size_t i = 0;
    while (i < z.size()) {
        std::size_t j = i;
        while (j < z.size() && z[j] == z[i]) ++j;
        const int label = z[i];
        if (label >= static_cast<int>(best.size())) best.resize(static_cast<std::size_t>(label) + 1);
        Best& b = best[static_cast<std::size_t>(label)];
        const int len = static_cast<int>(j - i);
        if (len > b.len) {
            b.len = len;
            b.start = static_cast<int>(i);
        }
        i = j;
    }
    std::vector<int> labels;
    for (int l = 0; l < static_cast<int>(best.size()); ++l)
        if (best[static_cast<std::size_t>(l)].len > 0) labels.push_back(l);
    std::sort(labels.begin(), labels.end(), [&best](int a, int b) {
        return best[static_cast<std::size_t>(a)].start < best[static_cast<std::size_t>(b)].start;
    });
    return labels;
}

// Pairwise precedence counts over collapsed label orders; g[i][j] = times
// label i appeared before label j.
struct PrecedenceGraph {
    int K = 0;
    std::vector<int> g;             // K*K, g[i*K+j]
    std::vector<std::uint8_t> observed;  // labels seen in any order

    int count(int i, int j) const { return g[static_cast<std::size_t>(i) * K + j]; }
    bool edge(int i, int j) const {
        return i != j && observed[static_cast<std::size_t>(i)] && observed[static_cast<std::size_t>(j)] &&
               count(i, j) >= count(j, i);
    }
};

inline PrecedenceGraph build_precedence_graph(const std::vector<std::vector<int>>& orders, int K) {
    PrecedenceGraph pg;
    pg.K = K;
    pg.g.assign(static_cast<std::size_t>(K) * K, 0);
    pg.observed.assign(static_cast<std::size_t>(K), 0);
    for (const auto& ord : orders) {
        for (std::size_t a = 0; a < ord.size(); ++a) {
            if (ord[a] < 0 || ord[a] >= K)
                throw std::out_of_range("build_precedence_graph: label outside [0, K)");
            pg.observed[static_cast<std::size_t>(ord[a])] = 1;
            for (std::size_t b = a + 1; b < ord.size(); ++b)
                ++pg.g[static_cast<std::size_t>(ord[a]) * K + ord[b]];
        }
    }
    return pg;
}

namespace detail {

// Finds one directed cycle as a list of edges, or empty when the graph is a DAG.
inline std::vector<std::pair<int, int>> find_cycle(const std::vector<std::vector<std::uint8_t>>& adj,
                                                   const std::vector<int>& nodes) {
    const int K = static_cast<int>(adj.size());
    std::vector<int> color(static_cast<std::size_t>(K), 0);  // 0 white, 1 on stack, 2 done
    std::vector<int> parent(static_cast<std::size_t>(K), -1);

    for (int root : nodes) {
        if (color[static_cast<std::size_t>(root)] != 0) continue;
        std::vector<std::pair<int, int>> stack{{root, 0}};
        color[static_cast<std::size_t>(root)] = 1;
        while (!stack.empty()) {
            const int node = stack.back().first;
            bool descended = false;
            while (stack.back().second < K) {
                const int j = stack.back().second++;
                if (!adj[static_cast<std::size_t>(node)][static_cast<std::size_t>(j)]) continue;
                if (color[static_cast<std::size_t>(j)] == 1) {
                    // back edge: walk parents from node to j
                    std::vector<std::pair<int, int>> cycle{{node, j}};
                    int cur = node;
                    while (cur != j) {
                        cycle.emplace_back(parent[static_cast<std::size_t>(cur)], cur);
                        cur = parent[static_cast<std::size_t>(cur)];
                    }
                    std::reverse(cycle.begin(), cycle.end());
                    return cycle;
                }
                if (color[static_cast<std::size_t>(j)] == 0) {
                    color[static_cast<std::size_t>(j)] = 1;
                    parent[static_cast<std::size_t>(j)] = node;
                    stack.emplace_back(j, 0);
                    descended = true;
                    break;
                }
            }
            if (!descended) {
                color[static_cast<std::size_t>(node)] = 2;
                stack.pop_back();
            }
        }
    }
    return {};
}

}  // namespace detail

// Canonical permutation from labeled documents: topological order of the
// precedence graph over observed labels (random edge removed per cycle until
// acyclic, uniform choice among available nodes), unobserved labels appended
// in ascending id order.
inline Permutation derive_canonical(const std::vector<std::vector<int>>& labeled_docs, int K,
                                    Rng& rng) {
    if (K < 1) throw std::invalid_argument("derive_canonical: K must be >= 1");
    std::vector<std::vector<int>> orders;
    orders.reserve(labeled_docs.size());
    for (const auto& z : labeled_docs)
        if (!z.empty()) orders.push_back(collapse_labels(z));
    const PrecedenceGraph pg = build_precedence_graph(orders, K);

    std::vector<int> nodes;
    for (int i = 0; i < K; ++i)
        if (pg.observed[static_cast<std::size_t>(i)]) nodes.push_back(i);

    std::vector<std::vector<std::uint8_t>> adj(static_cast<std::size_t>(K),
                                               std::vector<std::uint8_t>(static_cast<std::size_t>(K), 0));
    for (int i : nodes)
        for (int j : nodes)
            if (pg.edge(i, j)) adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;

    for (;;) {
        auto cycle = detail::find_cycle(adj, nodes);
        if (cycle.empty()) break;
        const auto& [from, to] = cycle[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(cycle.size())))];
        adj[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)] = 0;
    }

    std::vector<int> indeg(static_cast<std::size_t>(K), 0);
    for (int i : nodes)
        for (int j : nodes)
            if (adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) ++indeg[static_cast<std::size_t>(j)];

    Permutation pi0;
    std::vector<int> avail;
    std::vector<std::uint8_t> placed(static_cast<std::size_t>(K), 0);
    for (int i : nodes)
        if (indeg[static_cast<std::size_t>(i)] == 0) avail.push_back(i);
    while (!avail.empty()) {
        const int pick = rng.uniform_int(static_cast<int>(avail.size()));
        const int n = avail[static_cast<std::size_t>(pick)];
        avail.erase(avail.begin() + pick);
        pi0.push_back(n);
        placed[static_cast<std::size_t>(n)] = 1;
        for (int j : nodes) {
            if (!adj[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)]) continue;
            adj[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)] = 0;
            if (--indeg[static_cast<std::size_t>(j)] == 0) avail.push_back(j);
        }
        std::sort(avail.begin(), avail.end());
    }
    for (int i = 0; i < K; ++i)
        if (!placed[static_cast<std::size_t>(i)] && pg.observed[static_cast<std::size_t>(i)])
            throw std::logic_error("derive_canonical: cycle breaking failed");
    for (int i = 0; i < K; ++i)
        if (!pg.observed[static_cast<std::size_t>(i)]) pi0.push_back(i);
    return pi0;
}

namespace detail {

// Discordant pairs between a (possibly partial) distinct-label sequence and a
// reference ordering; equals the Kendall distance on full permutations.
inline int discordant_pairs(const std::vector<int>& seq, const std::vector<int>& rank_in_ref) {
    int d = 0;
    for (std::size_t i = 0; i < seq.size(); ++i)
        for (std::size_t j = i + 1; j < seq.size(); ++j)
            if (rank_in_ref[static_cast<std::size_t>(seq[i])] > rank_in_ref[static_cast<std::size_t>(seq[j])])
                ++d;
    return d;
}

}  // namespace detail

// Completes a partial label order to a full permutation: the labels missing
// from pi_prime are inserted one by one, in pi0 order, each at the position
// minimizing the discordance with pi0 (earliest position on ties).
inline Permutation greedy_insert(const std::vector<int>& pi_prime, const Permutation& pi0) {
    const int K = static_cast<int>(pi0.size());
    if (!is_permutation_of_range(pi0))
        throw std::invalid_argument("greedy_insert: pi0 must be a permutation of [0, K)");
    std::vector<int> rank(static_cast<std::size_t>(K));
    std::vector<std::uint8_t> present(static_cast<std::size_t>(K), 0);
    for (int i = 0; i < K; ++i) rank[static_cast<std::size_t>(pi0[static_cast<std::size_t>(i)])] = i;
    for (int l : pi_prime) {
        if (l < 0 || l >= K) throw std::out_of_range("greedy_insert: label outside [0, K)");
        if (present[static_cast<std::size_t>(l)])
            throw std::invalid_argument("greedy_insert: duplicate label in pi_prime");
        present[static_cast<std::size_t>(l)] = 1;
    }

    std::vector<int> cur = pi_prime;
    std::vector<int> cand;
    for (int l : pi0) {
        if (present[static_cast<std::size_t>(l)]) continue;
        int best_pos = 0;
        int best_d = -1;
        for (int pos = 0; pos <= static_cast<int>(cur.size()); ++pos) {
            cand = cur;
            cand.insert(cand.begin() + pos, l);
            const int d = detail::discordant_pairs(cand, rank);
            if (best_d < 0 || d < best_d) {
                best_d = d;
                best_pos = pos;
            }
        }
        cur.insert(cur.begin() + best_pos, l);
    }
    return cur;
}

// Bag view of a label sequence (sorted multiset).
inline std::vector<int> labels_to_u(const std::vector<int>& z) {
    std::vector<int> u = z;
    std::sort(u.begin(), u.end());
    return u;
}

// Fixes the intent structure of the given documents to their labels: z and u
// from the labels, pi via greedy completion toward pi0, upsilon relative to
// pi0's ordering. Counts are rebuilt afterwards.
inline void lock_labeled(ModelState& st, const Corpus& corpus, const std::vector<int>& doc_indices) {
    const int K = st.hyper.K;
    std::vector<int> rank(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) rank[static_cast<std::size_t>(st.pi0[static_cast<std::size_t>(i)])] = i;

    for (int d : doc_indices) {
        const auto& doc = corpus.documents.at(static_cast<std::size_t>(d));
        if (doc.labels.empty())
            throw std::invalid_argument("lock_labeled: document has no labels: " + doc.id);
        for (int l : doc.labels)
            if (l < 0 || l >= K) throw std::out_of_range("lock_labeled: label id outside [0, K)");

        auto& a = st.assign;
        a.z[static_cast<std::size_t>(d)] = doc.labels;
        a.u[static_cast<std::size_t>(d)] = doc.labels;
        a.pi[static_cast<std::size_t>(d)] = greedy_insert(collapse_labels(doc.labels), st.pi0);
        Permutation relabeled(a.pi[static_cast<std::size_t>(d)].size());
        for (std::size_t i = 0; i < relabeled.size(); ++i)
            relabeled[i] = rank[static_cast<std::size_t>(a.pi[static_cast<std::size_t>(d)][i])];
        a.upsilon[static_cast<std::size_t>(d)] = permutation_to_inversion(relabeled);
        a.fixed[static_cast<std::size_t>(d)] = 1;
    }
    st.counts = rebuild_counts(corpus, st.assign, st.hyper.K, st.hyper.T);
}

}  // namespace gmmlda
