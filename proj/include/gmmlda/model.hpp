#pragma once

/*
 * Model state for joint topic / sentence-intent inference.
 *
 * Latents per document d: u[d][s] the bag of intent ids (one slot per
 * sentence), upsilon[d] the inversion vector relative to the canonical
 * ordering pi0, pi[d] the realized intent permutation, z[d][s] the sentence
 * intents (u arranged in pi order, equal intents contiguous). Per token
 * (d,s,m): b = 0 intent word / 1 topic word, t the topic when b = 1.
 *
 * Count tables (collapsed sufficient statistics):
 *   f0[k][v]   word v as intent word under intent k      f0_dot[k] row sums
 *   f1[t][v]   word v as topic word under topic t        f1_dot[t] row sums
 *   f1_doc[d][t] topic words of doc d in topic t         f1_doc_dot[d]
 *   fu[k]      intent-label usage over all u slots
 *   fb[i]      tokens of type i                          nv[v][i] per word
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmmlda/corpus.hpp"
#include "gmmlda/permutation.hpp"
#include "gmmlda/rng.hpp"

namespace gmmlda {

enum class Variant { full, intent_only, uniform_order };

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::intent_only: return "intent_only";
        case Variant::uniform_order: return "uniform_order";
        default: return "full";
    }
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "intent_only") return Variant::intent_only;
    if (s == "uniform_order") return Variant::uniform_order;
    throw std::invalid_argument("unknown variant: " + s);
}

struct Hyperparameters {
    int K = 0;
    int T = 0;
    double theta0 = 0.1;
    double lambda0 = 0.1;
    double alpha0 = 0.1;
    double beta0 = 0.1;
    double gamma0 = 1.0;
    double rho0 = 2.0;
    double nu0_scale = 0.1;  // nu0 = nu0_scale * D
    double c = 0.0;          // entropic regularization weight
    Variant variant = Variant::full;

    void validate() const {
        if (K < 1 || T < 1) throw std::invalid_argument("hyper: K and T must be >= 1");
        if (theta0 <= 0 || lambda0 <= 0 || alpha0 <= 0 || beta0 <= 0 || gamma0 <= 0)
            throw std::invalid_argument("hyper: concentrations must be positive");
        if (rho0 <= 0) throw std::invalid_argument("hyper: rho0 must be positive");
        if (nu0_scale <= 0) throw std::invalid_argument("hyper: nu0_scale must be positive");
        if (c < 0) throw std::invalid_argument("hyper: c must be non-negative");
    }
};

struct Assignments {
    std::vector<std::vector<int>> u;              // [d][s]
    std::vector<InversionVector> upsilon;         // [d][K-1]
    std::vector<Permutation> pi;                  // [d][K]
    std::vector<std::vector<int>> z;              // [d][s]
    std::vector<std::vector<std::vector<std::uint8_t>>> b;  // [d][s][m]
    std::vector<std::vector<std::vector<int>>> t;            // [d][s][m], -1 when b = 0
    std::vector<std::uint8_t> fixed;              // [d] label-locked
};

struct CountTables {
    int K = 0, T = 0, V = 0, D = 0;
    std::vector<int> f0;          // K*V
    std::vector<int> f0_dot;      // K
    std::vector<int> f1;          // T*V
    std::vector<int> f1_dot;      // T
    std::vector<int> f1_doc;      // D*T
    std::vector<int> f1_doc_dot;  // D
    std::vector<int> fu;          // K
    std::array<std::int64_t, 2> fb{0, 0};
    std::vector<std::array<int, 2>> nv;  // V

    void resize(int k, int t, int v, int d) {
        K = k;
        T = t;
        V = v;
        D = d;
        f0.assign(static_cast<std::size_t>(K) * V, 0);
        f0_dot.assign(static_cast<std::size_t>(K), 0);
        f1.assign(static_cast<std::size_t>(T) * V, 0);
        f1_dot.assign(static_cast<std::size_t>(T), 0);
        f1_doc.assign(static_cast<std::size_t>(D) * T, 0);
        f1_doc_dot.assign(static_cast<std::size_t>(D), 0);
        fu.assign(static_cast<std::size_t>(K), 0);
        fb = {0, 0};
        nv.assign(static_cast<std::size_t>(V), {0, 0});
    }

    int& at_f0(int k, int v) { return f0[static_cast<std::size_t>(k) * V + v]; }
    int at_f0(int k, int v) const { return f0[static_cast<std::size_t>(k) * V + v]; }
    int& at_f1(int t, int v) { return f1[static_cast<std::size_t>(t) * V + v]; }
    int at_f1(int t, int v) const { return f1[static_cast<std::size_t>(t) * V + v]; }
    int& at_f1_doc(int d, int t) { return f1_doc[static_cast<std::size_t>(d) * T + t]; }
    int at_f1_doc(int d, int t) const { return f1_doc[static_cast<std::size_t>(d) * T + t]; }

    bool operator==(const CountTables& o) const {
        return K == o.K && T == o.T && V == o.V && D == o.D && f0 == o.f0 && f0_dot == o.f0_dot &&
               f1 == o.f1 && f1_dot == o.f1_dot && f1_doc == o.f1_doc &&
               f1_doc_dot == o.f1_doc_dot && fu == o.fu && fb == o.fb && nv == o.nv;
    }
};

struct ModelState {
    Hyperparameters hyper;
    Assignments assign;
    CountTables counts;
    Dispersion rho;   // K-1
    Permutation pi0;  // canonical ordering; identity unless supervised

    double nu0() const { return hyper.nu0_scale * counts.D; }
};

inline CountTables rebuild_counts(const Corpus& corpus, const Assignments& a, int K, int T) {
    CountTables c;
    c.resize(K, T, corpus.vocab.size(), corpus.num_docs());
    for (int d = 0; d < corpus.num_docs(); ++d) {
        const auto& doc = corpus.documents[static_cast<std::size_t>(d)];
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            ++c.fu[static_cast<std::size_t>(a.u[static_cast<std::size_t>(d)][s])];
            const int zds = a.z[static_cast<std::size_t>(d)][s];
            for (std::size_t m = 0; m < doc.sentences[s].size(); ++m) {
                const int v = doc.sentences[s][m];
                if (a.b[static_cast<std::size_t>(d)][s][m]) {
                    const int t = a.t[static_cast<std::size_t>(d)][s][m];
                    ++c.at_f1(t, v);
                    ++c.f1_dot[static_cast<std::size_t>(t)];
                    ++c.at_f1_doc(d, t);
                    ++c.f1_doc_dot[static_cast<std::size_t>(d)];
                    ++c.fb[1];
                    ++c.nv[static_cast<std::size_t>(v)][1];
                } else {
                    ++c.at_f0(zds, v);
                    ++c.f0_dot[static_cast<std::size_t>(zds)];
                    ++c.fb[0];
                    ++c.nv[static_cast<std::size_t>(v)][0];
                }
            }
        }
    }
    return c;
}

// Random start: u uniform, upsilon from its prior at rho0 (uniform in the
// uniform_order variant), b ~ Bernoulli(1/2), t uniform where b = 1. The
// intent_only variant pins every b to 0.
inline ModelState init_state(const Corpus& corpus, const Hyperparameters& hyper, Rng& rng,
                             Permutation pi0 = {}) {
    hyper.validate();
    ModelState st;
    st.hyper = hyper;
    const int K = hyper.K, T = hyper.T, D = corpus.num_docs();
    if (pi0.empty()) pi0 = identity_permutation(K);
    if (static_cast<int>(pi0.size()) != K || !is_permutation_of_range(pi0))
        throw std::invalid_argument("init_state: pi0 must be a permutation of [0, K)");
    st.pi0 = std::move(pi0);

    const double rho_init = hyper.variant == Variant::uniform_order ? 0.0 : hyper.rho0;
    st.rho.assign(static_cast<std::size_t>(K > 0 ? K - 1 : 0), rho_init);

    auto& a = st.assign;
    a.u.resize(static_cast<std::size_t>(D));
    a.upsilon.resize(static_cast<std::size_t>(D));
    a.pi.resize(static_cast<std::size_t>(D));
    a.z.resize(static_cast<std::size_t>(D));
    a.b.resize(static_cast<std::size_t>(D));
    a.t.resize(static_cast<std::size_t>(D));
    a.fixed.assign(static_cast<std::size_t>(D), 0);

    Permutation ranks;
    for (int d = 0; d < D; ++d) {
        const auto& doc = corpus.documents[static_cast<std::size_t>(d)];
        const int nd = static_cast<int>(doc.sentences.size());
        auto& u = a.u[static_cast<std::size_t>(d)];
        u.resize(static_cast<std::size_t>(nd));
        for (auto& x : u) x = rng.uniform_int(K);
        a.upsilon[static_cast<std::size_t>(d)] = sample_inversion(st.rho, rng);
        inversion_to_permutation_into(a.upsilon[static_cast<std::size_t>(d)], K, ranks);
        a.pi[static_cast<std::size_t>(d)] = compose_permutations(st.pi0, ranks);
        a.z[static_cast<std::size_t>(d)] = compute_z(u, a.pi[static_cast<std::size_t>(d)]);

        auto& bd = a.b[static_cast<std::size_t>(d)];
        auto& td = a.t[static_cast<std::size_t>(d)];
        bd.resize(static_cast<std::size_t>(nd));
        td.resize(static_cast<std::size_t>(nd));
        for (int s = 0; s < nd; ++s) {
            const std::size_t len = doc.sentences[static_cast<std::size_t>(s)].size();
            bd[static_cast<std::size_t>(s)].resize(len);
            td[static_cast<std::size_t>(s)].resize(len);
            for (std::size_t m = 0; m < len; ++m) {
                const bool topic =
                    hyper.variant != Variant::intent_only && rng.bernoulli(0.5);
                bd[static_cast<std::size_t>(s)][m] = topic ? 1 : 0;
                td[static_cast<std::size_t>(s)][m] = topic ? rng.uniform_int(T) : -1;
            }
        }
    }
    st.counts = rebuild_counts(corpus, a, K, T);
    return st;
}

struct PointEstimates {
    int K = 0, T = 0, V = 0, D = 0;
    std::vector<double> intent_word;  // K*V
    std::vector<double> topic_word;   // T*V
    std::vector<double> doc_topic;    // D*T

    double intent_at(int k, int v) const { return intent_word[static_cast<std::size_t>(k) * V + v]; }
    double topic_at(int t, int v) const { return topic_word[static_cast<std::size_t>(t) * V + v]; }
    double doc_at(int d, int t) const { return doc_topic[static_cast<std::size_t>(d) * T + t]; }
};

inline PointEstimates point_estimates(const ModelState& st) {
    const auto& c = st.counts;
    const auto& h = st.hyper;
    PointEstimates pe;
    pe.K = c.K;
    pe.T = c.T;
    pe.V = c.V;
    pe.D = c.D;
    pe.intent_word.resize(c.f0.size());
    pe.topic_word.resize(c.f1.size());
    pe.doc_topic.resize(c.f1_doc.size());
    for (int k = 0; k < c.K; ++k) {
        const double denom = c.f0_dot[static_cast<std::size_t>(k)] + c.V * h.alpha0;
        for (int v = 0; v < c.V; ++v)
            pe.intent_word[static_cast<std::size_t>(k) * c.V + v] =
                (c.at_f0(k, v) + h.alpha0) / denom;
    }
    for (int t = 0; t < c.T; ++t) {
        const double denom = c.f1_dot[static_cast<std::size_t>(t)] + c.V * h.beta0;
        for (int v = 0; v < c.V; ++v)
            pe.topic_word[static_cast<std::size_t>(t) * c.V + v] =
                (c.at_f1(t, v) + h.beta0) / denom;
    }
    for (int d = 0; d < c.D; ++d) {
        const double denom = c.f1_doc_dot[static_cast<std::size_t>(d)] + c.T * h.theta0;
        for (int t = 0; t < c.T; ++t)
            pe.doc_topic[static_cast<std::size_t>(d) * c.T + t] =
                (c.at_f1_doc(d, t) + h.theta0) / denom;
    }
    return pe;
}

enum class WordType { intent, topic };

// A word is an intent word iff it occurs strictly more often as one; ties go
// to topic.
inline std::vector<WordType> classify_word_types(const ModelState& st) {
    std::vector<WordType> out(static_cast<std::size_t>(st.counts.V), WordType::topic);
    for (int v = 0; v < st.counts.V; ++v)
        if (st.counts.nv[static_cast<std::size_t>(v)][0] > st.counts.nv[static_cast<std::size_t>(v)][1])
            out[static_cast<std::size_t>(v)] = WordType::intent;
    return out;
}

namespace detail {

// log of the Dirichlet-multinomial marginal with symmetric concentration:
// Gamma(n*conc)/Gamma(n*conc + total) * prod_i Gamma(conc + cnt_i)/Gamma(conc)
inline double log_dirichlet_multinomial(const int* cnt, int n, double conc, std::int64_t total) {
    double lp = std::lgamma(n * conc) - std::lgamma(n * conc + static_cast<double>(total));
    const double lg0 = std::lgamma(conc);
    for (int i = 0; i < n; ++i)
        if (cnt[i] > 0) lp += std::lgamma(conc + cnt[i]) - lg0;
    return lp;
}

}  // namespace detail

// Unnormalized log of the collapsed joint over all latents and the data.
// Diagnostics only; the sampler never needs the global score.
inline double joint_log_score(const ModelState& st) {
    const auto& c = st.counts;
    const auto& h = st.hyper;
    double lp = 0.0;

    // intent order structure
    for (int d = 0; d < c.D; ++d)
        for (int k = 0; k + 1 < c.K; ++k)
            lp += gmm_log_pmf(st.assign.upsilon[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)],
                              st.rho[static_cast<std::size_t>(k)], k, c.K);
    if (h.variant != Variant::uniform_order) {
        const double nu0 = st.nu0();
        for (int k = 0; k + 1 < c.K; ++k)
            lp += gmm0_log_density(st.rho[static_cast<std::size_t>(k)],
                                   prior_inversion_mean(h.rho0, k, c.K), nu0, k, c.K);
    }

    // intent-label usage
    std::int64_t total_u = 0;
    for (int k = 0; k < c.K; ++k) total_u += c.fu[static_cast<std::size_t>(k)];
    lp += detail::log_dirichlet_multinomial(c.fu.data(), c.K, h.lambda0, total_u);

    // intent words per intent, topic words per topic, doc-topic tables
    for (int k = 0; k < c.K; ++k)
        lp += detail::log_dirichlet_multinomial(&c.f0[static_cast<std::size_t>(k) * c.V], c.V,
                                                h.alpha0, c.f0_dot[static_cast<std::size_t>(k)]);
    for (int t = 0; t < c.T; ++t)
        lp += detail::log_dirichlet_multinomial(&c.f1[static_cast<std::size_t>(t) * c.V], c.V,
                                                h.beta0, c.f1_dot[static_cast<std::size_t>(t)]);
    for (int d = 0; d < c.D; ++d)
        lp += detail::log_dirichlet_multinomial(&c.f1_doc[static_cast<std::size_t>(d) * c.T], c.T,
                                                h.theta0, c.f1_doc_dot[static_cast<std::size_t>(d)]);

    // Beta-Bernoulli over word types
    lp += std::lgamma(2.0 * h.gamma0) - std::lgamma(2.0 * h.gamma0 + c.fb[0] + c.fb[1]) +
          std::lgamma(h.gamma0 + c.fb[0]) - std::lgamma(h.gamma0) +
          std::lgamma(h.gamma0 + c.fb[1]) - std::lgamma(h.gamma0);
    return lp;
}

struct GenSizes {
    int docs = 0;
    double mean_sentences = 8.0;
    double mean_tokens = 10.0;
    int vocab = 0;
};

struct Generated {
    Corpus corpus;
    Assignments truth;
    Dispersion rho;
    double topic_prob = 0.0;  // sampled Bernoulli parameter (P(b = 1))
};

namespace detail {

inline std::string synth_word(int v) {
    std::string s(3, 'a');
    for (int i = 0; i < 3; ++i) {
        s[static_cast<std::size_t>(i)] = static_cast<char>('a' + v % 26);
        v /= 26;
    }
    return s;
}

inline std::string synth_label(int k) {
    std::string num = std::to_string(k + 1);
    if (num.size() < 2) num.insert(num.begin(), '0');
    return "intent_" + num;
}

}  // namespace detail

// Forward simulation of the generative process; returns the corpus with true
// intents attached as sentence labels plus the full ground-truth latents.
// `fixed_topic_prob` replaces the Beta draw for degenerate-case tests.
inline Generated forward_generate(const Hyperparameters& hyper, const GenSizes& sizes, Rng& rng,
                                  double fixed_topic_prob = -1.0) {
    hyper.validate();
    if (sizes.docs < 1 || sizes.vocab < 1)
        throw std::invalid_argument("forward_generate: docs and vocab must be >= 1");
    const int K = hyper.K, T = hyper.T, V = sizes.vocab, D = sizes.docs;
    const double nu0 = hyper.nu0_scale * D;

    Generated gen;
    gen.topic_prob = fixed_topic_prob >= 0.0 ? fixed_topic_prob : rng.beta(hyper.gamma0, hyper.gamma0);
    if (hyper.variant == Variant::intent_only) gen.topic_prob = 0.0;

    const std::vector<double> lambda = rng.dirichlet(hyper.lambda0, K);
    gen.rho.assign(static_cast<std::size_t>(K > 0 ? K - 1 : 0), 0.0);
    if (hyper.variant != Variant::uniform_order) {
        for (int k = 0; k + 1 < K; ++k) {
            const double v0 = prior_inversion_mean(hyper.rho0, k, K);
            double r = hyper.rho0;
            for (int it = 0; it < 64; ++it) r = slice_sample_rho(r, v0, nu0, k, K, rng);
            gen.rho[static_cast<std::size_t>(k)] = r;
        }
    }

    std::vector<std::vector<double>> alpha(static_cast<std::size_t>(K));
    for (auto& a : alpha) a = rng.dirichlet(hyper.alpha0, V);
    std::vector<std::vector<double>> beta(static_cast<std::size_t>(T));
    for (auto& b : beta) b = rng.dirichlet(hyper.beta0, V);

    Corpus& corpus = gen.corpus;
    for (int v = 0; v < V; ++v) corpus.vocab.add(detail::synth_word(v));
    for (int k = 0; k < K; ++k) corpus.label_names.push_back(detail::synth_label(k));

    auto& a = gen.truth;
    a.u.resize(static_cast<std::size_t>(D));
    a.upsilon.resize(static_cast<std::size_t>(D));
    a.pi.resize(static_cast<std::size_t>(D));
    a.z.resize(static_cast<std::size_t>(D));
    a.b.resize(static_cast<std::size_t>(D));
    a.t.resize(static_cast<std::size_t>(D));
    a.fixed.assign(static_cast<std::size_t>(D), 0);

    Permutation ranks;
    for (int d = 0; d < D; ++d) {
        IndexedDocument doc;
        doc.id = "doc" + std::to_string(d);
        const int nd = std::max(1, rng.poisson(sizes.mean_sentences));
        const std::vector<double> theta = rng.dirichlet(hyper.theta0, T);

        auto& u = a.u[static_cast<std::size_t>(d)];
        u.resize(static_cast<std::size_t>(nd));
        for (auto& x : u) x = rng.categorical(lambda);
        a.upsilon[static_cast<std::size_t>(d)] = sample_inversion(gen.rho, rng);
        inversion_to_permutation_into(a.upsilon[static_cast<std::size_t>(d)], K, ranks);
        a.pi[static_cast<std::size_t>(d)] = ranks;  // canonical ordering is the identity here
        a.z[static_cast<std::size_t>(d)] = compute_z(u, a.pi[static_cast<std::size_t>(d)]);

        auto& bd = a.b[static_cast<std::size_t>(d)];
        auto& td = a.t[static_cast<std::size_t>(d)];
        bd.resize(static_cast<std::size_t>(nd));
        td.resize(static_cast<std::size_t>(nd));
        for (int s = 0; s < nd; ++s) {
            const int zds = a.z[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
            const int len = std::max(1, rng.poisson(sizes.mean_tokens));
            std::vector<int> sent(static_cast<std::size_t>(len));
            bd[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(len));
            td[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(len));
            for (int m = 0; m < len; ++m) {
                const bool topic = rng.bernoulli(gen.topic_prob);
                bd[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)] = topic ? 1 : 0;
                if (topic) {
                    const int t = rng.categorical(theta);
                    td[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)] = t;
                    sent[static_cast<std::size_t>(m)] = rng.categorical(beta[static_cast<std::size_t>(t)]);
                } else {
                    td[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)] = -1;
                    sent[static_cast<std::size_t>(m)] =
                        rng.categorical(alpha[static_cast<std::size_t>(zds)]);
                }
            }
            doc.sentences.push_back(std::move(sent));
            doc.labels.push_back(zds);
        }
        corpus.documents.push_back(std::move(doc));
    }
    return gen;
}

}  // namespace gmmlda
