#pragma once

/*
 * Collapsed Gibbs sampler. One sweep resamples, in fixed order:
 *
 *   u[d][s]      for unlocked docs   K-way conditional: (fu^{-ds} + lambda0)
 *                                    times the doc's intent-word likelihood
 *                                    under the candidate z
 *   rho[k]                           slice transition on the GMM_0 posterior
 *                                    with mean (sum_d ups[d][k] + v0*nu0)/(D+nu0)
 *                                    and weight D+nu0
 *   upsilon[d][k] for unlocked docs  (K-k)-way conditional: GMM_k prior times
 *                                    the same doc likelihood
 *   (b, t)[d][s][m]                  T+1 outcomes; entropic variant reweights
 *                                    each by exp(-c * H_v(outcome))
 *
 * The doc likelihood folds document d's intent tokens back into the
 * doc-removed f0 tables one token at a time, which telescopes to the
 * Gamma-ratio form of the collapsed conditional.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmmlda/corpus.hpp"
#include "gmmlda/model.hpp"
#include "gmmlda/permutation.hpp"
#include "gmmlda/rng.hpp"

namespace gmmlda {

enum class PredictionRule { last_sample, mode_over_tail };

struct GibbsConfig {
    int iterations = 2000;
    std::uint64_t seed = 1;
    int report_every = 100;
    PredictionRule prediction = PredictionRule::last_sample;
    int tail_n = 100;
    int check_every = 0;        // rebuild-and-compare counts every N sweeps (0 = off)
    bool strict_checks = false; // per-move distribution/coherence assertions
};

struct DiagRow {
    int iteration = 0;
    double joint_log_score = 0.0;
    double intent_fraction = 0.0;
    double mean_rho = 0.0;
};

using ChainDiagnostics = std::vector<DiagRow>;

struct GibbsResult {
    ChainDiagnostics diagnostics;
    std::vector<std::vector<int>> predictions;  // [d][s] intent ids
};

// Word-type entropy from the two occurrence counts, in nats; 0*log0 = 0.
inline double word_entropy(std::int64_t nv0, std::int64_t nv1) {
    const std::int64_t n = nv0 + nv1;
    if (n <= 0) throw std::invalid_argument("word_entropy: empty counts");
    double h = 0.0;
    for (std::int64_t c : {nv0, nv1}) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

class GibbsSampler {
public:
    GibbsSampler(const Corpus& corpus, ModelState& state, Rng& rng)
        : corpus_(corpus), st_(state), rng_(rng) {
        K_ = st_.hyper.K;
        T_ = st_.hyper.T;
        V_ = st_.counts.V;
        D_ = st_.counts.D;
        if (corpus.num_docs() != D_ || corpus.vocab.size() != V_)
            throw std::invalid_argument("sampler: state does not match corpus");
        scnt_.assign(static_cast<std::size_t>(K_) * V_, 0);
        sdot_.assign(static_cast<std::size_t>(K_), 0);
        ucnt_.assign(static_cast<std::size_t>(K_), 0);
        logw_.resize(static_cast<std::size_t>(std::max(K_, T_ + 1)));
        w_.resize(logw_.size());
        pick_.resize(logw_.size());
        if (static_cast<int>(st_.pi0.size()) != K_ || !is_permutation_of_range(st_.pi0))
            throw std::invalid_argument("sampler: state pi0 is not a permutation of [0, K)");
    }

    void set_strict_checks(bool on) { strict_ = on; }

    // --- conditional weights (exposed for verification) -------------------

    // Unnormalized log-weights of u[d][s] = x for x in [0, K). Leaves the
    // state untouched.
    void u_log_weights(int d, int s, std::vector<double>& out) {
        require_unlocked(d);
        out.resize(static_cast<std::size_t>(K_));
        begin_u_move(d, s);
        for (int x = 0; x < K_; ++x) out[static_cast<std::size_t>(x)] = u_candidate(d, s, x);
        abort_u_move(d, s);
    }

    // Unnormalized log-weights of upsilon[d][k] = v for v in [0, K-k).
    void upsilon_log_weights(int d, int k, std::vector<double>& out) {
        require_unlocked(d);
        const int n = gmm_support_size(k, K_);
        out.resize(static_cast<std::size_t>(n));
        begin_upsilon_move(d);
        const int old = st_.assign.upsilon[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)];
        for (int v = 0; v < n; ++v) out[static_cast<std::size_t>(v)] = upsilon_candidate(d, k, v);
        st_.assign.upsilon[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)] = old;
        abort_upsilon_move(d);
    }

    // Unnormalized linear-space weights of the T+1 (b, t) outcomes for token
    // (d, s, m): index 0 is b=0, index 1+t is (b=1, t). Leaves state untouched.
    void bt_weights(int d, int s, int m, std::vector<double>& out) {
        remove_token(d, s, m);
        bt_weights_removed(d, s, m, out);
        restore_token(d, s, m);
    }

    // Same with every outcome reweighted by exp(-c * H_v(outcome)).
    void bt_weights_entropic(int d, int s, int m, double c, std::vector<double>& out) {
        remove_token(d, s, m);
        bt_weights_removed(d, s, m, out);
        apply_entropic(d, s, m, c, out);
        restore_token(d, s, m);
    }

    // --- moves -------------------------------------------------------------

    void resample_u(int d, int s) {
        require_unlocked(d);
        begin_u_move(d, s);
        for (int x = 0; x < K_; ++x) logw_[static_cast<std::size_t>(x)] = u_candidate(d, s, x);
        if (strict_) check_log_weights(K_);
        const int x = rng_.categorical_log(logw_, pick_, K_);
        commit_u_move(d, s, x);
    }

    void resample_upsilon(int d, int k) {
        require_unlocked(d);
        begin_upsilon_move(d);
        const int n = gmm_support_size(k, K_);
        for (int v = 0; v < n; ++v) logw_[static_cast<std::size_t>(v)] = upsilon_candidate(d, k, v);
        if (strict_) {
            check_log_weights(n);
            if (st_.rho[static_cast<std::size_t>(k)] == 0.0) check_uniform_prior(k, n);
        }
        const int v = rng_.categorical_log(logw_, pick_, n);
        commit_upsilon_move(d, k, v);
    }

    void resample_rho() {
        if (st_.hyper.variant == Variant::uniform_order) return;  // rho pinned at zero
        const double nu0 = st_.nu0();
        const double nu = D_ + nu0;
        for (int k = 0; k + 1 < K_; ++k) {
            std::int64_t sum = 0;
            for (int d = 0; d < D_; ++d)
                sum += st_.assign.upsilon[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)];
            const double v0 = prior_inversion_mean(st_.hyper.rho0, k, K_);
            const double v_mean = (static_cast<double>(sum) + v0 * nu0) / nu;
            st_.rho[static_cast<std::size_t>(k)] =
                slice_sample_rho(st_.rho[static_cast<std::size_t>(k)], v_mean, nu, k, K_, rng_);
        }
    }

    void resample_bt(int d, int s, int m) {
        remove_token(d, s, m);
        bt_weights_removed(d, s, m, w_);
        if (st_.hyper.c > 0.0) apply_entropic(d, s, m, st_.hyper.c, w_);
        if (strict_) check_linear_weights(T_ + 1);
        const int pick = rng_.categorical(w_, T_ + 1);
        auto& b = st_.assign.b[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        auto& t = st_.assign.t[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        if (pick == 0) {
            b = 0;
            t = -1;
        } else {
            b = 1;
            t = pick - 1;
        }
        restore_token(d, s, m);
    }

    void sweep() {
        for (int d = 0; d < D_; ++d) {
            if (st_.assign.fixed[static_cast<std::size_t>(d)]) continue;
            const int nd = static_cast<int>(corpus_.documents[static_cast<std::size_t>(d)].sentences.size());
            for (int s = 0; s < nd; ++s) resample_u(d, s);
        }
        if (st_.hyper.variant != Variant::uniform_order) resample_rho();
        for (int d = 0; d < D_; ++d) {
            if (st_.assign.fixed[static_cast<std::size_t>(d)]) continue;
            for (int k = 0; k + 1 < K_; ++k) resample_upsilon(d, k);
        }
        if (st_.hyper.variant != Variant::intent_only) {
            for (int d = 0; d < D_; ++d) {
                const auto& doc = corpus_.documents[static_cast<std::size_t>(d)];
                for (int s = 0; s < static_cast<int>(doc.sentences.size()); ++s)
                    for (int m = 0; m < static_cast<int>(doc.sentences[static_cast<std::size_t>(s)].size()); ++m)
                        resample_bt(d, s, m);
            }
        }
    }

    GibbsResult run(const GibbsConfig& cfg) {
        if (cfg.iterations < 1) throw std::invalid_argument("run: iterations must be >= 1");
        if (cfg.prediction == PredictionRule::mode_over_tail &&
            (cfg.tail_n < 1 || cfg.tail_n > cfg.iterations))
            throw std::invalid_argument("run: tail_n must be in [1, iterations]");
        strict_ = strict_ || cfg.strict_checks;
        GibbsResult res;

        std::vector<std::vector<std::vector<int>>> tail_counts;
        if (cfg.prediction == PredictionRule::mode_over_tail) {
            tail_counts.resize(static_cast<std::size_t>(D_));
            for (int d = 0; d < D_; ++d)
                tail_counts[static_cast<std::size_t>(d)].assign(
                    corpus_.documents[static_cast<std::size_t>(d)].sentences.size(),
                    std::vector<int>(static_cast<std::size_t>(K_), 0));
        }

        for (int it = 1; it <= cfg.iterations; ++it) {
            sweep();
            if (cfg.check_every > 0 && it % cfg.check_every == 0) verify_counts();
            if (cfg.prediction == PredictionRule::mode_over_tail &&
                it > cfg.iterations - cfg.tail_n) {
                for (int d = 0; d < D_; ++d) {
                    const auto& zd = st_.assign.z[static_cast<std::size_t>(d)];
                    for (std::size_t s = 0; s < zd.size(); ++s)
                        ++tail_counts[static_cast<std::size_t>(d)][s][static_cast<std::size_t>(zd[s])];
                }
            }
            if ((cfg.report_every > 0 && it % cfg.report_every == 0) || it == cfg.iterations) {
                DiagRow row;
                row.iteration = it;
                row.joint_log_score = joint_log_score(st_);
                const std::int64_t total = st_.counts.fb[0] + st_.counts.fb[1];
                row.intent_fraction =
                    total > 0 ? static_cast<double>(st_.counts.fb[0]) / static_cast<double>(total) : 0.0;
                double mr = 0.0;
                for (double r : st_.rho) mr += r;
                row.mean_rho = st_.rho.empty() ? 0.0 : mr / static_cast<double>(st_.rho.size());
                res.diagnostics.push_back(row);
            }
        }

        if (cfg.prediction == PredictionRule::mode_over_tail) {
            res.predictions.resize(static_cast<std::size_t>(D_));
            for (int d = 0; d < D_; ++d) {
                const auto& cnt = tail_counts[static_cast<std::size_t>(d)];
                auto& pd = res.predictions[static_cast<std::size_t>(d)];
                pd.resize(cnt.size());
                for (std::size_t s = 0; s < cnt.size(); ++s) {
                    int best = 0;
                    for (int k = 1; k < K_; ++k)
                        if (cnt[s][static_cast<std::size_t>(k)] > cnt[s][static_cast<std::size_t>(best)])
                            best = k;
                    pd[s] = best;
                }
            }
        } else {
            res.predictions = st_.assign.z;
        }
        return res;
    }

    void verify_counts() const {
        const CountTables fresh = rebuild_counts(corpus_, st_.assign, K_, T_);
        if (!(fresh == st_.counts))
            throw std::logic_error("sampler: incremental counts diverged from rebuild");
    }

private:
    void require_unlocked(int d) const {
        if (st_.assign.fixed[static_cast<std::size_t>(d)])
            throw std::invalid_argument("sampler: document is label-locked");
    }

    // --- f0 bookkeeping for whole-document candidate evaluation ------------

    void remove_doc_intent(int d) {
        const auto& doc = corpus_.documents[static_cast<std::size_t>(d)];
        const auto& zd = st_.assign.z[static_cast<std::size_t>(d)];
        const auto& bd = st_.assign.b[static_cast<std::size_t>(d)];
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            const int k = zd[s];
            for (std::size_t m = 0; m < doc.sentences[s].size(); ++m) {
                if (bd[s][m]) continue;
                --st_.counts.at_f0(k, doc.sentences[s][m]);
                --st_.counts.f0_dot[static_cast<std::size_t>(k)];
            }
        }
    }

    void add_doc_intent(int d) {
        const auto& doc = corpus_.documents[static_cast<std::size_t>(d)];
        const auto& zd = st_.assign.z[static_cast<std::size_t>(d)];
        const auto& bd = st_.assign.b[static_cast<std::size_t>(d)];
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            const int k = zd[s];
            for (std::size_t m = 0; m < doc.sentences[s].size(); ++m) {
                if (bd[s][m]) continue;
                ++st_.counts.at_f0(k, doc.sentences[s][m]);
                ++st_.counts.f0_dot[static_cast<std::size_t>(k)];
            }
        }
    }

    // log-likelihood of doc d's intent tokens under candidate labels z, given
    // the doc-removed f0 tables; telescoped Gamma-ratio form.
    double doc_intent_loglik(int d, const std::vector<int>& z) {
        const auto& doc = corpus_.documents[static_cast<std::size_t>(d)];
        const auto& bd = st_.assign.b[static_cast<std::size_t>(d)];
        const double a0 = st_.hyper.alpha0;
        const double va0 = V_ * st_.hyper.alpha0;
        double ll = 0.0;
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            const int k = z[s];
            const std::size_t row = static_cast<std::size_t>(k) * V_;
            for (std::size_t m = 0; m < doc.sentences[s].size(); ++m) {
                if (bd[s][m]) continue;
                const std::size_t idx = row + static_cast<std::size_t>(doc.sentences[s][m]);
                ll += std::log(a0 + st_.counts.f0[idx] + scnt_[idx]) -
                      std::log(va0 + st_.counts.f0_dot[static_cast<std::size_t>(k)] +
                               sdot_[static_cast<std::size_t>(k)]);
                if (scnt_[idx]++ == 0) touched_.push_back(static_cast<int>(idx));
                ++sdot_[static_cast<std::size_t>(k)];
            }
        }
        for (int idx : touched_) scnt_[static_cast<std::size_t>(idx)] = 0;
        touched_.clear();
        std::fill(sdot_.begin(), sdot_.end(), 0);
        return ll;
    }

    // --- u move -------------------------------------------------------------

    void begin_u_move(int d, int s) {
        const auto& u = st_.assign.u[static_cast<std::size_t>(d)];
        std::fill(ucnt_.begin(), ucnt_.end(), 0);
        for (int x : u) ++ucnt_[static_cast<std::size_t>(x)];
        --ucnt_[static_cast<std::size_t>(u[static_cast<std::size_t>(s)])];
        --st_.counts.fu[static_cast<std::size_t>(u[static_cast<std::size_t>(s)])];
        remove_doc_intent(d);
    }

    double u_candidate(int d, int s, int x) {
        (void)s;
        ++ucnt_[static_cast<std::size_t>(x)];
        compute_z_from_counts(ucnt_, st_.assign.pi[static_cast<std::size_t>(d)], zcand_);
        const double ll = std::log(st_.hyper.lambda0 + st_.counts.fu[static_cast<std::size_t>(x)]) +
                          doc_intent_loglik(d, zcand_);
        --ucnt_[static_cast<std::size_t>(x)];
        return ll;
    }

    void commit_u_move(int d, int s, int x) {
        auto& u = st_.assign.u[static_cast<std::size_t>(d)];
        u[static_cast<std::size_t>(s)] = x;
        ++st_.counts.fu[static_cast<std::size_t>(x)];
        ++ucnt_[static_cast<std::size_t>(x)];
        compute_z_from_counts(ucnt_, st_.assign.pi[static_cast<std::size_t>(d)],
                              st_.assign.z[static_cast<std::size_t>(d)]);
        add_doc_intent(d);
        if (strict_) check_coherent(st_.assign.z[static_cast<std::size_t>(d)]);
    }

    void abort_u_move(int d, int s) {
        const auto& u = st_.assign.u[static_cast<std::size_t>(d)];
        ++st_.counts.fu[static_cast<std::size_t>(u[static_cast<std::size_t>(s)])];
        add_doc_intent(d);
    }

    // --- upsilon move ---------------------------------------------------------

    void begin_upsilon_move(int d) {
        const auto& u = st_.assign.u[static_cast<std::size_t>(d)];
        std::fill(ucnt_.begin(), ucnt_.end(), 0);
        for (int x : u) ++ucnt_[static_cast<std::size_t>(x)];
        remove_doc_intent(d);
    }

    double upsilon_candidate(int d, int k, int v) {
        auto& ups = st_.assign.upsilon[static_cast<std::size_t>(d)];
        ups[static_cast<std::size_t>(k)] = v;
        inversion_to_permutation_into(ups, K_, rankbuf_);
        permbuf_.resize(static_cast<std::size_t>(K_));
        for (int i = 0; i < K_; ++i)
            permbuf_[static_cast<std::size_t>(i)] =
                st_.pi0[static_cast<std::size_t>(rankbuf_[static_cast<std::size_t>(i)])];
        compute_z_from_counts(ucnt_, permbuf_, zcand_);
        return gmm_log_pmf(v, st_.rho[static_cast<std::size_t>(k)], k, K_) +
               doc_intent_loglik(d, zcand_);
    }

    void commit_upsilon_move(int d, int k, int v) {
        auto& ups = st_.assign.upsilon[static_cast<std::size_t>(d)];
        ups[static_cast<std::size_t>(k)] = v;
        inversion_to_permutation_into(ups, K_, rankbuf_);
        auto& pi = st_.assign.pi[static_cast<std::size_t>(d)];
        pi.resize(static_cast<std::size_t>(K_));
        for (int i = 0; i < K_; ++i)
            pi[static_cast<std::size_t>(i)] =
                st_.pi0[static_cast<std::size_t>(rankbuf_[static_cast<std::size_t>(i)])];
        compute_z_from_counts(ucnt_, pi, st_.assign.z[static_cast<std::size_t>(d)]);
        add_doc_intent(d);
        if (strict_) check_coherent(st_.assign.z[static_cast<std::size_t>(d)]);
    }

    void abort_upsilon_move(int d) {
        auto& ups = st_.assign.upsilon[static_cast<std::size_t>(d)];
        inversion_to_permutation_into(ups, K_, rankbuf_);
        auto& pi = st_.assign.pi[static_cast<std::size_t>(d)];
        for (int i = 0; i < K_; ++i)
            pi[static_cast<std::size_t>(i)] =
                st_.pi0[static_cast<std::size_t>(rankbuf_[static_cast<std::size_t>(i)])];
        compute_z_from_counts(ucnt_, pi, st_.assign.z[static_cast<std::size_t>(d)]);
        add_doc_intent(d);
    }

    // --- (b, t) move ----------------------------------------------------------

    void remove_token(int d, int s, int m) {
        const int v = corpus_.documents[static_cast<std::size_t>(d)]
                          .sentences[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        const auto b = st_.assign.b[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        auto& c = st_.counts;
        if (b) {
            const int t = st_.assign.t[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
            --c.at_f1(t, v);
            --c.f1_dot[static_cast<std::size_t>(t)];
            --c.at_f1_doc(d, t);
            --c.f1_doc_dot[static_cast<std::size_t>(d)];
            --c.fb[1];
            --c.nv[static_cast<std::size_t>(v)][1];
        } else {
            const int k = st_.assign.z[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
            --c.at_f0(k, v);
            --c.f0_dot[static_cast<std::size_t>(k)];
            --c.fb[0];
            --c.nv[static_cast<std::size_t>(v)][0];
        }
    }

    void restore_token(int d, int s, int m) {
        const int v = corpus_.documents[static_cast<std::size_t>(d)]
                          .sentences[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        const auto b = st_.assign.b[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        auto& c = st_.counts;
        if (b) {
            const int t = st_.assign.t[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
            ++c.at_f1(t, v);
            ++c.f1_dot[static_cast<std::size_t>(t)];
            ++c.at_f1_doc(d, t);
            ++c.f1_doc_dot[static_cast<std::size_t>(d)];
            ++c.fb[1];
            ++c.nv[static_cast<std::size_t>(v)][1];
        } else {
            const int k = st_.assign.z[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
            ++c.at_f0(k, v);
            ++c.f0_dot[static_cast<std::size_t>(k)];
            ++c.fb[0];
            ++c.nv[static_cast<std::size_t>(v)][0];
        }
    }

    // weights with token (d,s,m) excluded from all tables
    void bt_weights_removed(int d, int s, int m, std::vector<double>& out) {
        const int v = corpus_.documents[static_cast<std::size_t>(d)]
                          .sentences[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        const int zds = st_.assign.z[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
        const auto& c = st_.counts;
        const auto& h = st_.hyper;
        out.resize(static_cast<std::size_t>(T_) + 1);
        out[0] = (static_cast<double>(c.fb[0]) + h.gamma0) * (c.at_f0(zds, v) + h.alpha0) /
                 (c.f0_dot[static_cast<std::size_t>(zds)] + V_ * h.alpha0);
        const double topic_base = static_cast<double>(c.fb[1]) + h.gamma0;
        const double doc_denom = c.f1_doc_dot[static_cast<std::size_t>(d)] + T_ * h.theta0;
        for (int t = 0; t < T_; ++t) {
            out[static_cast<std::size_t>(t) + 1] =
                topic_base * (c.at_f1(t, v) + h.beta0) /
                (c.f1_dot[static_cast<std::size_t>(t)] + V_ * h.beta0) *
                (c.at_f1_doc(d, t) + h.theta0) / doc_denom;
        }
    }

    void apply_entropic(int d, int s, int m, double c, std::vector<double>& out) {
        const int v = corpus_.documents[static_cast<std::size_t>(d)]
                          .sentences[static_cast<std::size_t>(s)][static_cast<std::size_t>(m)];
        const auto& nv = st_.counts.nv[static_cast<std::size_t>(v)];
        const double h_intent = word_entropy(nv[0] + 1, nv[1]);
        const double h_topic = word_entropy(nv[0], nv[1] + 1);
        out[0] *= std::exp(-c * h_intent);
        const double topic_factor = std::exp(-c * h_topic);
        for (int t = 0; t < T_; ++t) out[static_cast<std::size_t>(t) + 1] *= topic_factor;
    }

    // --- strict-mode checks ---------------------------------------------------

    void check_log_weights(int n) const {
        for (int i = 0; i < n; ++i)
            if (std::isnan(logw_[static_cast<std::size_t>(i)]) ||
                logw_[static_cast<std::size_t>(i)] == std::numeric_limits<double>::infinity())
                throw std::logic_error("sampler: invalid log-weight");
    }

    void check_linear_weights(int n) const {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = w_[static_cast<std::size_t>(i)];
            if (!(w >= 0.0) || !std::isfinite(w))
                throw std::logic_error("sampler: invalid weight");
            total += w;
        }
        if (!(total > 0.0)) throw std::logic_error("sampler: all-zero weight vector");
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += w_[static_cast<std::size_t>(i)] / total;
        if (std::abs(norm - 1.0) > 1e-12)
            throw std::logic_error("sampler: normalization drift");
    }

    void check_uniform_prior(int k, int n) const {
        const double expect = -std::log(static_cast<double>(n));
        const double got = gmm_log_pmf(0, st_.rho[static_cast<std::size_t>(k)], k, K_);
        if (got != expect)
            throw std::logic_error("sampler: uniform_order prior is not uniform");
        for (int v = 1; v < n; ++v)
            if (gmm_log_pmf(v, st_.rho[static_cast<std::size_t>(k)], k, K_) != expect)
                throw std::logic_error("sampler: uniform_order prior is not uniform");
    }

    static void check_coherent(const std::vector<int>& z) {
        std::vector<int> seen;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (i > 0 && z[i] == z[i - 1]) continue;
            for (int k : seen)
                if (k == z[i]) throw std::logic_error("sampler: z lost label coherence");
            seen.push_back(z[i]);
        }
    }

    const Corpus& corpus_;
    ModelState& st_;
    Rng& rng_;
    int K_ = 0, T_ = 0, V_ = 0, D_ = 0;
    bool strict_ = false;

    std::vector<double> logw_, w_, pick_;
    std::vector<int> ucnt_;
    std::vector<int> zcand_;
    std::vector<int> scnt_, sdot_;
    std::vector<int> touched_;
    Permutation rankbuf_, permbuf_;
};

// Convenience wrapper matching the one-shot interface.
inline GibbsResult run_gibbs(const Corpus& corpus, ModelState& state, const GibbsConfig& cfg,
                             Rng& rng) {
    GibbsSampler sampler(corpus, state, rng);
    return sampler.run(cfg);
}

}  // namespace gmmlda
