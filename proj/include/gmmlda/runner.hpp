#pragma once

#include <cstdint>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include "gmmlda/eval.hpp"
#include "gmmlda/model.hpp"
#include "gmmlda/sampler.hpp"
#include "gmmlda/supervised.hpp"

namespace gmmlda {

struct TrainSpec {
    Hyperparameters hyper;
    GibbsConfig gibbs;
    std::vector<int> locked_docs;  // empty = unsupervised
};

struct SeedRun {
    std::uint64_t seed = 0;
    ModelState state;
    GibbsResult result;
};

// One full chain: pi0 derivation (supervised), random init, label locking,
// then the configured number of sweeps. All randomness flows from `seed`.
inline SeedRun train_one(const Corpus& corpus, const TrainSpec& spec, std::uint64_t seed) {
    SeedRun run;
    run.seed = seed;
    Rng rng(seed);

    Permutation pi0 = identity_permutation(spec.hyper.K);
    if (!spec.locked_docs.empty()) {
        std::vector<std::vector<int>> label_seqs;
        label_seqs.reserve(spec.locked_docs.size());
        for (int d : spec.locked_docs) {
            const auto& doc = corpus.documents.at(static_cast<std::size_t>(d));
            if (doc.labels.empty())
                throw std::invalid_argument("train: locked document has no labels: " + doc.id);
            label_seqs.push_back(doc.labels);
        }
        pi0 = derive_canonical(label_seqs, spec.hyper.K, rng);
    }

    run.state = init_state(corpus, spec.hyper, rng, pi0);
    if (!spec.locked_docs.empty()) lock_labeled(run.state, corpus, spec.locked_docs);

    GibbsConfig cfg = spec.gibbs;
    cfg.seed = seed;
    run.result = run_gibbs(corpus, run.state, cfg, rng);
    return run;
}

// Independent chains, at most `jobs` in flight (0 = hardware concurrency).
// Worker exceptions are captured and rethrown on the caller's thread.
inline std::vector<SeedRun> train_many(const Corpus& corpus, const TrainSpec& spec,
                                       const std::vector<std::uint64_t>& seeds, int jobs = 0) {
    if (seeds.empty()) throw std::invalid_argument("train: need at least one seed");
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;

    std::vector<SeedRun> runs(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::size_t next = 0;
    while (next < seeds.size()) {
        std::vector<std::thread> batch;
        const std::size_t end = std::min(seeds.size(), next + static_cast<std::size_t>(jobs));
        for (std::size_t i = next; i < end; ++i)
            batch.emplace_back([&, i] {
                try {
                    runs[i] = train_one(corpus, spec, seeds[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        for (auto& th : batch) th.join();
        next = end;
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return runs;
}

// Documents that enter scoring: labeled and not excluded (the supervised
// training split is excluded from its own evaluation).
inline std::vector<int> eval_doc_set(const Corpus& corpus, const std::vector<int>& exclude = {}) {
    std::unordered_set<int> skip(exclude.begin(), exclude.end());
    std::vector<int> docs;
    for (int d = 0; d < corpus.num_docs(); ++d)
        if (!skip.count(d) && corpus.has_labels(d)) docs.push_back(d);
    if (docs.empty()) throw std::invalid_argument("eval: no labeled documents to score");
    return docs;
}

inline std::vector<int> flatten_truth(const Corpus& corpus, const std::vector<int>& docs) {
    std::vector<int> out;
    for (int d : docs) {
        const auto& doc = corpus.documents.at(static_cast<std::size_t>(d));
        out.insert(out.end(), doc.labels.begin(), doc.labels.end());
    }
    return out;
}

inline std::vector<int> flatten_predictions(const GibbsResult& res, const std::vector<int>& docs) {
    std::vector<int> out;
    for (int d : docs) {
        const auto& pd = res.predictions.at(static_cast<std::size_t>(d));
        out.insert(out.end(), pd.begin(), pd.end());
    }
    return out;
}

inline MetricsReport evaluate_runs(const Corpus& corpus, const std::vector<SeedRun>& runs,
                                   const std::vector<int>& exclude = {}, bool with_accuracy = false) {
    const std::vector<int> docs = eval_doc_set(corpus, exclude);
    const std::vector<int> truth = flatten_truth(corpus, docs);
    MetricsReport report;
    for (const auto& run : runs) {
        const std::vector<int> pred = flatten_predictions(run.result, docs);
        if (pred.size() != truth.size())
            throw std::invalid_argument("eval: prediction/truth length mismatch");
        report.runs.push_back(compute_run_metrics(run.seed, pred, truth, with_accuracy));
    }
    report.mean = mean_metrics(report.runs);
    return report;
}

}  // namespace gmmlda
