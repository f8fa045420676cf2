#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace gmmlda {

// Unordered-pair agreement counts between a predicted clustering and a truth
// labeling, built from the contingency table.
struct PairCounts {
    std::int64_t both = 0;         // co-clustered in pred and co-labeled in truth
    std::int64_t pred_pairs = 0;   // co-clustered in pred
    std::int64_t truth_pairs = 0;  // co-labeled in truth
    std::int64_t total = 0;        // n choose 2
};

namespace detail {

inline std::int64_t choose2(std::int64_t n) { return n * (n - 1) / 2; }

inline std::vector<int> dense_ids(const std::vector<int>& labels) {
    std::vector<int> uniq = labels;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), labels[i]) -
                                  uniq.begin());
    return out;
}

}  // namespace detail

inline PairCounts pair_counts(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("pair_counts: length mismatch");
    if (pred.size() < 2) throw std::invalid_argument("pair_counts: need at least 2 elements");
    const std::vector<int> p = detail::dense_ids(pred);
    const std::vector<int> t = detail::dense_ids(truth);
    const int np = *std::max_element(p.begin(), p.end()) + 1;
    const int nt = *std::max_element(t.begin(), t.end()) + 1;

    std::vector<std::int64_t> cont(static_cast<std::size_t>(np) * nt, 0);
    std::vector<std::int64_t> rows(static_cast<std::size_t>(np), 0);
    std::vector<std::int64_t> cols(static_cast<std::size_t>(nt), 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        ++cont[static_cast<std::size_t>(p[i]) * nt + static_cast<std::size_t>(t[i])];
        ++rows[static_cast<std::size_t>(p[i])];
        ++cols[static_cast<std::size_t>(t[i])];
    }

    PairCounts pc;
    for (std::int64_t c : cont) pc.both += detail::choose2(c);
    for (std::int64_t r : rows) pc.pred_pairs += detail::choose2(r);
    for (std::int64_t c : cols) pc.truth_pairs += detail::choose2(c);
    pc.total = detail::choose2(static_cast<std::int64_t>(pred.size()));
    return pc;
}

// (Index - ExpectedIndex) / (MaxIndex - ExpectedIndex); 1.0 when the
// denominator degenerates (both partitions all-singleton or all-one-cluster).
inline double adjusted_rand_index_from(const PairCounts& pc) {
    const double expected = static_cast<double>(pc.pred_pairs) *
                            static_cast<double>(pc.truth_pairs) / static_cast<double>(pc.total);
    const double max_index = 0.5 * (static_cast<double>(pc.pred_pairs) +
                                    static_cast<double>(pc.truth_pairs));
    if (max_index == expected) return 1.0;
    return (static_cast<double>(pc.both) - expected) / (max_index - expected);
}

inline double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth) {
    return adjusted_rand_index_from(pair_counts(pred, truth));
}

struct Prf {
    double recall = 0.0;
    double precision = 0.0;
    double fscore = 0.0;
};

inline Prf pairwise_prf_from(const PairCounts& pc) {
    Prf r;
    r.precision = pc.pred_pairs > 0 ? static_cast<double>(pc.both) / static_cast<double>(pc.pred_pairs) : 0.0;
    r.recall = pc.truth_pairs > 0 ? static_cast<double>(pc.both) / static_cast<double>(pc.truth_pairs) : 0.0;
    r.fscore = (r.precision + r.recall) > 0.0
                   ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                   : 0.0;
    return r;
}

inline Prf pairwise_prf(const std::vector<int>& pred, const std::vector<int>& truth) {
    return pairwise_prf_from(pair_counts(pred, truth));
}

inline double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
    std::int64_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

struct RunMetrics {
    std::uint64_t seed = 0;
    double ari = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double fscore = 0.0;
    std::optional<double> acc;
};

inline RunMetrics compute_run_metrics(std::uint64_t seed, const std::vector<int>& pred,
                                      const std::vector<int>& truth, bool with_accuracy) {
    RunMetrics m;
    m.seed = seed;
    const PairCounts pc = pair_counts(pred, truth);
    m.ari = adjusted_rand_index_from(pc);
    const Prf prf = pairwise_prf_from(pc);
    m.recall = prf.recall;
    m.precision = prf.precision;
    m.fscore = prf.fscore;
    if (with_accuracy) m.acc = accuracy(pred, truth);
    return m;
}

inline RunMetrics mean_metrics(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) throw std::invalid_argument("mean_metrics: no runs");
    RunMetrics m;
    bool all_acc = true;
    double acc = 0.0;
    for (const auto& r : runs) {
        m.ari += r.ari;
        m.recall += r.recall;
        m.precision += r.precision;
        m.fscore += r.fscore;
        if (r.acc)
            acc += *r.acc;
        else
            all_acc = false;
    }
    const double n = static_cast<double>(runs.size());
    m.ari /= n;
    m.recall /= n;
    m.precision /= n;
    m.fscore /= n;
    if (all_acc) m.acc = acc / n;
    return m;
}

struct MetricsReport {
    std::vector<RunMetrics> runs;
    RunMetrics mean;
};

}  // namespace gmmlda
