#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gmmlda/eval.hpp"
#include "gmmlda/rng.hpp"
#include "support/oracles.hpp"

using namespace gmmlda;

namespace {

std::vector<int> random_labels(Rng& rng, int n, int clusters) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (auto& x : out) x = rng.uniform_int(clusters);
    return out;
}

}  // namespace

TEST_CASE("adjusted_rand_index reference points") {
    // identical up to relabeling
    CHECK(adjusted_rand_index({0, 0, 1, 1, 2}, {5, 5, 9, 9, 7}) == 1.0);
    // one big cluster against two balanced classes is chance level
    CHECK(adjusted_rand_index({1, 1, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(0.0).epsilon(1e-15));
    // 3-1 split against 2-2: value from the contingency formula
    const std::vector<int> pred{1, 1, 1, 2};
    const std::vector<int> truth{0, 0, 1, 1};
    const auto oracle = oracles::brute_force_pairs(pred, truth);
    CHECK(adjusted_rand_index(pred, truth) == oracles::brute_ari(oracle));
    CHECK_THROWS(adjusted_rand_index({0, 1}, {0, 1, 2}));
    CHECK_THROWS(adjusted_rand_index({0}, {0}));

    // degenerate identical partitions
    CHECK(adjusted_rand_index({0, 1, 2}, {4, 5, 6}) == 1.0);  // all singletons
    CHECK(adjusted_rand_index({1, 1, 1}, {2, 2, 2}) == 1.0);  // one cluster
}

TEST_CASE("pairwise_prf reference points") {
    const Prf perfect = pairwise_prf({0, 0, 1, 1}, {5, 5, 6, 6});
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.fscore == 1.0);

    // single cluster vs two classes of size n: recall 1, precision 2C(n,2)/C(2n,2)
    const int n = 6;
    std::vector<int> pred(2 * n, 0), truth;
    for (int i = 0; i < 2 * n; ++i) truth.push_back(i < n ? 0 : 1);
    const Prf flat = pairwise_prf(pred, truth);
    CHECK(flat.recall == 1.0);
    const double expect_p = 2.0 * (n * (n - 1) / 2) / static_cast<double>(2 * n * (2 * n - 1) / 2);
    CHECK(flat.precision == doctest::Approx(expect_p).epsilon(1e-15));

    // all singletons predict no pairs at all
    const Prf none = pairwise_prf({0, 1, 2, 3}, {0, 0, 1, 1});
    CHECK(none.recall == 0.0);
    CHECK(none.precision == 0.0);
    CHECK(none.fscore == 0.0);
}

TEST_CASE("accuracy reference points") {
    CHECK(accuracy({3, 1, 2}, {3, 1, 2}) == 1.0);
    CHECK(accuracy({0, 0}, {1, 1}) == 0.0);
    CHECK(accuracy({1, 2, 3, 4}, {1, 2, 3, 0}) == 0.75);
    CHECK_THROWS(accuracy({1}, {1, 2}));
}

TEST_CASE("pair counting matches the brute-force oracle exactly") {
    Rng rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + rng.uniform_int(199);
        const std::vector<int> pred = random_labels(rng, n, 1 + rng.uniform_int(8));
        const std::vector<int> truth = random_labels(rng, n, 1 + rng.uniform_int(8));

        const PairCounts pc = pair_counts(pred, truth);
        const auto oracle = oracles::brute_force_pairs(pred, truth);
        CHECK(pc.both == oracle.both);
        CHECK(pc.pred_pairs == oracle.pred_pairs);
        CHECK(pc.truth_pairs == oracle.truth_pairs);
        CHECK(pc.total == oracle.total);

        CHECK(adjusted_rand_index(pred, truth) == oracles::brute_ari(oracle));
        const Prf prf = pairwise_prf(pred, truth);
        CHECK(prf.precision == oracles::brute_precision(oracle));
        CHECK(prf.recall == oracles::brute_recall(oracle));
        CHECK(prf.fscore == oracles::brute_fscore(oracle));
    }
}

TEST_CASE("metrics are invariant under relabeling of predicted clusters") {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + rng.uniform_int(100);
        const std::vector<int> pred = random_labels(rng, n, 5);
        const std::vector<int> truth = random_labels(rng, n, 4);
        std::vector<int> relabeled(pred.size());
        const int offsets[5] = {40, 17, 99, 3, 61};
        for (std::size_t i = 0; i < pred.size(); ++i)
            relabeled[i] = offsets[pred[i]];

        CHECK(adjusted_rand_index(pred, truth) == adjusted_rand_index(relabeled, truth));
        const Prf a = pairwise_prf(pred, truth);
        const Prf b = pairwise_prf(relabeled, truth);
        CHECK(a.precision == b.precision);
        CHECK(a.recall == b.recall);
        CHECK(a.fscore == b.fscore);
    }
}

TEST_CASE("ARI of self is one and of shuffled balanced labels is near zero") {
    Rng rng(37);
    std::vector<int> labels;
    for (int i = 0; i < 400; ++i) labels.push_back(i % 4);
    CHECK(adjusted_rand_index(labels, labels) == 1.0);

    double acc = 0.0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        std::vector<int> shuffled = labels;
        for (int i = static_cast<int>(shuffled.size()) - 1; i > 0; --i)
            std::swap(shuffled[static_cast<std::size_t>(i)], shuffled[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
        acc += adjusted_rand_index(shuffled, labels);
    }
    CHECK(std::abs(acc / trials) < 0.005);
}

TEST_CASE("mean_metrics averages runs and carries accuracy only when complete") {
    RunMetrics a;
    a.seed = 1;
    a.ari = 0.4;
    a.recall = 0.5;
    a.precision = 0.7;
    a.fscore = 0.58;
    a.acc = 0.8;
    RunMetrics b = a;
    b.seed = 2;
    b.ari = 0.6;
    b.acc = 0.6;
    const RunMetrics mean = mean_metrics({a, b});
    CHECK(mean.ari == doctest::Approx(0.5));
    REQUIRE(mean.acc.has_value());
    CHECK(*mean.acc == doctest::Approx(0.7));

    b.acc.reset();
    CHECK_FALSE(mean_metrics({a, b}).acc.has_value());
    CHECK_THROWS(mean_metrics({}));
}
