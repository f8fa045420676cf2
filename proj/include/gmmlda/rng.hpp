#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace gmmlda {

// Seeded generator with hand-rolled variate transforms. std::mt19937_64 is
// fully specified by the standard; the transforms below avoid the
// implementation-defined std::*_distribution classes so that a given seed
// produces the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform integer on [0, n)
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = (UINT64_MAX / un) * un;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Exp(1)
    double exponential() { return -std::log1p(-uniform()); }

    double normal() {
        // Marsaglia polar method; the discarded second variate keeps the
        // draw count independent of call history.
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Marsaglia-Tsang; boosted for shape < 1.
    double gamma(double shape) {
        if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = 1.0 - uniform();  // (0, 1]
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            const double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            const double v = t * t * t;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        const double s = x + y;
        return s > 0.0 ? x / s : 0.5;
    }

    // symmetric Dirichlet(conc) over n categories
    std::vector<double> dirichlet(double conc, int n) {
        std::vector<double> p(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (auto& v : p) {
            v = gamma(conc);
            sum += v;
        }
        if (sum <= 0.0) {
            std::fill(p.begin(), p.end(), 1.0 / n);
        } else {
            for (auto& v : p) v /= sum;
        }
        return p;
    }

    // Knuth's product method; fine for the small means used here.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    // index sampled proportionally to non-negative weights
    int categorical(const std::vector<double>& w, int n = -1) {
        const int m = n < 0 ? static_cast<int>(w.size()) : n;
        double total = 0.0;
        for (int i = 0; i < m; ++i) total += w[static_cast<std::size_t>(i)];
        if (!(total > 0.0) || !std::isfinite(total))
            throw std::runtime_error("categorical: degenerate weight vector");
        double r = uniform() * total;
        for (int i = 0; i < m; ++i) {
            r -= w[static_cast<std::size_t>(i)];
            if (r < 0.0) return i;
        }
        return m - 1;
    }

    // index sampled from unnormalized log-weights
    int categorical_log(const std::vector<double>& lw, std::vector<double>& scratch, int n = -1) {
        const int m = n < 0 ? static_cast<int>(lw.size()) : n;
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) mx = std::max(mx, lw[static_cast<std::size_t>(i)]);
        if (!std::isfinite(mx)) throw std::runtime_error("categorical_log: all weights -inf");
        scratch.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            scratch[static_cast<std::size_t>(i)] = std::exp(lw[static_cast<std::size_t>(i)] - mx);
        return categorical(scratch, m);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace gmmlda
