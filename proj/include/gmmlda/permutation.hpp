#pragma once

/*
 * Generalized Mallows machinery over intent orderings.
 *
 * A permutation pi of the K intent ids {0..K-1} is equivalently stored as a
 * (K-1)-dimensional inversion vector v, where v[k] counts the ids that sit
 * before k in pi and are greater than k. Component k ranges over [0, K-1-k]
 * and the components are mutually independent under the model:
 *
 *   GMM_k(v ; rho_k) = exp(-rho_k * v) / psi_k(rho_k),
 *   psi_k(rho) = (1 - exp(-n*rho)) / (1 - exp(-rho)),  n = K - k.
 *
 * The conjugate prior over rho_k is an exponential-family density
 *   GMM_0(rho ; v0, nu) = exp(nu * (-rho*v0 - log psi_k(rho)))  (unnormalized)
 * sampled here with a univariate slice sampler.
 *
 * All indices are 0-based in code; external formats are 1-based.
 */

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gmmlda/rng.hpp"

namespace gmmlda {

using Permutation = std::vector<int>;      // values are intent ids, a bijection on [0, K)
using InversionVector = std::vector<int>;  // K-1 components, component k in [0, K-1-k]
using Dispersion = std::vector<double>;    // K-1 positive reals (0 only in the uniform variant)

inline Permutation identity_permutation(int K) {
    Permutation p(static_cast<std::size_t>(K));
    std::iota(p.begin(), p.end(), 0);
    return p;
}

inline bool is_permutation_of_range(const std::vector<int>& p) {
    const int K = static_cast<int>(p.size());
    std::vector<char> seen(static_cast<std::size_t>(K), 0);
    for (int x : p) {
        if (x < 0 || x >= K || seen[static_cast<std::size_t>(x)]) return false;
        seen[static_cast<std::size_t>(x)] = 1;
    }
    return true;
}

// v[k] = |{ j : j precedes k in p, j > k }|; the trailing component (always 0) is omitted.
inline InversionVector permutation_to_inversion(const Permutation& p) {
    if (!is_permutation_of_range(p))
        throw std::invalid_argument("permutation_to_inversion: not a permutation of [0, K)");
    const int K = static_cast<int>(p.size());
    InversionVector v(K > 0 ? static_cast<std::size_t>(K - 1) : 0, 0);
    std::vector<int> pos(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) pos[static_cast<std::size_t>(p[static_cast<std::size_t>(i)])] = i;
    for (int k = 0; k + 1 < K; ++k) {
        int count = 0;
        for (int i = 0; i < pos[static_cast<std::size_t>(k)]; ++i)
            if (p[static_cast<std::size_t>(i)] > k) ++count;
        v[static_cast<std::size_t>(k)] = count;
    }
    return v;
}

// Inverse transform: insert ids K-1 down to 0, id k at position v[k], so that
// exactly v[k] greater ids precede it.
inline void inversion_to_permutation_into(const InversionVector& v, int K, Permutation& out) {
    if (static_cast<int>(v.size()) != (K > 0 ? K - 1 : 0))
        throw std::invalid_argument("inversion_to_permutation: size must be K-1");
    out.clear();
    out.reserve(static_cast<std::size_t>(K));
    if (K == 0) return;
    out.push_back(K - 1);
    for (int k = K - 2; k >= 0; --k) {
        const int vk = v[static_cast<std::size_t>(k)];
        if (vk < 0 || vk > K - 1 - k)
            throw std::out_of_range("inversion_to_permutation: component out of bounds");
        out.insert(out.begin() + vk, k);
    }
}

inline Permutation inversion_to_permutation(const InversionVector& v, int K) {
    Permutation out;
    inversion_to_permutation_into(v, K, out);
    return out;
}

// out[i] = outer[inner[i]]
inline Permutation compose_permutations(const Permutation& outer, const Permutation& inner) {
    Permutation out(inner.size());
    for (std::size_t i = 0; i < inner.size(); ++i)
        out[i] = outer[static_cast<std::size_t>(inner[i])];
    return out;
}

// Arrange the bag of intents u in the order of p, equal intents contiguous.
// Intents absent from u simply do not appear.
inline std::vector<int> compute_z(const std::vector<int>& u, const Permutation& p) {
    const int K = static_cast<int>(p.size());
    std::vector<int> count(static_cast<std::size_t>(K), 0);
    for (int x : u) {
        if (x < 0 || x >= K) throw std::out_of_range("compute_z: intent id outside [0, K)");
        ++count[static_cast<std::size_t>(x)];
    }
    std::vector<int> z;
    z.reserve(u.size());
    for (int label : p)
        for (int c = 0; c < count[static_cast<std::size_t>(label)]; ++c) z.push_back(label);
    return z;
}

// Allocation-free variant used in the sampler hot path; counts indexed by intent id.
inline void compute_z_from_counts(const std::vector<int>& count, const Permutation& p,
                                  std::vector<int>& out) {
    out.clear();
    for (int label : p)
        for (int c = 0; c < count[static_cast<std::size_t>(label)]; ++c) out.push_back(label);
}

// log psi for a component with n support values {0, ..., n-1}; rho == 0 is the
// uniform limit. Stable via expm1 for small rho.
inline double log_psi(double rho, int n) {
    if (n <= 1) return 0.0;
    if (rho == 0.0) return std::log(static_cast<double>(n));
    return std::log(-std::expm1(-static_cast<double>(n) * rho)) - std::log(-std::expm1(-rho));
}

inline int gmm_support_size(int k, int K) { return K - k; }

// log GMM_k(v ; rho); k is the 0-based component index.
inline double gmm_log_pmf(int v, double rho, int k, int K) {
    const int n = gmm_support_size(k, K);
    if (v < 0 || v >= n) throw std::out_of_range("gmm_log_pmf: v outside support");
    if (rho < 0.0) throw std::invalid_argument("gmm_log_pmf: rho must be non-negative");
    if (rho == 0.0) return -std::log(static_cast<double>(n));
    return -rho * v - log_psi(rho, n);
}

// Prior inversion mean v_{k,0}: the mean of GMM_k at dispersion rho0, so that
// the prior's maximum-likelihood dispersion equals rho0.
inline double prior_inversion_mean(double rho0, int k, int K) {
    if (rho0 <= 0.0) throw std::invalid_argument("prior_inversion_mean: rho0 must be positive");
    const double n = static_cast<double>(gmm_support_size(k, K));
    if (n <= 1.0) return 0.0;
    return 1.0 / std::expm1(rho0) - n / std::expm1(n * rho0);
}

// Unnormalized log GMM_0(rho ; v_mean, nu) for component k.
inline double gmm0_log_density(double rho, double v_mean, double nu, int k, int K) {
    if (rho <= 0.0) throw std::invalid_argument("gmm0_log_density: rho must be positive");
    const int n = gmm_support_size(k, K);
    return nu * (-rho * v_mean - log_psi(rho, n));
}

// One slice-sampling transition (Neal 2003, step-out + shrinkage) for a
// univariate log-density on (lower, inf). Returns the current point if the
// shrinkage loop degenerates numerically.
template <typename LogDensity>
double slice_sample(double x0, LogDensity&& log_density, Rng& rng, double width = 1.0,
                    int max_steps = 64, double lower = 1e-12) {
    const double f0 = log_density(x0);
    if (!std::isfinite(f0)) return x0;
    const double y = f0 - rng.exponential();

    double left = x0 - width * rng.uniform();
    double right = left + width;
    if (left < lower) left = lower;

    int steps_left = static_cast<int>(std::floor(max_steps * rng.uniform()));
    int steps_right = max_steps - 1 - steps_left;
    while (steps_left-- > 0 && left > lower && log_density(left) > y) {
        left -= width;
        if (left < lower) {
            left = lower;
            break;
        }
    }
    while (steps_right-- > 0 && log_density(right) > y) right += width;

    for (int it = 0; it < 200; ++it) {
        const double x1 = left + (right - left) * rng.uniform();
        if (x1 > lower && log_density(x1) > y) return x1;
        if (x1 < x0)
            left = x1;
        else
            right = x1;
    }
    return x0;
}

// One transition targeting GMM_0(rho ; v_mean, nu) for component k.
inline double slice_sample_rho(double current, double v_mean, double nu, int k, int K, Rng& rng) {
    if (current <= 0.0) throw std::invalid_argument("slice_sample_rho: current must be positive");
    const int n = gmm_support_size(k, K);
    auto target = [v_mean, nu, n](double rho) {
        return rho > 0.0 ? nu * (-rho * v_mean - log_psi(rho, n))
                         : -std::numeric_limits<double>::infinity();
    };
    return slice_sample(current, target, rng);
}

// Minimum number of adjacent swaps between two permutations of the same ids
// (equivalently the number of discordant pairs).
inline int kendall_distance(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw std::invalid_argument("kendall_distance: size mismatch");
    if (!is_permutation_of_range(a) || !is_permutation_of_range(b))
        throw std::invalid_argument("kendall_distance: inputs must be permutations of [0, K)");
    const int K = static_cast<int>(a.size());
    std::vector<int> rank(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) rank[static_cast<std::size_t>(b[static_cast<std::size_t>(i)])] = i;
    int d = 0;
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
            if (rank[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])] >
                rank[static_cast<std::size_t>(a[static_cast<std::size_t>(j)])])
                ++d;
    return d;
}

// Forward draw of an inversion vector, component k per GMM_k(. ; rho[k]).
inline InversionVector sample_inversion(const Dispersion& rho, Rng& rng) {
    const int K = static_cast<int>(rho.size()) + 1;
    InversionVector v(rho.size());
    std::vector<double> w;
    for (int k = 0; k + 1 < K; ++k) {
        const int n = gmm_support_size(k, K);
        const double r = rho[static_cast<std::size_t>(k)];
        w.resize(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x) w[static_cast<std::size_t>(x)] = std::exp(-r * x);
        v[static_cast<std::size_t>(k)] = rng.categorical(w);
    }
    return v;
}

}  // namespace gmmlda
