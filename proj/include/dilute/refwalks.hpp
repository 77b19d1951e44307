#pragma once

// Markovian reference walks: the non-backtracking walk pi1, the kinetic
// no-4-loop walk pi2, exact rejection sampling of uniform self-avoiding
// walks, the pi2 change-of-measure weight, and the analytic bound functions
// (Cramer rate, McDiarmid tail).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "dilute/paths.hpp"
#include "dilute/rng.hpp"

namespace dilute {

enum class WalkKind { kSimple, kPi1, kPi2 };

struct WalkLaw {
    WalkKind kind;
    int d;
    int N;
};

// Simple random walk: every step uniform over all 2d directions.
inline Path sample_simple(int d, int N, StreamRng& rng) {
    std::vector<Direction> steps;
    steps.reserve(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) steps.push_back(direction_from_index(static_cast<int>(rng.next_below(2 * d))));
    return Path(d, std::move(steps));
}

// Non-backtracking walk: the first step is uniform over 2d directions, each
// later step uniform over the 2d-1 directions other than the reversal.
// The output is uniform over non-backtracking N-step paths.
inline Path sample_pi1(int d, int N, StreamRng& rng) {
    std::vector<Direction> steps;
    steps.reserve(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        if (n == 0) {
            steps.push_back(direction_from_index(static_cast<int>(rng.next_below(2 * d))));
        } else {
            const int forbidden = direction_index(negate(steps.back()));
            int k = static_cast<int>(rng.next_below(2 * d - 1));
            if (k >= forbidden) ++k;
            steps.push_back(direction_from_index(k));
        }
    }
    return Path(d, std::move(steps));
}

// Kinetic no-4-loop walk: each step is uniform over the neighbours of S_n
// excluding S_{n-1} and S_{n-3}. The per-step choice count is 2d-1, except
// 2d-2 when S_{n-3} is itself a neighbour (a U-turn opportunity).
inline Path sample_pi2(int d, int N, StreamRng& rng) {
    if (d < 2) throw std::invalid_argument("sample_pi2: d must be >= 2");
    std::vector<Site> sites{Site::origin(d)};
    sites.reserve(static_cast<std::size_t>(N) + 1);
    for (int n = 0; n < N; ++n) {
        std::vector<int> choices;
        choices.reserve(static_cast<std::size_t>(2 * d));
        for (int k = 0; k < 2 * d; ++k) {
            const Site cand = step(sites.back(), direction_from_index(k));
            if (sites.size() >= 2 && cand == sites[sites.size() - 2]) continue;
            if (sites.size() >= 4 && cand == sites[sites.size() - 4]) continue;
            choices.push_back(k);
        }
        const int pick = choices[static_cast<std::size_t>(rng.next_below(choices.size()))];
        sites.push_back(step(sites.back(), direction_from_index(pick)));
    }
    return Path::from_sites(std::move(sites));
}

struct RejectionExhausted : std::runtime_error {
    explicit RejectionExhausted(std::uint64_t attempts)
        : std::runtime_error("rejection sampler exhausted " + std::to_string(attempts) + " attempts"),
          attempts(attempts) {}
    std::uint64_t attempts;
};

struct UniformSawSample {
    Path path;
    std::uint64_t attempts;
};

// Exact uniform sample from S_N: rejection of pi1 draws on the
// self-avoidance test. Valid because pi1 is uniform on non-backtracking
// paths and S_N is a subset of them.
inline UniformSawSample sample_uniform_saw(int d, int N, StreamRng& rng,
                                           std::uint64_t max_attempts = 1'000'000) {
    for (std::uint64_t a = 1; a <= max_attempts; ++a) {
        Path p = sample_pi1(d, N, rng);
        if (is_self_avoiding(p)) return UniformSawSample{std::move(p), a};
    }
    throw RejectionExhausted(max_attempts);
}

inline bool valid_for_pi2(const Path& p) {
    const auto& s = p.sites;
    for (std::size_t n = 2; n < s.size(); ++n) {
        if (s[n] == s[n - 2]) return false;
        if (n >= 4 && s[n] == s[n - 4]) return false;
    }
    return true;
}

// |U_{N-1}| of a path: U-turn indices restricted to [3, N-1].
inline int u_count_to(const Path& p, int limit) {
    int c = 0;
    for (int n = 3; n <= limit; ++n)
        if (graph_distance(p.sites[static_cast<std::size_t>(n)], p.sites[static_cast<std::size_t>(n - 3)]) == 1) ++c;
    return c;
}

// Radon-Nikodym factor between the uniform law on S4_N and the kinetic walk
// pi2, up to normalization: ((2d-2)/(2d-1))^{|U_{N-1}|}.
//
// Direction note: the pi2 path probability itself is proportional to the
// reciprocal, ((2d-1)/(2d-2))^{|U_{N-1}|}, since each U-turn opportunity
// shrinks the step choice set from 2d-1 to 2d-2. The exact decision-tree
// enumeration at (d=2, N=5) pins this down; see the refwalks tests. Hence
// averaging f(S) under pi2 with these weights, self-normalized, estimates
// the uniform-S4_N expectation of f.
inline double rn_weight_pi2(const Path& p) {
    if (!valid_for_pi2(p)) throw std::invalid_argument("rn_weight_pi2: path has a backtrack or 4-loop");
    const int d = p.dim();
    const double ratio = (2.0 * d - 2.0) / (2.0 * d - 1.0);
    return std::pow(ratio, u_count_to(p, p.length() - 1));
}

// Exact pi2 probability of a path: the product of reciprocal choice counts.
inline mpq_class pi2_path_probability(const Path& p) {
    if (!valid_for_pi2(p)) throw std::invalid_argument("pi2_path_probability: invalid path");
    const int d = p.dim();
    const int N = p.length();
    mpq_class prob(1, 2 * d);
    for (int n = 1; n < N; ++n) {
        // choosing X_{n+1}: S_{n-1} always removes one neighbour; S_{n-3}
        // removes another iff it is adjacent to S_n.
        const bool uturn = n >= 3 && graph_distance(p.sites[static_cast<std::size_t>(n)],
                                                    p.sites[static_cast<std::size_t>(n - 3)]) == 1;
        prob /= (uturn ? 2 * d - 2 : 2 * d - 1);
    }
    return prob;
}

struct RateFunctionInput {
    double p;
    double x;
};

// Cramer rate function of a Bernoulli(p) mean:
// h_p(x) = x log(x/p) + (1-x) log((1-x)/(1-p)), with continuity at 0 and 1.
inline double rate_function(const RateFunctionInput& in) {
    const double p = in.p, x = in.x;
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("rate_function: p must lie in (0,1)");
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("rate_function: x must lie in [0,1]");
    if (x == 0.0) return -std::log1p(-p);
    if (x == 1.0) return -std::log(p);
    return x * std::log(x / p) + (1.0 - x) * std::log((1.0 - x) / (1.0 - p));
}

// McDiarmid lower-tail bound for an n-variable function with the given
// bounded-difference constant: exp(-2 x^2 / (n L^2)).
inline double mcdiarmid_tail(double x, std::uint64_t n_vars, double lipschitz) {
    if (n_vars < 1 || lipschitz <= 0.0) return 1.0;
    return std::exp(-2.0 * x * x / (static_cast<double>(n_vars) * lipschitz * lipschitz));
}

// |S_N| / (2d (2d-1)^{N-1}): the exact probability that a pi1 path of
// length N is self-avoiding.
inline mpq_class pi1_saw_probability_exact(int d, int N, std::uint64_t budget = kDefaultDfsBudget) {
    if (N < 1) throw std::invalid_argument("pi1_saw_probability_exact: N must be >= 1");
    mpz_class denom(2 * d);
    for (int i = 1; i < N; ++i) denom *= 2 * d - 1;
    mpq_class q(count_saw(d, N, budget), denom);
    q.canonicalize();
    return q;
}

// One row of walk statistics: census sizes, the even/odd U split, the
// distance-one and distance-two comeback sets, and the tau^2 epoch count.
struct WalkStatistics {
    std::uint64_t trial = 0;
    int N = 0;
    int U = 0, U1 = 0, U2 = 0;
    int T = 0;
    int V1 = 0, V2 = 0;
    int W1 = 0, W2 = 0;
    int tau2_count = 0;
    bool self_avoiding = false;
};

inline WalkStatistics walk_statistics(const Path& p, TConvention conv = TConvention::kLagging) {
    const int N = p.length();
    WalkStatistics st;
    st.N = N;
    const PathCensus c = detail::census_unchecked(p, conv);
    st.U = static_cast<int>(c.U.size());
    for (int n : c.U) (n % 2 == 0 ? st.U1 : st.U2)++;
    st.T = static_cast<int>(c.T.size());
    st.V1 = static_cast<int>(c.V1.size());
    st.V2 = static_cast<int>(c.V2.size());
    st.self_avoiding = is_self_avoiding(p);

    // W1: indices with a site of the non-immediate past at distance one.
    // W2: indices with a site of the past before n-2 at distance two.
    std::vector<bool> w1(static_cast<std::size_t>(N) + 1, false);
    for (int n = 0; n <= N; ++n) {
        for (int m = 0; m < n - 1 && !w1[static_cast<std::size_t>(n)]; ++m)
            if (graph_distance(p.sites[static_cast<std::size_t>(m)], p.sites[static_cast<std::size_t>(n)]) == 1)
                w1[static_cast<std::size_t>(n)] = true;
        if (w1[static_cast<std::size_t>(n)]) st.W1++;
        for (int m = 0; m < n - 2; ++m)
            if (graph_distance(p.sites[static_cast<std::size_t>(m)], p.sites[static_cast<std::size_t>(n)]) == 2) {
                st.W2++;
                break;
            }
    }

    // tau^2 epochs: successive times coming to distance two of the past
    // before n-2, at least two steps apart, with {n, n-1} clear of W1.
    int last_tau = 0;
    for (int n = 2; n <= N; ++n) {
        if (n < last_tau + 2) continue;
        if (w1[static_cast<std::size_t>(n)] || w1[static_cast<std::size_t>(n - 1)]) continue;
        bool hit = false;
        for (int m = 0; m < n - 2 && !hit; ++m)
            if (graph_distance(p.sites[static_cast<std::size_t>(m)], p.sites[static_cast<std::size_t>(n)]) == 2)
                hit = true;
        if (hit) {
            last_tau = n;
            st.tau2_count++;
        }
    }
    return st;
}

// Per-trial census statistics under a reference law; trials are keyed
// (master seed, trial index) so any execution order gives the same rows.
inline std::vector<WalkStatistics> u_statistics_under(const WalkLaw& law, std::uint64_t trials,
                                                      std::uint64_t master_seed) {
    std::vector<WalkStatistics> rows(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        StreamRng rng(master_seed, t);
        Path p = law.kind == WalkKind::kSimple  ? sample_simple(law.d, law.N, rng)
                 : law.kind == WalkKind::kPi1   ? sample_pi1(law.d, law.N, rng)
                                                : sample_pi2(law.d, law.N, rng);
        rows[t] = walk_statistics(p);
        rows[t].trial = t;
    }
    return rows;
}

// Per-index U-turn probability under pi1: 2(d-1)/(2d-1)^2.
inline double pi1_uturn_rate(int d) {
    return 2.0 * (d - 1) / ((2.0 * d - 1.0) * (2.0 * d - 1.0));
}

}  // namespace dilute
