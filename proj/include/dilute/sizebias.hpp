#pragma once

// The size-biased disorder law and its spine construction: environments with
// a forced-open path, the spined partition function, and exhaustive exact
// laws for verifying the distribution identity between the two.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "dilute/environment.hpp"
#include "dilute/paths.hpp"
#include "dilute/util.hpp"

namespace dilute {

// An environment overlaid with a forced-open path: spine edges are open
// regardless of the base state, all other edges defer to the base.
template <class Base>
class SpinedEnvironment {
  public:
    SpinedEnvironment(const Base& base, const Path& spine) : base_(&base), spine_(&spine) {
        if (!is_self_avoiding(spine)) throw std::invalid_argument("SpinedEnvironment: spine is not self-avoiding");
        for (std::size_t i = 1; i < spine.sites.size(); ++i)
            spine_edges_.insert(canonical_edge(spine.sites[i - 1], spine.sites[i]));
    }

    bool is_open(const Edge& e) const { return spine_edges_.count(e) != 0 || base_->is_open(e); }

    const Path& spine() const { return *spine_; }
    const Base& base() const { return *base_; }

  private:
    const Base* base_;
    const Path* spine_;
    std::unordered_set<Edge, EdgeHash> spine_edges_;
};

template <class Base>
SpinedEnvironment<Base> make_spined(const Base& env, const Path& spine) {
    return SpinedEnvironment<Base>(env, spine);
}

// Z~_N(S, omega): open-path count in the spined environment. The spine must
// have length N.
template <class Base>
mpz_class tilde_partition(const SpinedEnvironment<Base>& spined, int N,
                          std::uint64_t budget = kDefaultDfsBudget) {
    if (spined.spine().length() != N)
        throw std::invalid_argument("tilde_partition: spine length does not match N");
    return count_open_saw(spined, N, spined.spine().start, budget);
}

template <class Base>
std::uint64_t tilde_partition_u64(const SpinedEnvironment<Base>& spined, int N,
                                  std::uint64_t budget = kDefaultDfsBudget) {
    if (spined.spine().length() != N)
        throw std::invalid_argument("tilde_partition: spine length does not match N");
    return count_open_saw_u64(spined, N, spined.spine().start, budget);
}

// A finitely supported law with exact rational probabilities.
struct Distribution {
    std::vector<std::pair<std::uint64_t, mpq_class>> support;  // sorted by value

    mpq_class total_mass() const {
        mpq_class s(0);
        for (const auto& [v, w] : support) s += w;
        return s;
    }

    mpq_class mass_at(std::uint64_t v) const {
        for (const auto& [val, w] : support)
            if (val == v) return w;
        return mpq_class(0);
    }
};

inline mpq_class tv_distance(const Distribution& a, const Distribution& b) {
    std::map<std::uint64_t, mpq_class> diff;
    for (const auto& [v, w] : a.support) diff[v] += w;
    for (const auto& [v, w] : b.support) diff[v] -= w;
    mpq_class tv(0);
    for (const auto& [v, w] : diff) tv += abs(w);
    return tv / 2;
}

namespace detail {

inline Distribution distribution_from_map(const std::map<std::uint64_t, mpq_class>& m) {
    Distribution out;
    for (const auto& [v, w] : m)
        if (w != 0) out.support.emplace_back(v, w);
    return out;
}

}  // namespace detail

// The exact law of Z_N under the size-biased measure: each environment on
// relevant_edges(N) carries weight P(omega) * W_N(omega).
inline Distribution size_biased_law_exact(int d, int N, const mpq_class& p, int workers = 1,
                                          std::uint64_t budget = kDefaultDfsBudget) {
    const Site origin = Site::origin(d);
    const std::vector<Edge> edges = relevant_edges(N, origin);
    if (edges.size() > kExhaustiveEdgeLimit)
        throw std::invalid_argument("size_biased_law_exact: relevant edge set exceeds the exhaustive guard");
    const mpz_class s_n = count_saw(d, N, budget);
    mpq_class p_pow(1);
    for (int i = 0; i < N; ++i) p_pow *= p;
    const mpq_class denom = p_pow * mpq_class(s_n);

    const std::uint64_t total = std::uint64_t{1} << edges.size();
    const int w = std::max(1, workers);
    std::vector<std::map<std::uint64_t, mpq_class>> partial(static_cast<std::size_t>(w));
    parallel_for(static_cast<std::uint64_t>(w), w, [&](std::uint64_t chunk) {
        const std::uint64_t lo = total * chunk / static_cast<std::uint64_t>(w);
        const std::uint64_t hi = total * (chunk + 1) / static_cast<std::uint64_t>(w);
        const mpq_class q = 1 - p;
        std::vector<mpq_class> pow_p(edges.size() + 1, 1), pow_q(edges.size() + 1, 1);
        for (std::size_t i = 1; i <= edges.size(); ++i) {
            pow_p[i] = pow_p[i - 1] * p;
            pow_q[i] = pow_q[i - 1] * q;
        }
        FiniteEnvironment env(edges);
        for (std::uint64_t mask = lo; mask < hi; ++mask) {
            env.set_mask(mask);
            const std::uint64_t z = count_open_saw_u64(env, N, origin, budget);
            if (z == 0) continue;
            const int open = __builtin_popcountll(mask);
            const mpq_class weight = pow_p[static_cast<std::size_t>(open)] *
                                     pow_q[edges.size() - static_cast<std::size_t>(open)] * z / denom;
            partial[chunk][z] += weight;
        }
    });
    std::map<std::uint64_t, mpq_class> law;
    for (const auto& m : partial)
        for (const auto& [v, wq] : m) law[v] += wq;
    return detail::distribution_from_map(law);
}

// The exact law of Z~_N(S, omega) under (uniform spine) x (Bernoulli base):
// the spine-construction side of the distribution identity.
inline Distribution spine_law_exact(int d, int N, const mpq_class& p, int workers = 1,
                                    std::uint64_t budget = kDefaultDfsBudget) {
    const Site origin = Site::origin(d);
    const std::vector<Edge> edges = relevant_edges(N, origin);
    if (edges.size() > kExhaustiveEdgeLimit)
        throw std::invalid_argument("spine_law_exact: relevant edge set exceeds the exhaustive guard");

    std::vector<Path> spines;
    enumerate_saw(d, N, [&](const std::vector<Site>& sites) { spines.push_back(Path::from_sites(sites)); });

    const std::uint64_t total = std::uint64_t{1} << edges.size();
    const mpq_class uniform(1, static_cast<unsigned long>(spines.size()));
    const int w = std::max(1, workers);
    std::vector<std::map<std::uint64_t, mpq_class>> partial(static_cast<std::size_t>(w));
    parallel_for(static_cast<std::uint64_t>(w), w, [&](std::uint64_t chunk) {
        const std::uint64_t lo = total * chunk / static_cast<std::uint64_t>(w);
        const std::uint64_t hi = total * (chunk + 1) / static_cast<std::uint64_t>(w);
        const mpq_class q = 1 - p;
        std::vector<mpq_class> pow_p(edges.size() + 1, 1), pow_q(edges.size() + 1, 1);
        for (std::size_t i = 1; i <= edges.size(); ++i) {
            pow_p[i] = pow_p[i - 1] * p;
            pow_q[i] = pow_q[i - 1] * q;
        }
        FiniteEnvironment env(edges);
        std::vector<SpinedEnvironment<FiniteEnvironment>> spined;
        spined.reserve(spines.size());
        for (const Path& s : spines) spined.emplace_back(env, s);
        for (std::uint64_t mask = lo; mask < hi; ++mask) {
            env.set_mask(mask);
            const int open = __builtin_popcountll(mask);
            const mpq_class base_w = pow_p[static_cast<std::size_t>(open)] *
                                     pow_q[edges.size() - static_cast<std::size_t>(open)] * uniform;
            for (const auto& se : spined) {
                const std::uint64_t z = count_open_saw_u64(se, N, origin, budget);
                partial[chunk][z] += base_w;
            }
        }
    });
    std::map<std::uint64_t, mpq_class> law;
    for (const auto& m : partial)
        for (const auto& [v, wq] : m) law[v] += wq;
    return detail::distribution_from_map(law);
}

// Desk-scale surrogate of the strong-disorder hypothesis: the frequency of
// log Z~_N <= cN + log E[Z_N] over sampled (spine, environment) pairs,
// reported with a Wilson interval against the e^{-cN} target. A certificate
// is a report, never a proof.
struct CertificateReport {
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    double frequency = 0.0;
    WilsonInterval interval{0.0, 1.0};
    double log_threshold = 0.0;
    double bound = 0.0;  // e^{-cN}
    bool satisfied = false;
};

inline CertificateReport strong_disorder_certificate(const std::vector<double>& log_tilde_z, double c, int N,
                                                     double log_annealed_zn) {
    if (c <= 0.0) throw std::invalid_argument("strong_disorder_certificate: c must be positive");
    CertificateReport rep;
    rep.trials = log_tilde_z.size();
    rep.log_threshold = c * N + log_annealed_zn;
    for (double lz : log_tilde_z)
        if (lz <= rep.log_threshold) rep.hits++;
    rep.frequency = rep.trials ? static_cast<double>(rep.hits) / static_cast<double>(rep.trials) : 0.0;
    rep.interval = wilson_interval(rep.hits, rep.trials);
    rep.bound = std::exp(-c * N);
    rep.satisfied = rep.frequency <= rep.bound;
    return rep;
}

}  // namespace dilute
