#pragma once

// Bond environments. The infinite environment is procedural: the state of an
// edge is a pure function of (p, seed, edge), computed by hashing the
// canonical edge encoding. A single uniform value per edge, thresholded at p,
// gives a monotone coupling across p for a fixed seed.
//
// Recipe (bit-exact): h = FNV-1a-64 over encode_edge(e); z = splitmix64
// finalizer of (h XOR seed), without the golden-ratio increment; the edge is
// open iff (z >> 11) < floor(p * 2^53). Test vectors ship in
// data/hash_vectors.json.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <gmpxx.h>

#include "dilute/lattice.hpp"
#include "dilute/rng.hpp"

namespace dilute {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t open_threshold53(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability out of [0,1]");
    return static_cast<std::uint64_t>(std::floor(p * 9007199254740992.0));  // p * 2^53, exact for dyadic p
}

class Environment {
  public:
    Environment(double p, std::uint64_t seed) : p_(p), seed_(seed), threshold_(open_threshold53(p)) {}

    double p() const { return p_; }
    std::uint64_t seed() const { return seed_; }

    // Canonical uniform value of an edge, 53 bits.
    std::uint64_t uniform53(const Edge& e) const { return mix64(fnv1a64(encode_edge(e)) ^ seed_) >> 11; }

    bool is_open(const Edge& e) const { return uniform53(e) < threshold_; }

  private:
    double p_;
    std::uint64_t seed_;
    std::uint64_t threshold_;
};

// Explicit finite environment: a fixed edge set with one state bit per edge.
// Edges outside the set are closed.
class FiniteEnvironment {
  public:
    FiniteEnvironment() = default;
    explicit FiniteEnvironment(std::vector<Edge> edges)
        : edges_(std::move(edges)), states_(edges_.size(), false) {
        for (std::size_t i = 0; i < edges_.size(); ++i) index_.emplace(edges_[i], i);
    }

    std::size_t size() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    void set_state(std::size_t i, bool open) { states_[i] = open; }
    bool state(std::size_t i) const { return states_[i]; }

    void set_mask(std::uint64_t mask) {
        for (std::size_t i = 0; i < edges_.size(); ++i) states_[i] = (mask >> i) & 1u;
    }

    bool is_open(const Edge& e) const {
        auto it = index_.find(e);
        return it != index_.end() && states_[it->second];
    }

    int open_count() const {
        int c = 0;
        for (bool s : states_) c += s;
        return c;
    }

  private:
    std::vector<Edge> edges_;
    std::vector<bool> states_;
    std::unordered_map<Edge, std::size_t, EdgeHash> index_;
};

inline constexpr std::size_t kExhaustiveEdgeLimit = 24;

// Visit all 2^k assignments of the edge set with their Bernoulli(p) weights;
// weights are exact rationals and sum to 1. f(env, weight) is called once per
// assignment, in increasing mask order.
template <class F>
void enumerate_finite(const std::vector<Edge>& edge_set, const mpq_class& p, F&& f) {
    const std::size_t k = edge_set.size();
    if (k > kExhaustiveEdgeLimit)
        throw std::invalid_argument("enumerate_finite: edge set exceeds the exhaustive guard of 24 edges");
    const mpq_class q = 1 - p;
    std::vector<mpq_class> pow_p(k + 1, 1), pow_q(k + 1, 1);
    for (std::size_t i = 1; i <= k; ++i) {
        pow_p[i] = pow_p[i - 1] * p;
        pow_q[i] = pow_q[i - 1] * q;
    }
    FiniteEnvironment env(edge_set);
    const std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        env.set_mask(mask);
        const int open = __builtin_popcountll(mask);
        f(env, mpq_class(pow_p[static_cast<std::size_t>(open)] * pow_q[k - static_cast<std::size_t>(open)]));
    }
}

// All edges with both endpoints within graph distance N of start; exactly the
// edges whose states can influence the N-step open-path count from start.
inline std::vector<Edge> relevant_edges(int N, const Site& start) {
    if (N < 1) throw std::invalid_argument("relevant_edges: N must be >= 1");
    std::vector<Edge> out;
    std::unordered_set<Site, SiteHash> ball;
    std::vector<Site> frontier{start};
    ball.insert(start);
    for (int r = 0; r < N; ++r) {
        std::vector<Site> next;
        for (const Site& s : frontier)
            for (const Site& t : neighbors(s))
                if (ball.insert(t).second) next.push_back(t);
        frontier = std::move(next);
    }
    for (const Site& s : ball)
        for (int axis = 0; axis < start.dim(); ++axis) {
            Site t = s;
            t[axis] += 1;
            if (ball.count(t)) out.push_back(Edge{s, static_cast<std::uint32_t>(axis)});
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace dilute
