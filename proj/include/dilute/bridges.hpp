#pragma once

// Bridge machinery over a spine: detection of the three bridge types with
// their non-overlap side conditions, the selection-to-path injection, and
// the combinatorial lower bound it certifies.
//
// A bridge is a short open detour whose edges, together with one to three
// spine edges, form a lattice square (or, for type b, close a 4-cycle):
//   (a) over a site S_n:  two open edges through S_{n-1} + X_{n+1}; length 0
//   (b) chord of a U-turn: the open edge (S_n, S_{n-3});          length -2
//   (c) over an edge (S_n, S_{n+1}): three open edges shifted by e; length +2
// All bridge edges are off the spine, so the base environment and the spined
// one agree on them; detection reads the base environment.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <gmpxx.h>

#include "dilute/paths.hpp"
#include "dilute/sizebias.hpp"

namespace dilute {

struct WitnessedIndex {
    int n;
    Direction dir;
};

struct BridgeSets {
    std::vector<int> A0;              // sites eligible for an (a)-bridge
    std::vector<WitnessedIndex> A;    // selected (a)-bridges, witness X_{n+1}
    std::vector<int> B;               // open, well-separated U-turn chords
    std::vector<int> C0;              // edges eligible for a (c)-bridge
    std::vector<WitnessedIndex> C;    // selected (c)-bridges, witness direction e
};

namespace detail {

inline bool contains_sorted(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace detail

// Literal clause-by-clause bridge detection.
template <class Env>
BridgeSets detect_bridges(const Env& env, const Path& spine) {
    const int N = spine.length();
    const int d = spine.dim();
    const PathCensus cen = census(spine);
    std::vector<bool> in_u(static_cast<std::size_t>(N) + 1, false);
    for (int n : cen.U) in_u[static_cast<std::size_t>(n)] = true;
    std::vector<bool> in_v2(static_cast<std::size_t>(N) + 1, false);
    for (int n : cen.V2) in_v2[static_cast<std::size_t>(n)] = true;
    const auto& s = spine.sites;
    auto site = [&](int n) -> const Site& { return s[static_cast<std::size_t>(n)]; };
    auto open = [&](const Site& a, const Site& b) { return env.is_open(canonical_edge(a, b)); };

    BridgeSets out;

    // Eligible (a)-sites: previous site deep inside the path (V2), a genuine
    // bend (the square over S_n degenerates when X_{n+1} == X_n), and no
    // U-turn within reach of the square.
    std::vector<bool> in_a0(static_cast<std::size_t>(N) + 1, false);
    for (int n = 1; n <= N - 1; ++n) {
        if (!in_v2[static_cast<std::size_t>(n - 1)]) continue;
        if (spine.increment(n + 1) == spine.increment(n)) continue;
        bool u_near = false;
        for (int i = n; i <= std::min(N, n + 3); ++i) u_near |= in_u[static_cast<std::size_t>(i)];
        if (u_near) continue;
        in_a0[static_cast<std::size_t>(n)] = true;
        out.A0.push_back(n);
    }

    // chi_n: the two edges of the (a)-square over S_n are open; only
    // meaningful on A0 (elsewhere no (a)-bridge is ever selected).
    std::vector<bool> chi(static_cast<std::size_t>(N) + 1, false);
    for (int n : out.A0) {
        const Site across = step(site(n - 1), spine.increment(n + 1));
        chi[static_cast<std::size_t>(n)] = open(site(n - 1), across) && open(site(n + 1), across);
    }
    for (int n : out.A0)
        if (chi[static_cast<std::size_t>(n)] && !chi[static_cast<std::size_t>(n - 1)])
            out.A.push_back(WitnessedIndex{n, spine.increment(n + 1)});

    // (b)-bridges: open U-turn chords; when the preceding U-turn two steps
    // back also has its chord open, this index is skipped so that selected
    // chords never share spine edges.
    for (int n : cen.U) {
        if (!open(site(n), site(n - 3))) continue;
        if (n >= 5 && in_u[static_cast<std::size_t>(n - 2)] && open(site(n - 2), site(n - 5))) continue;
        out.B.push_back(n);
    }

    // Eligible (c)-edges.
    std::vector<bool> in_c0(static_cast<std::size_t>(N), false);
    for (int n = 0; n <= N - 1; ++n) {
        if (!in_v2[static_cast<std::size_t>(n)] || !in_v2[static_cast<std::size_t>(n + 1)]) continue;
        bool u_near = false;
        for (int i = n + 1; i <= std::min(N, n + 3); ++i) u_near |= in_u[static_cast<std::size_t>(i)];
        if (u_near) continue;
        in_c0[static_cast<std::size_t>(n)] = true;
        out.C0.push_back(n);
    }

    // xi_n: an open (c)-bridge exists over (S_n, S_{n+1}). The excluded
    // directions keep the square off the spine and clear of neighbouring
    // squares; +-X_{n+1} are both excluded since either collapses the square.
    std::vector<bool> xi(static_cast<std::size_t>(N), false);
    std::vector<Direction> xi_witness(static_cast<std::size_t>(N));
    for (int n = 0; n <= N - 1; ++n) {
        std::vector<bool> excluded(static_cast<std::size_t>(2 * d), false);
        auto exclude = [&](Direction e) { excluded[static_cast<std::size_t>(direction_index(e))] = true; };
        if (n >= 1) exclude(negate(spine.increment(n)));
        if (n >= 2) exclude(negate(spine.increment(n - 1)));
        exclude(spine.increment(n + 1));
        exclude(negate(spine.increment(n + 1)));
        if (n + 2 <= N) exclude(spine.increment(n + 2));
        if (n + 3 <= N) exclude(spine.increment(n + 3));
        for (int k = 0; k < 2 * d; ++k) {
            if (excluded[static_cast<std::size_t>(k)]) continue;
            const Direction e = direction_from_index(k);
            const Site a = step(site(n), e);
            const Site b = step(site(n + 1), e);
            if (open(site(n), a) && open(a, b) && open(b, site(n + 1))) {
                xi[static_cast<std::size_t>(n)] = true;
                xi_witness[static_cast<std::size_t>(n)] = e;
                break;  // lowest direction code wins
            }
        }
    }
    for (int n : out.C0) {
        if (!xi[static_cast<std::size_t>(n)]) continue;
        if (n >= 1 && xi[static_cast<std::size_t>(n - 1)]) continue;
        if (chi[static_cast<std::size_t>(n)]) continue;
        if (n + 1 <= N - 1 && chi[static_cast<std::size_t>(n + 1)]) continue;
        out.C.push_back(WitnessedIndex{n, xi_witness[static_cast<std::size_t>(n)]});
    }
    return out;
}

// N_{a,b,c} = 2^a * sum_k C(b,k) C(c,k): the number of distinct rerouted
// paths produced by selections.
inline mpz_class count_lower_bound(std::uint64_t n_a, std::uint64_t n_b, std::uint64_t n_c) {
    mpz_class total(0);
    const std::uint64_t kmax = std::min(n_b, n_c);
    for (std::uint64_t k = 0; k <= kmax; ++k) {
        mpz_class cb, cc;
        mpz_bin_uiui(cb.get_mpz_t(), n_b, k);
        mpz_bin_uiui(cc.get_mpz_t(), n_c, k);
        total += cb * cc;
    }
    mpz_class pow2;
    mpz_ui_pow_ui(pow2.get_mpz_t(), 2, n_a);
    return total * pow2;
}

// A selection of bridges to use simultaneously; |beta| == |gamma| keeps the
// rerouted length at N.
struct Selection {
    std::vector<int> alpha;  // subset of A indices
    std::vector<int> beta;   // subset of B indices
    std::vector<int> gamma;  // subset of C indices
};

namespace detail {

struct RerouteEvent {
    int start;  // spine index where the detour leaves the spine
    int end;    // spine index where it rejoins
    char kind;
    Direction dir;
};

inline std::vector<RerouteEvent> selection_events(const Path& spine, const Selection& sel,
                                                  const BridgeSets& sets) {
    if (sel.beta.size() != sel.gamma.size())
        throw std::invalid_argument("build_path: |beta| != |gamma|");
    auto witness_of = [](const std::vector<WitnessedIndex>& v, int n) -> const WitnessedIndex* {
        for (const auto& w : v)
            if (w.n == n) return &w;
        return nullptr;
    };
    std::vector<RerouteEvent> events;
    for (int n : sel.alpha) {
        const WitnessedIndex* w = witness_of(sets.A, n);
        if (!w) throw std::invalid_argument("build_path: alpha index " + std::to_string(n) + " not in A");
        events.push_back(RerouteEvent{n - 1, n + 1, 'a', w->dir});
    }
    for (int n : sel.beta) {
        if (!contains_sorted(sets.B, n))
            throw std::invalid_argument("build_path: beta index " + std::to_string(n) + " not in B");
        events.push_back(RerouteEvent{n - 3, n, 'b', Direction{}});
    }
    for (int n : sel.gamma) {
        const WitnessedIndex* w = witness_of(sets.C, n);
        if (!w) throw std::invalid_argument("build_path: gamma index " + std::to_string(n) + " not in C");
        events.push_back(RerouteEvent{n, n + 1, 'c', w->dir});
    }
    std::sort(events.begin(), events.end(),
              [](const RerouteEvent& x, const RerouteEvent& y) { return x.start < y.start; });
    (void)spine;
    return events;
}

}  // namespace detail

// Reroutes the spine over the selected bridges: (a) swaps S_n for its
// across-the-square twin, (b) shortcuts S_{n-3} -> S_n, (c) detours
// S_n -> S_n+e -> S_{n+1}+e -> S_{n+1}. The result must be a length-N
// self-avoiding path open in the spined environment; with validate set the
// first two are checked here (openness needs the environment and is checked
// by enumerate_selected_paths and the callers that hold one).
inline Path build_path(const Path& spine, const Selection& sel, const BridgeSets& sets,
                       bool validate = true) {
    const int N = spine.length();
    const auto events = detail::selection_events(spine, sel, sets);
    std::vector<Site> sites;
    sites.reserve(static_cast<std::size_t>(N) + 1);
    sites.push_back(spine.sites.front());
    int cursor = 0;
    for (const auto& ev : events) {
        if (ev.start < cursor)
            throw std::logic_error("build_path: overlapping bridge intervals; the selection is not realizable");
        for (int i = cursor + 1; i <= ev.start; ++i) sites.push_back(spine.sites[static_cast<std::size_t>(i)]);
        switch (ev.kind) {
            case 'a':
                sites.push_back(step(spine.sites[static_cast<std::size_t>(ev.start)], ev.dir));
                sites.push_back(spine.sites[static_cast<std::size_t>(ev.end)]);
                break;
            case 'b':
                sites.push_back(spine.sites[static_cast<std::size_t>(ev.end)]);
                break;
            case 'c':
                sites.push_back(step(spine.sites[static_cast<std::size_t>(ev.start)], ev.dir));
                sites.push_back(step(spine.sites[static_cast<std::size_t>(ev.end)], ev.dir));
                sites.push_back(spine.sites[static_cast<std::size_t>(ev.end)]);
                break;
        }
        cursor = ev.end;
    }
    for (int i = cursor + 1; i <= N; ++i) sites.push_back(spine.sites[static_cast<std::size_t>(i)]);
    Path out = Path::from_sites(std::move(sites));
    if (validate) {
        if (out.length() != N)
            throw std::logic_error("build_path: rerouted path has length " + std::to_string(out.length()) +
                                   ", expected " + std::to_string(N));
        if (!is_self_avoiding(out)) throw std::logic_error("build_path: rerouted path is not self-avoiding");
    }
    return out;
}

// Checks that a path is open in the spined environment (spine edges free).
template <class Env>
bool open_in_spined(const Path& p, const Env& base_env, const Path& spine) {
    const SpinedEnvironment<Env> spined(base_env, spine);
    for (std::size_t i = 1; i < p.sites.size(); ++i)
        if (!spined.is_open(canonical_edge(p.sites[i - 1], p.sites[i]))) return false;
    return true;
}

struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const mpz_class& count, std::uint64_t cap)
        : std::runtime_error("enumerate_selected_paths: selection count " + count.get_str() +
                             " exceeds cap " + std::to_string(cap)) {}
};

struct EnumeratedPaths {
    std::vector<Path> paths;
    mpz_class expected;  // count_lower_bound(|A|, |B|, |C|)
};

// Materializes the injection over every consistent selection, asserting
// pairwise distinctness, per-path validity, and the exact count. When an
// environment is supplied, openness in the spined environment is asserted
// per path as well.
template <class Env>
EnumeratedPaths enumerate_selected_paths(const Path& spine, const BridgeSets& sets, std::uint64_t cap,
                                         const Env* base_env) {
    EnumeratedPaths out;
    out.expected = count_lower_bound(sets.A.size(), sets.B.size(), sets.C.size());
    if (out.expected > mpz_class(static_cast<unsigned long>(cap))) throw CapExceeded(out.expected, cap);

    std::set<std::string> keys;
    auto emit = [&](const Selection& sel) {
        Path p = build_path(spine, sel, sets, /*validate=*/true);
        if (base_env && !open_in_spined(p, *base_env, spine))
            throw std::logic_error("enumerate_selected_paths: rerouted path not open in the spined environment");
        std::string key;
        key.reserve(p.steps.size());
        for (Direction e : p.steps) key.push_back(static_cast<char>(direction_code(e)));
        if (!keys.insert(std::move(key)).second)
            throw std::logic_error("enumerate_selected_paths: selection map is not injective");
        out.paths.push_back(std::move(p));
    };

    const std::size_t na = sets.A.size(), nb = sets.B.size(), nc = sets.C.size();
    if (na > 63) throw std::invalid_argument("enumerate_selected_paths: |A| too large to enumerate");
    // next k-subset in lexicographic position order
    auto for_each_subset = [](std::size_t n, std::size_t k, auto&& body) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            body(const_cast<const std::vector<std::size_t>&>(idx));
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    };

    for (std::uint64_t amask = 0; amask < (std::uint64_t{1} << na); ++amask) {
        Selection sel;
        for (std::size_t i = 0; i < na; ++i)
            if ((amask >> i) & 1u) sel.alpha.push_back(sets.A[i].n);
        for (std::size_t k = 0; k <= std::min(nb, nc); ++k) {
            for_each_subset(nb, k, [&](const std::vector<std::size_t>& bidx) {
                for_each_subset(nc, k, [&](const std::vector<std::size_t>& cidx) {
                    sel.beta.clear();
                    sel.gamma.clear();
                    for (std::size_t i : bidx) sel.beta.push_back(sets.B[i]);
                    for (std::size_t i : cidx) sel.gamma.push_back(sets.C[i].n);
                    emit(sel);
                });
            });
        }
    }
    if (mpz_class(static_cast<unsigned long>(out.paths.size())) != out.expected)
        throw std::logic_error("enumerate_selected_paths: enumerated " + std::to_string(out.paths.size()) +
                               " paths, formula gives " + out.expected.get_str());
    return out;
}

struct PartitionFloor {
    mpz_class floor;
    int size_a = 0, size_b = 0, size_c = 0;
};

// Certified lower bound for the spined partition function, from the
// detected bridge sets alone.
template <class Env>
PartitionFloor tilde_partition_floor(const Path& spine, const Env& env) {
    const BridgeSets sets = detect_bridges(env, spine);
    PartitionFloor f;
    f.size_a = static_cast<int>(sets.A.size());
    f.size_b = static_cast<int>(sets.B.size());
    f.size_c = static_cast<int>(sets.C.size());
    f.floor = count_lower_bound(sets.A.size(), sets.B.size(), sets.C.size());
    return f;
}

// The square associated with a detected bridge, for geometric audits.
struct BridgeSquare {
    char kind;
    int n;
    std::vector<Edge> off_spine_edges;
    std::vector<Site> free_sites;
    std::vector<Site> vertices;
};

inline std::vector<BridgeSquare> bridge_squares(const Path& spine, const BridgeSets& sets) {
    std::vector<BridgeSquare> out;
    const auto& s = spine.sites;
    auto site = [&](int n) -> const Site& { return s[static_cast<std::size_t>(n)]; };
    for (const auto& w : sets.A) {
        BridgeSquare q{'a', w.n, {}, {}, {}};
        const Site f = step(site(w.n - 1), w.dir);
        q.off_spine_edges = {canonical_edge(site(w.n - 1), f), canonical_edge(f, site(w.n + 1))};
        q.free_sites = {f};
        q.vertices = {site(w.n - 1), site(w.n), site(w.n + 1), f};
        out.push_back(std::move(q));
    }
    for (int n : sets.B) {
        BridgeSquare q{'b', n, {}, {}, {}};
        q.off_spine_edges = {canonical_edge(site(n), site(n - 3))};
        q.vertices = {site(n - 3), site(n - 2), site(n - 1), site(n)};
        out.push_back(std::move(q));
    }
    for (const auto& w : sets.C) {
        BridgeSquare q{'c', w.n, {}, {}, {}};
        const Site a = step(site(w.n), w.dir);
        const Site b = step(site(w.n + 1), w.dir);
        q.off_spine_edges = {canonical_edge(site(w.n), a), canonical_edge(a, b),
                             canonical_edge(b, site(w.n + 1))};
        q.free_sites = {a, b};
        q.vertices = {site(w.n), a, b, site(w.n + 1)};
        out.push_back(std::move(q));
    }
    return out;
}

struct OverlapAudit {
    bool ok = true;
    std::string detail;
};

// Direct geometric audit of the non-overlap guarantees: squares of detected
// bridges share no off-spine edge, and no free site lies on the spine or in
// another square.
inline OverlapAudit audit_bridge_squares(const Path& spine, const BridgeSets& sets) {
    OverlapAudit audit;
    const auto squares = bridge_squares(spine, sets);
    std::unordered_set<Site, SiteHash> spine_sites(spine.sites.begin(), spine.sites.end());
    std::unordered_set<Edge, EdgeHash> seen_edges;
    for (const auto& q : squares)
        for (const Edge& e : q.off_spine_edges)
            if (!seen_edges.insert(e).second) {
                audit.ok = false;
                audit.detail = "off-spine edge shared with square at n=" + std::to_string(q.n);
                return audit;
            }
    for (std::size_t i = 0; i < squares.size(); ++i) {
        for (const Site& f : squares[i].free_sites) {
            if (spine_sites.count(f)) {
                audit.ok = false;
                audit.detail = "free site of square at n=" + std::to_string(squares[i].n) + " lies on the spine";
                return audit;
            }
            for (std::size_t j = 0; j < squares.size(); ++j) {
                if (i == j) continue;
                for (const Site& v : squares[j].vertices)
                    if (v == f) {
                        audit.ok = false;
                        audit.detail = "free site of square at n=" + std::to_string(squares[i].n) +
                                       " lies in square at n=" + std::to_string(squares[j].n);
                        return audit;
                    }
            }
        }
    }
    return audit;
}

}  // namespace dilute
