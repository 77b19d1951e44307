#pragma once

// Nearest-neighbour paths, self-avoidance, the U/T/V1/V2 censuses, and exact
// counting: |S_N|, |S4_N| and the open-path partition functions.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <gmpxx.h>

#include "dilute/environment.hpp"
#include "dilute/lattice.hpp"

namespace dilute {

struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(std::uint64_t visited)
        : std::runtime_error("enumeration budget exceeded after " + std::to_string(visited) + " nodes"),
          visited_nodes(visited) {}
    std::uint64_t visited_nodes;
};

inline constexpr std::uint64_t kDefaultDfsBudget = 400'000'000ull;

// An origin-anchored step sequence. Holding a Path does not assert
// self-avoidance; is_self_avoiding tests it.
struct Path {
    Site start;
    std::vector<Direction> steps;
    std::vector<Site> sites;  // derived, sites[0] == start

    Path() = default;
    Path(int d, std::vector<Direction> s, Site from) : start(std::move(from)), steps(std::move(s)) {
        if (start.dim() != d) throw std::invalid_argument("Path: start dimension mismatch");
        rebuild_sites();
    }
    Path(int d, std::vector<Direction> s) : Path(d, std::move(s), Site::origin(d)) {}

    // Recover the step sequence from a site list (consecutive sites adjacent).
    static Path from_sites(std::vector<Site> sites_in) {
        if (sites_in.empty()) throw std::invalid_argument("Path: empty site list");
        Path p;
        p.start = sites_in.front();
        p.steps.reserve(sites_in.size() - 1);
        for (std::size_t i = 1; i < sites_in.size(); ++i) {
            const Site& a = sites_in[i - 1];
            const Site& b = sites_in[i];
            int axis = -1;
            for (int j = 0; j < a.dim(); ++j)
                if (a[j] != b[j]) {
                    if (axis != -1 || std::abs(a[j] - b[j]) != 1)
                        throw std::invalid_argument("Path: consecutive sites not adjacent");
                    axis = j;
                }
            if (axis == -1) throw std::invalid_argument("Path: repeated consecutive site");
            p.steps.push_back(Direction{static_cast<std::uint8_t>(axis),
                                        static_cast<std::int8_t>(sites_in[i][axis] > a[axis] ? 1 : -1)});
        }
        p.sites = std::move(sites_in);
        return p;
    }

    int dim() const { return start.dim(); }
    int length() const { return static_cast<int>(steps.size()); }

    // n-th increment X_n = S_n - S_{n-1}, n in [1, N].
    Direction increment(int n) const { return steps[static_cast<std::size_t>(n - 1)]; }

    void rebuild_sites() {
        sites.clear();
        sites.reserve(steps.size() + 1);
        sites.push_back(start);
        for (Direction e : steps) sites.push_back(step(sites.back(), e));
    }
};

inline bool is_self_avoiding(const Path& p) {
    std::unordered_set<Site, SiteHash> seen;
    for (const Site& s : p.sites)
        if (!seen.insert(s).second) return false;
    return true;
}

// The four per-index census sets of a self-avoiding path:
//   U:  n in [3,N] with S_n adjacent to S_{n-3} (U-turns)
//   T:  indices around which the path does not bend (see TConvention)
//   V1: n such that every site more than one step away is at distance > 1
//   V2: n such that every site more than two steps away is at distance > 2
struct PathCensus {
    std::vector<int> U, T, V1, V2;
};

// The non-bending index set can be read two ways from a one-sided increment
// comparison; both are exposed, differing only by an index shift.
enum class TConvention {
    kLagging,  // n in [2, N-1] with X_n == X_{n-1}   (default)
    kLeading,  // n in [1, N-1] with X_{n+1} == X_n
};

namespace detail {

// Displacement vectors of L1 norm exactly `norm` (1 or 2), d-dimensional.
inline std::vector<std::vector<std::int32_t>> sphere_offsets(int d, int norm) {
    std::vector<std::vector<std::int32_t>> out;
    std::vector<std::int32_t> v(static_cast<std::size_t>(d), 0);
    if (norm == 1) {
        for (int i = 0; i < d; ++i)
            for (int s : {1, -1}) {
                v[static_cast<std::size_t>(i)] = s;
                out.push_back(v);
                v[static_cast<std::size_t>(i)] = 0;
            }
    } else if (norm == 2) {
        for (int i = 0; i < d; ++i)
            for (int s : {2, -2}) {
                v[static_cast<std::size_t>(i)] = s;
                out.push_back(v);
                v[static_cast<std::size_t>(i)] = 0;
            }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                for (int si : {1, -1})
                    for (int sj : {1, -1}) {
                        v[static_cast<std::size_t>(i)] = si;
                        v[static_cast<std::size_t>(j)] = sj;
                        out.push_back(v);
                        v[static_cast<std::size_t>(i)] = 0;
                        v[static_cast<std::size_t>(j)] = 0;
                    }
    }
    return out;
}

// Census computation without the self-avoidance gate; used for statistics of
// Markovian walks that may self-intersect.
inline PathCensus census_unchecked(const Path& p, TConvention conv) {
    const int N = p.length();
    const int d = p.dim();
    PathCensus c;
    for (int n = 3; n <= N; ++n)
        if (graph_distance(p.sites[static_cast<std::size_t>(n)], p.sites[static_cast<std::size_t>(n - 3)]) == 1)
            c.U.push_back(n);
    if (conv == TConvention::kLagging) {
        for (int n = 2; n <= N - 1; ++n)
            if (p.increment(n) == p.increment(n - 1)) c.T.push_back(n);
    } else {
        for (int n = 1; n <= N - 1; ++n)
            if (p.increment(n + 1) == p.increment(n)) c.T.push_back(n);
    }
    std::unordered_map<Site, std::vector<int>, SiteHash> where;
    for (int n = 0; n <= N; ++n) where[p.sites[static_cast<std::size_t>(n)]].push_back(n);
    const auto near1 = sphere_offsets(d, 1);
    const auto near2 = sphere_offsets(d, 2);
    auto violates = [&](int n, int radius) {
        const Site& s = p.sites[static_cast<std::size_t>(n)];
        auto check = [&](const std::vector<std::int32_t>& off) {
            Site t = s;
            for (int i = 0; i < d; ++i) t[i] += off[static_cast<std::size_t>(i)];
            auto it = where.find(t);
            if (it == where.end()) return false;
            for (int m : it->second)
                if (std::abs(m - n) > radius) return true;
            return false;
        };
        for (const auto& off : near1)
            if (check(off)) return true;
        if (radius == 2)
            for (const auto& off : near2)
                if (check(off)) return true;
        // A duplicate of the site itself also violates the band.
        for (int m : where[s])
            if (std::abs(m - n) > radius) return true;
        return false;
    };
    for (int n = 0; n <= N; ++n) {
        if (!violates(n, 1)) c.V1.push_back(n);
        if (!violates(n, 2)) c.V2.push_back(n);
    }
    return c;
}

}  // namespace detail

inline PathCensus census(const Path& p, TConvention conv = TConvention::kLagging) {
    if (!is_self_avoiding(p)) throw std::invalid_argument("census: path is not self-avoiding");
    return detail::census_unchecked(p, conv);
}

// Band membership for the good-spine set, with no restriction on eps; the
// run_good_spine_experiment driver uses this directly for degenerate eps.
inline bool good_spine_bands(const PathCensus& c, int N, int d, double eps) {
    const double u = static_cast<double>(c.U.size());
    return static_cast<double>(c.V2.size()) >= (1.0 - eps) * N &&
           static_cast<double>(c.T.size()) <= eps * N &&
           u >= (1.0 - eps) * N / (2.0 * d) && u <= (1.0 + eps) * N / (2.0 * d);
}

inline bool is_good_spine(const Path& p, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("is_good_spine: eps must lie in (0,1)");
    return good_spine_bands(census(p), p.length(), p.dim(), eps);
}

namespace detail {

// Occupancy over the box |x - start|_inf <= N, as a flat grid when it fits
// in memory and as a hash set otherwise.
class Occupancy {
  public:
    Occupancy(const Site& start, int N) : start_(start), radius_(N) {
        const int d = start.dim();
        std::uint64_t cells = 1;
        const std::uint64_t side = 2 * static_cast<std::uint64_t>(N) + 1;
        bool fits = true;
        for (int i = 0; i < d; ++i) {
            if (cells > (std::uint64_t{1} << 27) / side) {
                fits = false;
                break;
            }
            cells *= side;
        }
        if (fits) {
            grid_.assign(cells, 0);
            strides_.resize(static_cast<std::size_t>(d));
            std::int64_t st = 1;
            for (int i = 0; i < d; ++i) {
                strides_[static_cast<std::size_t>(i)] = st;
                st *= static_cast<std::int64_t>(side);
            }
        }
    }

    bool uses_grid() const { return !grid_.empty(); }

    std::int64_t index_of(const Site& s) const {
        std::int64_t idx = 0;
        for (int i = 0; i < s.dim(); ++i)
            idx += (static_cast<std::int64_t>(s[i]) - start_[i] + radius_) * strides_[static_cast<std::size_t>(i)];
        return idx;
    }

    bool occupied(const Site& s, std::int64_t idx) const {
        return uses_grid() ? grid_[static_cast<std::size_t>(idx)] != 0 : set_.count(s) != 0;
    }
    void occupy(const Site& s, std::int64_t idx) {
        if (uses_grid())
            grid_[static_cast<std::size_t>(idx)] = 1;
        else
            set_.insert(s);
    }
    void release(const Site& s, std::int64_t idx) {
        if (uses_grid())
            grid_[static_cast<std::size_t>(idx)] = 0;
        else
            set_.erase(s);
    }
    std::int64_t stride(int axis) const { return uses_grid() ? strides_[static_cast<std::size_t>(axis)] : 0; }

  private:
    Site start_;
    int radius_;
    std::vector<std::uint8_t> grid_;
    std::vector<std::int64_t> strides_;
    std::unordered_set<Site, SiteHash> set_;
};

struct CountingDfs {
    int N;
    std::uint64_t budget;
    std::uint64_t visited = 0;
    std::vector<std::uint64_t> per_depth;  // per_depth[n-1] = number of length-n prefixes reached

    void tick() {
        if (++visited > budget) throw BudgetExceeded(visited);
    }
};

}  // namespace detail

// Exact |S_n| for n = 1..N by pruned depth-first search with an occupancy
// index; children are explored in the fixed direction order.
inline std::vector<std::uint64_t> saw_counts_per_depth(int d, int N,
                                                       std::uint64_t budget = kDefaultDfsBudget) {
    if (d < 2) throw std::invalid_argument("saw_counts_per_depth: d must be >= 2");
    if (N < 0) throw std::invalid_argument("saw_counts_per_depth: N must be >= 0");
    detail::CountingDfs dfs{N, budget};
    dfs.per_depth.assign(static_cast<std::size_t>(N), 0);
    if (N == 0) return dfs.per_depth;
    Site cur = Site::origin(d);
    detail::Occupancy occ(cur, N);
    std::int64_t idx = occ.index_of(cur);
    occ.occupy(cur, idx);

    auto rec = [&](auto&& self, int depth, std::int64_t cur_idx) -> void {
        for (int k = 0; k < 2 * d; ++k) {
            const Direction e = direction_from_index(k);
            cur[e.axis] += e.sign;
            const std::int64_t nidx = occ.uses_grid() ? cur_idx + e.sign * occ.stride(e.axis) : occ.index_of(cur);
            if (!occ.occupied(cur, nidx)) {
                dfs.tick();
                dfs.per_depth[static_cast<std::size_t>(depth)]++;
                if (depth + 1 < N) {
                    occ.occupy(cur, nidx);
                    self(self, depth + 1, nidx);
                    occ.release(cur, nidx);
                }
            }
            cur[e.axis] -= e.sign;
        }
    };
    rec(rec, 0, idx);
    return dfs.per_depth;
}

// |S_N|: the number of N-step self-avoiding paths from the origin.
inline mpz_class count_saw(int d, int N, std::uint64_t budget = kDefaultDfsBudget) {
    if (N == 0) return 1;
    return mpz_class(static_cast<unsigned long>(0)) + saw_counts_per_depth(d, N, budget).back();
}

// |S4_N|: paths with S_n not in {S_{n-2}, S_{n-4}} for all n (no backtrack,
// no loop of length four).
inline mpz_class count_saw_no4(int d, int N, std::uint64_t budget = kDefaultDfsBudget) {
    if (d < 2) throw std::invalid_argument("count_saw_no4: d must be >= 2");
    if (N < 0) throw std::invalid_argument("count_saw_no4: N must be >= 0");
    if (N == 0) return 1;
    detail::CountingDfs dfs{N, budget};
    std::vector<Direction> stack;  // full increment history of the current prefix
    std::uint64_t count = 0;
    auto rec = [&](auto&& self, int depth) -> void {
        for (int k = 0; k < 2 * d; ++k) {
            const Direction e = direction_from_index(k);
            if (!stack.empty() && e == negate(stack.back())) continue;  // S_n == S_{n-2}
            if (stack.size() >= 3) {
                // S_n == S_{n-4} iff the last four increments cancel
                std::int32_t nonzero = 0;
                std::vector<std::int32_t> v(static_cast<std::size_t>(d), 0);
                for (std::size_t i = stack.size() - 3; i < stack.size(); ++i) v[stack[i].axis] += stack[i].sign;
                v[e.axis] += e.sign;
                for (std::int32_t x : v) nonzero |= x;
                if (nonzero == 0) continue;
            }
            dfs.tick();
            if (depth + 1 == N) {
                ++count;
            } else {
                stack.push_back(e);
                self(self, depth + 1);
                stack.pop_back();
            }
        }
    };
    rec(rec, 0);
    return mpz_class(static_cast<unsigned long>(0)) + count;
}

// Exact Z_n(env, start) for n = 1..N: open self-avoiding path counts, with
// closed edges pruned at the first use.
template <class Env>
std::vector<std::uint64_t> open_saw_counts_per_depth(const Env& env, int N, const Site& start,
                                                     std::uint64_t budget = kDefaultDfsBudget) {
    if (N < 0) throw std::invalid_argument("open_saw_counts_per_depth: N must be >= 0");
    std::vector<std::uint64_t> per_depth(static_cast<std::size_t>(N), 0);
    if (N == 0) return per_depth;
    const int d = start.dim();
    detail::CountingDfs dfs{N, budget};
    Site cur = start;
    detail::Occupancy occ(start, N);
    std::int64_t idx = occ.index_of(cur);
    occ.occupy(cur, idx);
    auto rec = [&](auto&& self, int depth, std::int64_t cur_idx) -> void {
        for (int k = 0; k < 2 * d; ++k) {
            const Direction e = direction_from_index(k);
            const Edge edge = edge_from(cur, e);
            cur[e.axis] += e.sign;
            const std::int64_t nidx = occ.uses_grid() ? cur_idx + e.sign * occ.stride(e.axis) : occ.index_of(cur);
            if (!occ.occupied(cur, nidx) && env.is_open(edge)) {
                dfs.tick();
                per_depth[static_cast<std::size_t>(depth)]++;
                if (depth + 1 < N) {
                    occ.occupy(cur, nidx);
                    self(self, depth + 1, nidx);
                    occ.release(cur, nidx);
                }
            }
            cur[e.axis] -= e.sign;
        }
    };
    rec(rec, 0, idx);
    return per_depth;
}

template <class Env>
std::uint64_t count_open_saw_u64(const Env& env, int N, const Site& start,
                                 std::uint64_t budget = kDefaultDfsBudget) {
    if (N == 0) return 1;
    return open_saw_counts_per_depth(env, N, start, budget).back();
}

// Z_{N,start}(env): the number of env-open self-avoiding N-step paths.
template <class Env>
mpz_class count_open_saw(const Env& env, int N, const Site& start, std::uint64_t budget = kDefaultDfsBudget) {
    return mpz_class(static_cast<unsigned long>(0)) + count_open_saw_u64(env, N, start, budget);
}

// W_N = Z_N / (p^N |S_N|), computed through exact rationals. The double p is
// treated as the exact dyadic rational it is.
template <class Env>
double normalized_partition(const Env& env, int N, double p, const Site& start,
                            std::uint64_t budget = kDefaultDfsBudget) {
    if (p <= 0.0) throw std::invalid_argument("normalized_partition: p must be positive");
    const std::uint64_t z = count_open_saw_u64(env, N, start, budget);
    if (z == 0) return 0.0;
    const mpz_class s = count_saw(start.dim(), N, budget);
    mpq_class pq(p);
    mpq_class denom(1);
    for (int i = 0; i < N; ++i) denom *= pq;
    denom *= mpq_class(s);
    mpq_class w = mpq_class(static_cast<unsigned long>(z)) / denom;
    return w.get_d();
}

struct GrowthPoint {
    int N;
    std::uint64_t Z;
    double root;  // Z^{1/N}, 0 when Z = 0
};

// Exact Z_N for N = 1..N_max with their N-th roots.
template <class Env>
std::vector<GrowthPoint> growth_sequence(const Env& env, int N_max, const Site& start,
                                         std::uint64_t budget = kDefaultDfsBudget) {
    const auto counts = open_saw_counts_per_depth(env, N_max, start, budget);
    std::vector<GrowthPoint> out;
    out.reserve(static_cast<std::size_t>(N_max));
    for (int n = 1; n <= N_max; ++n) {
        const std::uint64_t z = counts[static_cast<std::size_t>(n - 1)];
        out.push_back(GrowthPoint{n, z, z == 0 ? 0.0 : std::pow(static_cast<double>(z), 1.0 / n)});
    }
    return out;
}

// Visit every self-avoiding path of length exactly N from start, in the
// fixed child order. The visitor receives the site sequence. Small-scale
// enumeration only.
template <class Visitor>
void enumerate_saw(int d, int N, Visitor&& visit, const Site& start) {
    std::vector<Site> sites{start};
    std::unordered_set<Site, SiteHash> used{start};
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == N) {
            visit(const_cast<const std::vector<Site>&>(sites));
            return;
        }
        for (int k = 0; k < 2 * d; ++k) {
            Site nxt = step(sites.back(), direction_from_index(k));
            if (used.count(nxt)) continue;
            used.insert(nxt);
            sites.push_back(nxt);
            self(self, depth + 1);
            sites.pop_back();
            used.erase(nxt);
        }
    };
    rec(rec, 0);
}

template <class Visitor>
void enumerate_saw(int d, int N, Visitor&& visit) {
    enumerate_saw(d, N, std::forward<Visitor>(visit), Site::origin(d));
}

}  // namespace dilute
