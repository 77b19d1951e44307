#pragma once

// Geometry of the d-dimensional hypercubic lattice: sites, step directions,
// undirected edges and their canonical byte encoding.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dilute {

// A lattice site. The dimension is carried implicitly by coords.size().
struct Site {
    std::vector<std::int32_t> coords;

    Site() = default;
    explicit Site(std::vector<std::int32_t> c) : coords(std::move(c)) {}
    static Site origin(int d) { return Site(std::vector<std::int32_t>(static_cast<std::size_t>(d), 0)); }

    int dim() const { return static_cast<int>(coords.size()); }
    std::int32_t operator[](int axis) const { return coords[static_cast<std::size_t>(axis)]; }
    std::int32_t& operator[](int axis) { return coords[static_cast<std::size_t>(axis)]; }

    bool operator==(const Site& o) const { return coords == o.coords; }
    bool operator!=(const Site& o) const { return coords != o.coords; }
    bool operator<(const Site& o) const { return coords < o.coords; }
};

// One of the 2d unit steps: axis in [0, d), sign in {+1, -1}.
struct Direction {
    std::uint8_t axis = 0;
    std::int8_t sign = 1;

    bool operator==(const Direction& o) const { return axis == o.axis && sign == o.sign; }
    bool operator!=(const Direction& o) const { return !(*this == o); }
};

inline Direction negate(Direction e) { return Direction{e.axis, static_cast<std::int8_t>(-e.sign)}; }

// Deterministic direction order: axis-major, positive sign first.
// index k in [0, 2d) maps to axis k/2, sign + for even k.
inline Direction direction_from_index(int k) {
    return Direction{static_cast<std::uint8_t>(k / 2), static_cast<std::int8_t>(k % 2 == 0 ? 1 : -1)};
}

inline int direction_index(Direction e) { return 2 * e.axis + (e.sign < 0 ? 1 : 0); }

// Signed wire code: +(axis+1) for positive steps, -(axis+1) for negative.
inline int direction_code(Direction e) { return e.sign > 0 ? e.axis + 1 : -(e.axis + 1); }

inline Direction direction_from_code(int code) {
    if (code == 0) throw std::invalid_argument("direction code must be nonzero");
    return Direction{static_cast<std::uint8_t>(std::abs(code) - 1), static_cast<std::int8_t>(code > 0 ? 1 : -1)};
}

inline Site step(const Site& s, Direction e) {
    Site t = s;
    t[e.axis] += e.sign;
    return t;
}

// The 2d nearest neighbours of s, in the fixed direction order.
inline std::vector<Site> neighbors(const Site& s) {
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(2 * s.dim()));
    for (int k = 0; k < 2 * s.dim(); ++k) out.push_back(step(s, direction_from_index(k)));
    return out;
}

// L1 distance, i.e. the graph distance of the hypercubic lattice.
inline std::int64_t graph_distance(const Site& a, const Site& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("graph_distance: dimension mismatch");
    std::int64_t d = 0;
    for (int i = 0; i < a.dim(); ++i) d += std::llabs(static_cast<std::int64_t>(a[i]) - b[i]);
    return d;
}

inline bool adjacent(const Site& a, const Site& b) { return graph_distance(a, b) == 1; }

// Undirected edge in canonical form: base is the endpoint with the smaller
// coordinate on the distinguishing axis, so {a,b} maps to a unique value.
struct Edge {
    Site base;
    std::uint32_t axis = 0;

    bool operator==(const Edge& o) const { return axis == o.axis && base == o.base; }
    bool operator!=(const Edge& o) const { return !(*this == o); }
    bool operator<(const Edge& o) const {
        if (base.coords != o.base.coords) return base.coords < o.base.coords;
        return axis < o.axis;
    }

    Site other_endpoint() const {
        Site t = base;
        t[static_cast<int>(axis)] += 1;
        return t;
    }
};

inline Edge canonical_edge(const Site& a, const Site& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("canonical_edge: dimension mismatch");
    int axis = -1;
    for (int i = 0; i < a.dim(); ++i) {
        if (a[i] != b[i]) {
            if (axis >= 0 || std::abs(a[i] - b[i]) != 1) axis = -2;
            if (axis == -1) axis = i;
        }
    }
    if (axis < 0) throw std::invalid_argument("canonical_edge: sites are not adjacent");
    return Edge{a[axis] < b[axis] ? a : b, static_cast<std::uint32_t>(axis)};
}

inline Edge edge_from(const Site& s, Direction e) {
    if (e.sign > 0) return Edge{s, e.axis};
    return Edge{step(s, e), e.axis};
}

namespace detail {

inline void append_uleb128(std::string& out, std::uint64_t v) {
    do {
        std::uint8_t b = v & 0x7f;
        v >>= 7;
        if (v) b |= 0x80;
        out.push_back(static_cast<char>(b));
    } while (v);
}

inline std::uint64_t zigzag64(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

}  // namespace detail

// Canonical byte encoding of an edge: ULEB128(d), then each base coordinate
// as ZigZag-LEB128, then ULEB128(axis). Bit-exact across platforms; this is
// the input of the environment hash.
inline std::string encode_edge(const Edge& e) {
    std::string out;
    detail::append_uleb128(out, static_cast<std::uint64_t>(e.base.dim()));
    for (int i = 0; i < e.base.dim(); ++i)
        detail::append_uleb128(out, detail::zigzag64(e.base[i]));
    detail::append_uleb128(out, e.axis);
    return out;
}

struct SiteHash {
    std::size_t operator()(const Site& s) const {
        std::uint64_t h = 14695981039346656037ull;
        for (std::int32_t c : s.coords) {
            h ^= static_cast<std::uint32_t>(c);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct EdgeHash {
    std::size_t operator()(const Edge& e) const {
        std::uint64_t h = SiteHash{}(e.base);
        h ^= e.axis + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace dilute
