#include <catch2/catch_amalgamated.hpp>

#include "dilute/paths.hpp"
#include "dilute/refwalks.hpp"
#include "oracles.hpp"

using namespace dilute;

namespace {

Path make_path(int d, std::initializer_list<int> codes) {
    std::vector<Direction> steps;
    for (int c : codes) steps.push_back(direction_from_code(c));
    return Path(d, std::move(steps));
}

}  // namespace

TEST_CASE("is_self_avoiding", "[paths]") {
    CHECK(is_self_avoiding(make_path(2, {1, 1, 1})));
    CHECK_FALSE(is_self_avoiding(make_path(2, {1, -1})));
    CHECK_FALSE(is_self_avoiding(make_path(2, {1, 2, -1, -2})));
}

TEST_CASE("count_saw spot values", "[paths]") {
    CHECK(count_saw(2, 1) == 4);
    CHECK(count_saw(2, 2) == 12);
    CHECK(count_saw(2, 3) == 36);
    CHECK(count_saw(2, 4) == 100);
    CHECK(count_saw(3, 1) == 6);
    CHECK(count_saw(3, 2) == 30);
    CHECK(count_saw(3, 3) == 150);
}

TEST_CASE("count_saw matches the no-pruning oracle at small sizes", "[paths]") {
    for (int d : {2, 3})
        for (int N = 1; N <= 5; ++N)
            CHECK(count_saw(d, N) == oracles::slow_count_saw(d, N));
}

TEST_CASE("count_saw budget guard", "[paths]") {
    CHECK_THROWS_AS(count_saw(3, 30, /*budget=*/1000), BudgetExceeded);
}

TEST_CASE("count_saw_no4", "[paths]") {
    CHECK(count_saw_no4(2, 3) == 36);   // no constraint binds before step 4
    CHECK(count_saw_no4(2, 4) == 100);  // 108 non-backtracking minus 8 closed squares
    for (int d : {2, 3})
        for (int N : {3, 5, 6}) {
            mpz_class nb(2 * d);
            for (int i = 1; i < N; ++i) nb *= 2 * d - 1;
            CHECK(count_saw(d, N) <= count_saw_no4(d, N));
            CHECK(count_saw_no4(d, N) <= nb);
        }
}

TEST_CASE("count_open_saw degenerate environments", "[paths]") {
    const Site o = Site::origin(2);
    Environment full(1.0, 1), empty(0.0, 1);
    for (int N : {1, 2, 3, 4, 5, 6}) CHECK(count_open_saw(full, N, o) == count_saw(2, N));
    for (int N : {1, 2, 3}) CHECK(count_open_saw(empty, N, o) == 0);
}

TEST_CASE("count_open_saw on one open unit square", "[paths]") {
    const Site o = Site::origin(2);
    FiniteEnvironment env({Edge{o, 0}, Edge{o, 1}, Edge{Site({1, 0}), 1}, Edge{Site({0, 1}), 0}});
    for (std::size_t i = 0; i < env.size(); ++i) env.set_state(i, true);
    CHECK(count_open_saw(env, 2, o) == 2);
    CHECK(count_open_saw(env, 3, o) == 2);
    CHECK(count_open_saw(env, 4, o) == 0);  // the square cannot be closed self-avoidingly
}

TEST_CASE("opening an edge never decreases the open-path count", "[paths]") {
    const Site o = Site::origin(2);
    const auto edges = relevant_edges(3, o);
    StreamRng rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        FiniteEnvironment env(edges);
        for (std::size_t i = 0; i < env.size(); ++i) env.set_state(i, rng.next_below(2) == 0);
        const std::uint64_t base = count_open_saw_u64(env, 3, o);
        for (std::size_t i = 0; i < env.size(); ++i) {
            if (env.state(i)) continue;
            FiniteEnvironment more = env;
            more.set_state(i, true);
            CHECK(count_open_saw_u64(more, 3, o) >= base);
        }
    }
}

TEST_CASE("census on the straight path", "[paths]") {
    const int N = 8;
    const Path p = make_path(2, {1, 1, 1, 1, 1, 1, 1, 1});
    const PathCensus c = census(p);
    CHECK(c.U.empty());
    REQUIRE(c.T.size() == static_cast<std::size_t>(N - 2));
    CHECK(c.T.front() == 2);
    CHECK(c.T.back() == N - 1);
    CHECK(c.V1.size() == static_cast<std::size_t>(N + 1));
    CHECK(c.V2.size() == static_cast<std::size_t>(N + 1));
}

TEST_CASE("census detects the three-step U-turn", "[paths]") {
    const Path p = make_path(2, {1, 2, -1});
    const PathCensus c = census(p);
    CHECK(c.U == std::vector<int>{3});
    CHECK(c.T.empty());
}

TEST_CASE("census of the staircase", "[paths]") {
    // +x,+y alternating: no U-turns, no straight stretches, and every site
    // pair more than two steps apart is at distance at least three.
    const Path p = make_path(2, {1, 2, 1, 2, 1, 2, 1, 2});
    const PathCensus c = census(p);
    CHECK(c.U.empty());
    CHECK(c.T.empty());
    CHECK(c.V1.size() == 9);
    CHECK(c.V2.size() == 9);
}

TEST_CASE("census rejects non-self-avoiding paths", "[paths]") {
    CHECK_THROWS_AS(census(make_path(2, {1, -1})), std::invalid_argument);
}

TEST_CASE("V2 is contained in V1 on sampled walks", "[paths]") {
    StreamRng rng(5, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const Path p = sample_uniform_saw(3, 12, rng).path;
        const PathCensus c = census(p);
        for (int n : c.V2) CHECK(std::binary_search(c.V1.begin(), c.V1.end(), n));
    }
}

TEST_CASE("the two T conventions differ by an index shift", "[paths]") {
    StreamRng rng(6, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const Path p = sample_uniform_saw(2, 10, rng).path;
        const PathCensus lag = census(p, TConvention::kLagging);
        const PathCensus lead = census(p, TConvention::kLeading);
        std::vector<int> shifted;
        for (int n : lead.T)
            if (n + 1 <= p.length() - 1) shifted.push_back(n + 1);
        CHECK(lag.T == shifted);
    }
}

TEST_CASE("is_good_spine", "[paths]") {
    const Path straight = make_path(2, {1, 1, 1, 1, 1, 1, 1, 1});
    for (double eps : {0.1, 0.5, 0.9}) CHECK_FALSE(is_good_spine(straight, eps));
    CHECK_THROWS_AS(is_good_spine(straight, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(is_good_spine(straight, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(is_good_spine(straight, -0.2), std::invalid_argument);

    StreamRng rng(7, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Path p = sample_uniform_saw(4, 40, rng).path;
        if (is_good_spine(p, 0.5)) {
            const PathCensus c = census(p);
            CHECK(good_spine_bands(c, p.length(), p.dim(), 0.5));
        }
    }
}

TEST_CASE("normalized_partition", "[paths]") {
    const Site o = Site::origin(2);
    Environment full(1.0, 1);
    CHECK(normalized_partition(full, 3, 1.0, o) == 1.0);
    Environment empty(0.0, 1);
    CHECK(normalized_partition(empty, 3, 0.5, o) == 0.0);
    CHECK_THROWS_AS(normalized_partition(full, 3, 0.0, o), std::invalid_argument);
}

TEST_CASE("expected normalized partition is one on exhaustive instances", "[paths]") {
    const Site o = Site::origin(2);
    const int N = 2;
    const auto edges = relevant_edges(N, o);
    const mpq_class p(1, 2);
    mpq_class denom(count_saw(2, N));
    denom *= p * p;
    mpq_class total(0);
    enumerate_finite(edges, p, [&](const FiniteEnvironment& env, const mpq_class& w) {
        total += w * mpq_class(static_cast<unsigned long>(count_open_saw_u64(env, N, o))) / denom;
    });
    CHECK(total == 1);
}

TEST_CASE("growth_sequence at p = 1 gives the SAW roots", "[paths]") {
    Environment full(1.0, 1);
    const auto g = growth_sequence(full, 3, Site::origin(2));
    REQUIRE(g.size() == 3);
    CHECK(g[0].Z == 4);
    CHECK(g[1].Z == 12);
    CHECK(g[2].Z == 36);
    CHECK(g[0].root == Catch::Approx(4.0));
    CHECK(g[1].root == Catch::Approx(std::sqrt(12.0)));
    CHECK(g[2].root == Catch::Approx(std::cbrt(36.0)));
}

TEST_CASE("growth_sequence dies on a finite cluster", "[paths]") {
    const Site o = Site::origin(2);
    FiniteEnvironment env({Edge{o, 0}, Edge{Site({1, 0}), 0}});
    env.set_state(0, true);
    env.set_state(1, true);
    const auto g = growth_sequence(env, 4, o);
    CHECK(g[0].Z == 1);
    CHECK(g[1].Z == 1);
    CHECK(g[2].Z == 0);
    CHECK(g[3].Z == 0);
    Environment empty(0.0, 9);
    for (const auto& pt : growth_sequence(empty, 3, o)) CHECK(pt.Z == 0);
}

TEST_CASE("enumerate_saw visits each self-avoiding path once", "[paths]") {
    for (int N : {1, 3, 5}) {
        std::uint64_t visits = 0;
        enumerate_saw(2, N, [&](const std::vector<Site>& sites) {
            REQUIRE(sites.size() == static_cast<std::size_t>(N + 1));
            ++visits;
        });
        CHECK(mpz_class(static_cast<unsigned long>(visits)) == count_saw(2, N));
    }
}

TEST_CASE("path JSON round trip", "[paths]") {
    // covered in serialize-dependent tests via experiments; here only the
    // code mapping
    const Path p = make_path(3, {1, -3, 2, 3});
    CHECK(p.sites.back() == Site({1, 1, 0}));
    CHECK(direction_code(p.increment(2)) == -3);
}
