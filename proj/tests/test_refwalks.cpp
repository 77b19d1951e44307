#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "dilute/refwalks.hpp"
#include "dilute/util.hpp"
#include "oracles.hpp"

using namespace dilute;

TEST_CASE("pi1 one-step law is uniform", "[refwalks]") {
    StreamRng rng(42, 0);
    const int draws = 100000;
    std::map<int, int> counts;
    for (int i = 0; i < draws; ++i) counts[direction_index(sample_pi1(2, 1, rng).steps[0])]++;
    REQUIRE(counts.size() == 4);
    double chi2 = 0.0;
    for (const auto& [k, c] : counts) {
        const double e = draws / 4.0;
        chi2 += (c - e) * (c - e) / e;
    }
    CHECK(chi2 < 16.27);  // chi-square_3 at the 0.1% level
}

TEST_CASE("pi1 never backtracks", "[refwalks]") {
    StreamRng rng(43, 0);
    for (int t = 0; t < 100; ++t) {
        const Path p = sample_pi1(3, 20, rng);
        for (std::size_t n = 2; n < p.sites.size(); ++n) CHECK(p.sites[n] != p.sites[n - 2]);
    }
}

TEST_CASE("pi1 self-avoidance frequency at d=2, N=4", "[refwalks]") {
    StreamRng rng(44, 0);
    const int draws = 100000;
    int sa = 0;
    for (int i = 0; i < draws; ++i) sa += is_self_avoiding(sample_pi1(2, 4, rng));
    const double expect = 100.0 / 108.0;
    const double freq = static_cast<double>(sa) / draws;
    const double se = std::sqrt(expect * (1 - expect) / draws);
    CHECK(std::abs(freq - expect) <= 4 * se);
}

TEST_CASE("pi1 uniformity by decision-tree enumeration at d=2, N<=4", "[refwalks]") {
    // walk the sampler's decision tree symbolically: every leaf must carry
    // probability 1/(2d (2d-1)^{N-1}) and leaves biject with
    // non-backtracking paths
    const int d = 2;
    for (int N : {1, 2, 3, 4}) {
        std::uint64_t leaves = 0;
        std::vector<Direction> steps;
        auto rec = [&](auto&& self, int depth) -> void {
            if (depth == N) {
                ++leaves;
                return;
            }
            for (int k = 0; k < 2 * d; ++k) {
                const Direction e = direction_from_index(k);
                if (depth > 0 && e == negate(steps.back())) continue;
                steps.push_back(e);
                self(self, depth + 1);
                steps.pop_back();
            }
        };
        rec(rec, 0);
        mpz_class expect(2 * d);
        for (int i = 1; i < N; ++i) expect *= 2 * d - 1;
        CHECK(mpz_class(static_cast<unsigned long>(leaves)) == expect);
    }
}

TEST_CASE("pi2 construction constraints hold", "[refwalks]") {
    StreamRng rng(45, 0);
    for (int d : {2, 3})
        for (int t = 0; t < 50; ++t) {
            const Path p = sample_pi2(d, 20, rng);
            CHECK(valid_for_pi2(p));
        }
}

TEST_CASE("pi2 equals pi1 at d=2, N=3", "[refwalks]") {
    // no 4-loop constraint can bind before step 4, so the laws agree; check
    // per-path frequencies against the uniform 1/36
    StreamRng rng(46, 0);
    const int draws = 180000;
    std::map<std::string, int> counts;
    for (int i = 0; i < draws; ++i) {
        const Path p = sample_pi2(2, 3, rng);
        std::string key;
        for (Direction e : p.steps) key.push_back(static_cast<char>('0' + direction_index(e)));
        counts[key]++;
    }
    REQUIRE(counts.size() == 36);
    double chi2 = 0.0;
    for (const auto& [k, c] : counts) {
        const double e = draws / 36.0;
        chi2 += (c - e) * (c - e) / e;
    }
    CHECK(chi2 < 66.2);  // chi-square_35 at the 0.1% level
}

TEST_CASE("pi2 exact law at d=2, N=5: probability is the choice-count product", "[refwalks]") {
    const int d = 2, N = 5;
    mpq_class mass(0);
    std::uint64_t leaves = 0;
    std::vector<Site> walk{Site::origin(d)};
    auto rec = [&](auto&& self, int depth, mpq_class prob) -> void {
        if (depth == N) {
            ++leaves;
            mass += prob;
            CHECK(pi2_path_probability(Path::from_sites(walk)) == prob);
            return;
        }
        std::vector<Site> choices;
        for (int k = 0; k < 2 * d; ++k) {
            Site cand = step(walk.back(), direction_from_index(k));
            if (walk.size() >= 2 && cand == walk[walk.size() - 2]) continue;
            if (walk.size() >= 4 && cand == walk[walk.size() - 4]) continue;
            choices.push_back(cand);
        }
        for (const Site& c : choices) {
            walk.push_back(c);
            self(self, depth + 1, prob / static_cast<unsigned long>(choices.size()));
            walk.pop_back();
        }
    };
    rec(rec, 0, mpq_class(1));
    CHECK(mass == 1);
    CHECK(mpz_class(static_cast<unsigned long>(leaves)) == count_saw_no4(d, N));
}

TEST_CASE("pi2 probability ratios depend only on the U-census difference", "[refwalks]") {
    // the assertable core of the change of measure: p(S) * ((2d-2)/(2d-1))^{|U_{N-1}|}
    // is constant, so the weight direction used for importance sampling is
    // the one that flattens pi2 into the uniform law on S4_N
    const int d = 2, N = 5;
    const mpq_class ratio(2 * d - 2, 2 * d - 1);
    bool first = true;
    mpq_class constant(0);
    std::vector<Site> walk{Site::origin(d)};
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == N) {
            const Path p = Path::from_sites(walk);
            mpq_class w(1);
            for (int i = 0; i < u_count_to(p, N - 1); ++i) w *= ratio;
            const mpq_class prod = pi2_path_probability(p) * w;
            if (first) {
                constant = prod;
                first = false;
            } else {
                REQUIRE(prod == constant);
            }
            return;
        }
        for (int k = 0; k < 2 * d; ++k) {
            Site cand = step(walk.back(), direction_from_index(k));
            if (walk.size() >= 2 && cand == walk[walk.size() - 2]) continue;
            if (walk.size() >= 4 && cand == walk[walk.size() - 4]) continue;
            walk.push_back(cand);
            self(self, depth + 1);
            walk.pop_back();
        }
    };
    rec(rec, 0);

    // negative control: the flipped direction does not flatten the law
    Path straight = Path(d, {direction_from_code(1), direction_from_code(1), direction_from_code(1),
                             direction_from_code(1), direction_from_code(1)});
    Path uturn = Path(d, {direction_from_code(1), direction_from_code(2), direction_from_code(-1),
                          direction_from_code(2), direction_from_code(1)});
    const mpq_class flipped(2 * d - 1, 2 * d - 2);
    mpq_class w_straight(1), w_uturn(1);
    for (int i = 0; i < u_count_to(uturn, N - 1); ++i) w_uturn *= flipped;
    CHECK(pi2_path_probability(straight) * w_straight != pi2_path_probability(uturn) * w_uturn);
}

TEST_CASE("rn_weight_pi2 values and validation", "[refwalks]") {
    const Path straight(2, std::vector<Direction>(5, direction_from_code(1)));
    CHECK(rn_weight_pi2(straight) == 1.0);
    // one U-turn at index 3 and none later before N-1
    const Path one_turn(2, {direction_from_code(1), direction_from_code(2), direction_from_code(-1),
                            direction_from_code(2), direction_from_code(1)});
    CHECK(rn_weight_pi2(one_turn) == Catch::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(rn_weight_pi2(Path(2, {direction_from_code(1), direction_from_code(-1)})),
                    std::invalid_argument);
}

TEST_CASE("sample_uniform_saw acceptance", "[refwalks]") {
    StreamRng rng(47, 0);
    for (int t = 0; t < 1000; ++t) CHECK(sample_uniform_saw(2, 3, rng).attempts == 1);
    std::uint64_t attempts = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) attempts += sample_uniform_saw(2, 4, rng).attempts;
    const double mean_attempts = static_cast<double>(attempts) / trials;
    CHECK(mean_attempts == Catch::Approx(108.0 / 100.0).margin(0.02));
    CHECK_THROWS_AS(sample_uniform_saw(2, 10, rng, /*max_attempts=*/0), RejectionExhausted);
}

TEST_CASE("sample_uniform_saw is uniform at d=2, N=6", "[refwalks]") {
    StreamRng rng(48, 0);
    const std::uint64_t cells = count_saw(2, 6).get_ui();
    REQUIRE(cells == 780);
    const int draws = 1000000;
    std::map<std::string, int> counts;
    for (int i = 0; i < draws; ++i) {
        const Path p = sample_uniform_saw(2, 6, rng).path;
        std::string key;
        for (Direction e : p.steps) key.push_back(static_cast<char>('0' + direction_index(e)));
        counts[key]++;
    }
    REQUIRE(counts.size() == cells);
    double chi2 = 0.0;
    const double e = static_cast<double>(draws) / static_cast<double>(cells);
    for (const auto& [k, c] : counts) chi2 += (c - e) * (c - e) / e;
    // df = 779: mean 779, sd ~ 39.5; 6 sd of headroom
    CHECK(chi2 < 779.0 + 6.0 * std::sqrt(2.0 * 779.0));
}

TEST_CASE("rate_function values and errors", "[refwalks]") {
    CHECK(rate_function({0.3, 0.3}) == Catch::Approx(0.0).margin(1e-15));
    CHECK(rate_function({0.5, 1.0}) == Catch::Approx(std::log(2.0)));
    CHECK(rate_function({0.25, 0.0}) == Catch::Approx(-std::log(0.75)));
    CHECK_THROWS_AS(rate_function({0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(rate_function({1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(rate_function({0.5, -0.1}), std::invalid_argument);
    CHECK_THROWS_AS(rate_function({0.5, 1.1}), std::invalid_argument);
}

TEST_CASE("rate_function matches the Legendre transform", "[refwalks]") {
    const int d = 5;
    const double p = 1.0 / (2.0 * d - 1.0);
    const double x = 0.3;
    CHECK(rate_function({p, x}) == Catch::Approx(oracles::legendre_rate(p, x)).epsilon(1e-5));
}

TEST_CASE("rate_function is convex on a grid", "[refwalks]") {
    const double p = 0.3;
    for (double x = 0.05; x < 0.9; x += 0.05)
        for (double y = x + 0.1; y < 0.95; y += 0.05) {
            const double mid = rate_function({p, (x + y) / 2});
            CHECK(mid <= (rate_function({p, x}) + rate_function({p, y})) / 2 + 1e-12);
        }
}

TEST_CASE("mcdiarmid_tail", "[refwalks]") {
    CHECK(mcdiarmid_tail(0.0, 100, 1.0) == 1.0);
    CHECK(mcdiarmid_tail(10.0, 100, 1.0) == Catch::Approx(std::exp(-2.0)));
    // binomial(200, 1/2) lower tails sit below the bound
    StreamRng rng(49, 0);
    const int n = 200, draws = 100000;
    std::vector<int> samples(draws);
    for (int i = 0; i < draws; ++i) {
        int s = 0;
        for (int j = 0; j < n; ++j) s += rng.next_below(2);
        samples[i] = s;
    }
    for (double x : {10.0, 20.0, 30.0}) {
        int hits = 0;
        for (int s : samples)
            if (s <= 100.0 - x) ++hits;
        const double tail = static_cast<double>(hits) / draws;
        CHECK(tail <= mcdiarmid_tail(x, n, 1.0));
    }
}

TEST_CASE("pi1_saw_probability_exact", "[refwalks]") {
    CHECK(pi1_saw_probability_exact(2, 3) == 1);
    mpq_class q_2_4(100, 108);
    q_2_4.canonicalize();
    CHECK(pi1_saw_probability_exact(2, 4) == q_2_4);
    mpz_class denom(6);
    for (int i = 1; i < 6; ++i) denom *= 5;
    mpq_class expect(count_saw(3, 6), denom);
    expect.canonicalize();
    CHECK(pi1_saw_probability_exact(3, 6) == expect);
}

TEST_CASE("walk_statistics on hand-checked paths", "[refwalks]") {
    const Path straight(2, std::vector<Direction>(8, direction_from_code(1)));
    const WalkStatistics st = walk_statistics(straight);
    CHECK(st.U == 0);
    CHECK(st.T == 6);
    CHECK(st.W1 == 0);
    CHECK(st.W2 == 0);
    CHECK(st.tau2_count == 0);
    CHECK(st.self_avoiding);

    const Path bend(2, {direction_from_code(1), direction_from_code(2), direction_from_code(-1)});
    const WalkStatistics sb = walk_statistics(bend);
    CHECK(sb.U == 1);
    CHECK(sb.U2 == 1);  // the U-turn lands on the odd index 3
    CHECK(sb.W1 == 1);
    CHECK(sb.W2 == 0);
    CHECK(sb.tau2_count == 0);
}

TEST_CASE("U splits into its even and odd parts", "[refwalks]") {
    for (auto kind : {WalkKind::kSimple, WalkKind::kPi1, WalkKind::kPi2}) {
        const auto rows = u_statistics_under(WalkLaw{kind, 3, 30}, 200, 50);
        for (const auto& r : rows) {
            CHECK(r.U == r.U1 + r.U2);
            CHECK(r.tau2_count <= r.N / 2 + 1);
        }
    }
}

TEST_CASE("pi1 U-turn rate matches the closed form", "[refwalks]") {
    const int d = 5, N = 100;
    const std::uint64_t trials = 10000;
    const auto rows = u_statistics_under(WalkLaw{WalkKind::kPi1, d, N}, trials, 51);
    RunningStat stat;
    for (const auto& r : rows) stat.add(static_cast<double>(r.U) / N);
    const double expect = pi1_uturn_rate(d) * (N - 2) / N;  // indices 3..N
    CHECK(std::abs(stat.mean() - expect) <= 5.0 * stat.standard_error());
}

TEST_CASE("trial rows are reproducible from (seed, trial)", "[refwalks]") {
    const auto a = u_statistics_under(WalkLaw{WalkKind::kPi2, 3, 25}, 50, 99);
    const auto b = u_statistics_under(WalkLaw{WalkKind::kPi2, 3, 25}, 50, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].U == b[i].U);
        CHECK(a[i].V2 == b[i].V2);
        CHECK(a[i].tau2_count == b[i].tau2_count);
    }
}
