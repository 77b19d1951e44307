#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "dilute/serialize.hpp"
#include "dilute/sizebias.hpp"

using namespace dilute;

namespace {

Path make_path(int d, std::initializer_list<int> codes) {
    std::vector<Direction> steps;
    for (int c : codes) steps.push_back(direction_from_code(c));
    return Path(d, std::move(steps));
}

}  // namespace

TEST_CASE("make_spined forces exactly the spine open over a closed base", "[sizebias]") {
    Environment closed(0.0, 1);
    const Path spine = make_path(2, {1, 2});
    const auto spined = make_spined(closed, spine);
    int open = 0;
    for (const Edge& e : relevant_edges(2, Site::origin(2))) open += spined.is_open(e);
    CHECK(open == 2);
    CHECK(spined.is_open(canonical_edge(Site({0, 0}), Site({1, 0}))));
    CHECK(spined.is_open(canonical_edge(Site({1, 0}), Site({1, 1}))));
}

TEST_CASE("make_spined over a full base changes nothing", "[sizebias]") {
    Environment full(1.0, 1);
    const Path spine = make_path(2, {1, 2, 1});
    const auto spined = make_spined(full, spine);
    for (const Edge& e : relevant_edges(3, Site::origin(2))) CHECK(spined.is_open(e) == full.is_open(e));
}

TEST_CASE("make_spined rejects self-intersecting spines", "[sizebias]") {
    Environment env(0.5, 1);
    CHECK_THROWS_AS(make_spined(env, make_path(2, {1, -1})), std::invalid_argument);
}

TEST_CASE("tilde_partition basics", "[sizebias]") {
    Environment closed(0.0, 1);
    const Path spine = make_path(2, {1, 2, 1});
    const auto spined = make_spined(closed, spine);
    CHECK(tilde_partition(spined, 3) == 1);  // only the spine itself
    CHECK_THROWS_AS(tilde_partition(spined, 4), std::invalid_argument);
}

TEST_CASE("tilde partition dominates both one and the base count", "[sizebias]") {
    const Site o = Site::origin(2);
    const auto edges = relevant_edges(3, o);
    StreamRng rng(13, 0);
    std::vector<Path> spines;
    enumerate_saw(2, 3, [&](const std::vector<Site>& sites) { spines.push_back(Path::from_sites(sites)); });
    for (int t = 0; t < 25; ++t) {
        FiniteEnvironment env(edges);
        for (std::size_t i = 0; i < env.size(); ++i) env.set_state(i, rng.next_below(4) == 0);
        const std::uint64_t z = count_open_saw_u64(env, 3, o);
        const Path& spine = spines[rng.next_below(spines.size())];
        const auto spined = make_spined(env, spine);
        const std::uint64_t zt = tilde_partition_u64(spined, 3);
        CHECK(zt >= 1);
        CHECK(zt >= z);
    }
}

TEST_CASE("size-biased law at p=1 is a point mass at |S_N|", "[sizebias]") {
    const Distribution law = size_biased_law_exact(2, 2, mpq_class(1));
    REQUIRE(law.support.size() == 1);
    CHECK(law.support[0].first == 12);
    CHECK(law.support[0].second == 1);
    const Distribution spine = spine_law_exact(2, 2, mpq_class(1));
    REQUIRE(spine.support.size() == 1);
    CHECK(spine.support[0].first == 12);
}

TEST_CASE("size-biased law has exact unit mass", "[sizebias]") {
    for (const auto& p : {mpq_class(1, 4), mpq_class(1, 2)}) {
        const Distribution law = size_biased_law_exact(2, 2, p);
        CHECK(law.total_mass() == 1);
    }
}

TEST_CASE("spine lemma: exact distribution equality at d=2, N=2, p=1/2", "[sizebias]") {
    const mpq_class p(1, 2);
    const Distribution biased = size_biased_law_exact(2, 2, p);
    const Distribution spine = spine_law_exact(2, 2, p);
    CHECK(tv_distance(biased, spine) == 0);
}

TEST_CASE("size-biased law matches the frozen fixture", "[sizebias]") {
    std::ifstream f(std::string(DILUTE_TEST_DATA_DIR) + "/sizebias_d2n2_p05.json");
    REQUIRE(f.good());
    json j;
    f >> j;
    const Distribution fixture = distribution_from_json(j);
    const Distribution law = size_biased_law_exact(2, 2, mpq_class(1, 2));
    REQUIRE(law.support.size() == fixture.support.size());
    for (std::size_t i = 0; i < law.support.size(); ++i) {
        CHECK(law.support[i].first == fixture.support[i].first);
        CHECK(law.support[i].second == fixture.support[i].second);
    }
}

TEST_CASE("reweighting identity on dyadic intervals", "[sizebias]") {
    // P[W in A] = E~[W^{-1} 1_{W in A}] for intervals bounded away from zero.
    // The left side comes from direct enumeration of the base measure, the
    // right side from the aggregated size-biased law of Z; they must agree
    // exactly.
    const int N = 2;
    const Site o = Site::origin(2);
    const auto edges = relevant_edges(N, o);
    const mpq_class p(1, 2);
    mpq_class denom(count_saw(2, N));
    denom *= p * p;
    const Distribution biased = size_biased_law_exact(2, N, p);

    for (int k : {1, 2, 3}) {
        for (int j = 1; j < (1 << k); ++j) {
            const mpq_class lo(j, 1 << k), hi(j + 1, 1 << k);
            mpq_class lhs(0);
            enumerate_finite(edges, p, [&](const FiniteEnvironment& env, const mpq_class& w) {
                const std::uint64_t z = count_open_saw_u64(env, N, o);
                if (z == 0) return;
                const mpq_class wn = mpq_class(static_cast<unsigned long>(z)) / denom;
                if (wn >= lo && wn < hi) lhs += w;
            });
            mpq_class rhs(0);
            for (const auto& [z, mass] : biased.support) {
                const mpq_class wn = mpq_class(static_cast<unsigned long>(z)) / denom;
                if (wn >= lo && wn < hi) rhs += mass / wn;
            }
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("strong disorder certificate", "[sizebias]") {
    // p = 1: Z~ = |S_N| always, so the threshold is met with frequency one
    const int N = 6;
    const double log_sn = std::log(count_saw(2, N).get_d());
    std::vector<double> logs(200, log_sn);
    const auto rep = strong_disorder_certificate(logs, 0.05, N, /*log annealed, p=1*/ log_sn);
    CHECK(rep.frequency == 1.0);
    CHECK(rep.hits == 200);
    CHECK_FALSE(rep.satisfied);  // frequency 1 > e^{-cN}
    CHECK(rep.interval.lo <= 1.0);

    // an extremely large c also pushes the frequency to one
    const auto rep2 = strong_disorder_certificate(logs, 50.0, N, log_sn);
    CHECK(rep2.frequency == 1.0);

    CHECK_THROWS_AS(strong_disorder_certificate(logs, 0.0, N, log_sn), std::invalid_argument);

    // a desk-scale stochastic run, reported but not asserted
    const int d = 2, Ns = 8;
    const double ps = 0.7;
    std::vector<double> lz;
    for (int t = 0; t < 200; ++t) {
        StreamRng rng(17, t);
        Environment env(ps, rng.next_u64());
        const Path spine = sample_uniform_saw(d, Ns, rng).path;
        lz.push_back(std::log(static_cast<double>(tilde_partition_u64(make_spined(env, spine), Ns))));
    }
    const double log_annealed = Ns * std::log(ps) + std::log(count_saw(d, Ns).get_d());
    const auto rep3 = strong_disorder_certificate(lz, 0.02, Ns, log_annealed);
    CHECK(rep3.frequency >= 0.0);
    CHECK(rep3.frequency <= 1.0);
    CHECK(rep3.interval.lo <= rep3.frequency);
    CHECK(rep3.interval.hi >= rep3.frequency);
}

TEST_CASE("distribution JSON round trip", "[sizebias]") {
    Distribution d;
    d.support.emplace_back(3, mpq_class(1, 7));
    d.support.emplace_back(12, mpq_class(6, 7));
    const Distribution back = distribution_from_json(distribution_to_json(d));
    REQUIRE(back.support.size() == 2);
    CHECK(back.support[0].first == 3);
    CHECK(back.support[0].second == mpq_class(1, 7));
    CHECK(back.support[1].second == mpq_class(6, 7));
}
