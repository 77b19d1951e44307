#pragma once

// Top-level drivers: closed-form expansion evaluators, the quenched growth
// estimator, census and bridge experiments, and the aggregated verification
// manifest behind the `verify` CLI command.

#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dilute/bridges.hpp"
#include "dilute/environment.hpp"
#include "dilute/paths.hpp"
#include "dilute/refwalks.hpp"
#include "dilute/sizebias.hpp"
#include "dilute/util.hpp"

namespace dilute {

struct ExperimentConfig {
    int d = 3;
    int N = 50;
    double p = 0.3;
    double epsilon = 0.5;
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;
    int workers = 1;
    std::uint64_t max_attempts = 1'000'000;   // rejection budget per uniform-SAW sample
    std::uint64_t retry_budget = 256;         // fresh environment seeds per quenched trial
    std::uint64_t dfs_budget = kDefaultDfsBudget;
    std::uint64_t proxy_budget = 20'000'000;  // node budget for the annealed root proxy
    std::uint64_t injection_cap = 1u << 12;   // selection cap for in-experiment audits
    std::uint64_t validate_every = 50;        // injection audit cadence in run_bridge_experiment

    void validate() const {
        if (d < 2) throw std::invalid_argument("config: d must be >= 2");
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("config: p must lie in [0,1]");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (N < 1) throw std::invalid_argument("config: N must be >= 1");
    }
};

// ---- closed-form expansions -------------------------------------------------

// Upper bound on the strong-disorder threshold:
// 1/(2d) + 1/(2d)^2 + (2 + 3 log 2 - eps)/(2d)^3.
inline double threshold_bound(int d, double eps) {
    static const double kCoeff = 2.0 + 3.0 * std::log(2.0);
    if (d < 2) throw std::invalid_argument("threshold_bound: d must be >= 2");
    if (!(eps >= 0.0 && eps < kCoeff))
        throw std::invalid_argument("threshold_bound: eps must lie in [0, 2 + 3 log 2)");
    const double x = 1.0 / (2.0 * d);
    return x + x * x + (kCoeff - eps) * x * x * x;
}

// Three-term expansion of the percolation threshold:
// 1/(2d) + 1/(2d)^2 + (7/2)/(2d)^3. The O(d^-4) remainder is dropped.
inline double pc_expansion(int d) {
    if (d < 2) throw std::invalid_argument("pc_expansion: d must be >= 2");
    const double x = 1.0 / (2.0 * d);
    return x + x * x + 3.5 * x * x * x;
}

// Truncated connective-constant expansion 2d - 1 - 1/(2d); the no-4-loop
// variant agrees at this order.
inline double mu_expansion(int d) {
    if (d < 2) throw std::invalid_argument("mu_expansion: d must be >= 2");
    return 2.0 * d - 1.0 - 1.0 / (2.0 * d);
}

inline double mu4_expansion(int d) { return mu_expansion(d); }

struct ThresholdRow {
    int d;
    double pc3;
    double bound;
    double gap;           // bound - pc3 as floating-point subtraction
    double gap_symbolic;  // the same difference after cancelling the shared
                          // first- and second-order terms symbolically:
                          // ((2 + 3 log 2 - eps) - 7/2) / (2d)^3
    double gap_formula;   // (3 log 2 - 3/2 - eps)/(2d)^3
};

inline std::vector<ThresholdRow> thresholds_table(int d_lo, int d_hi, double eps) {
    std::vector<ThresholdRow> rows;
    for (int d = d_lo; d <= d_hi; ++d) {
        const double x = 1.0 / (2.0 * d);
        ThresholdRow r{d, pc_expansion(d), threshold_bound(d, eps), 0.0, 0.0, 0.0};
        r.gap = r.bound - r.pc3;
        r.gap_symbolic = ((2.0 + 3.0 * std::log(2.0) - eps) - 3.5) * x * x * x;
        r.gap_formula = (3.0 * std::log(2.0) - 1.5 - eps) * x * x * x;
        rows.push_back(r);
    }
    return rows;
}

// ---- annealed constant ------------------------------------------------------

struct AnnealedProxy {
    double value;     // p * |S_{N*}|^{1/N*}
    double proxy_mu;  // |S_{N*}|^{1/N*}
    int proxy_N;      // largest N whose exhaustive count fit the budget
};

inline AnnealedProxy annealed_constant(int d, double p, std::uint64_t proxy_budget = 20'000'000) {
    std::vector<std::uint64_t> counts;
    int n_star = 0;
    for (int n = 1; n <= 64; ++n) {
        try {
            counts = saw_counts_per_depth(d, n, proxy_budget);
            n_star = n;
        } catch (const BudgetExceeded&) {
            break;
        }
    }
    if (n_star == 0) throw std::invalid_argument("annealed_constant: budget too small for N=1");
    const double mu = std::pow(static_cast<double>(counts.back()), 1.0 / n_star);
    return AnnealedProxy{p * mu, mu, n_star};
}

// ---- quenched growth estimator ----------------------------------------------

struct QuenchedTrial {
    std::uint64_t trial;
    std::uint64_t env_seed;
    std::uint64_t retries;  // fresh seeds burned before percolating
    std::vector<GrowthPoint> growth;
    double final_ratio;  // Z_{Nmax}^{1/Nmax} / annealed
};

struct QuenchedReport {
    ExperimentConfig config;
    AnnealedProxy annealed;
    bool subcritical_warning = false;  // p below the pc expansion
    // Per-N annealed roots p |S_N|^{1/N}: exact while the exhaustive count
    // fits the proxy budget, the p*mu proxy beyond that.
    std::vector<double> annealed_roots;
    int exact_roots_up_to = 0;
    std::vector<QuenchedTrial> trials;
};

inline QuenchedReport run_quenched_estimate(const ExperimentConfig& cfg) {
    cfg.validate();
    QuenchedReport rep;
    rep.config = cfg;
    rep.annealed = annealed_constant(cfg.d, cfg.p, cfg.proxy_budget);
    rep.subcritical_warning = cfg.p <= pc_expansion(cfg.d);
    {
        std::vector<std::uint64_t> counts;
        for (int n = 1; n <= cfg.N; ++n) {
            try {
                counts = saw_counts_per_depth(cfg.d, n, cfg.proxy_budget);
            } catch (const BudgetExceeded&) {
                break;
            }
        }
        rep.exact_roots_up_to = static_cast<int>(counts.size());
        rep.annealed_roots.resize(static_cast<std::size_t>(cfg.N));
        for (int n = 1; n <= cfg.N; ++n)
            rep.annealed_roots[static_cast<std::size_t>(n - 1)] =
                n <= rep.exact_roots_up_to
                    ? cfg.p * std::pow(static_cast<double>(counts[static_cast<std::size_t>(n - 1)]), 1.0 / n)
                    : rep.annealed.value;
    }
    rep.trials.resize(cfg.trials);
    std::optional<std::string> failure;
    std::mutex fail_mu;
    parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t t) {
        StreamRng rng(cfg.seed, t);
        QuenchedTrial trial;
        trial.trial = t;
        bool found = false;
        for (std::uint64_t r = 0; r < cfg.retry_budget && !found; ++r) {
            const std::uint64_t env_seed = rng.next_u64();
            Environment env(cfg.p, env_seed);
            auto growth = growth_sequence(env, cfg.N, Site::origin(cfg.d), cfg.dfs_budget);
            if (growth.back().Z > 0) {
                trial.env_seed = env_seed;
                trial.retries = r;
                trial.growth = std::move(growth);
                const double denom = rep.annealed_roots.back();
                trial.final_ratio = denom > 0 ? trial.growth.back().root / denom : 0.0;
                found = true;
            }
        }
        if (!found) {
            std::lock_guard<std::mutex> lk(fail_mu);
            failure = "run_quenched_estimate: no start with Z_" + std::to_string(cfg.N) +
                      " > 0 found within the retry budget of " + std::to_string(cfg.retry_budget) +
                      " fresh seeds (trial " + std::to_string(t) + ")";
        }
        rep.trials[t] = std::move(trial);
    });
    if (failure) throw std::runtime_error(*failure);
    return rep;
}

// ---- good-spine census experiment -------------------------------------------

struct GoodSpineRow {
    WalkStatistics stats;
    std::uint64_t attempts;  // rejection attempts for this sample
    bool good;
};

struct GoodSpineSummary {
    std::uint64_t trials = 0;
    std::uint64_t good = 0;
    double frac_good = 0.0;
    WilsonInterval frac_interval{0.0, 1.0};
    double mean_u_frac = 0.0, se_u_frac = 0.0;
    double mean_t_frac = 0.0;
    double mean_v1_frac = 0.0;
    double mean_v2_frac = 0.0;
};

struct GoodSpineReport {
    ExperimentConfig config;
    std::vector<GoodSpineRow> rows;
    GoodSpineSummary summary;
};

// Samples uniform SAWs, computes their censuses, and reports the empirical
// good-spine frequency with the band statistics. eps >= 1 is accepted here
// (degenerate bands: only the U lower band binds) even though is_good_spine
// rejects it, so the driver applies the band test directly.
inline GoodSpineReport run_good_spine_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    GoodSpineReport rep;
    rep.config = cfg;
    rep.rows.resize(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t t) {
        StreamRng rng(cfg.seed, t);
        UniformSawSample s = sample_uniform_saw(cfg.d, cfg.N, rng, cfg.max_attempts);
        GoodSpineRow row;
        row.stats = walk_statistics(s.path);
        row.stats.trial = t;
        row.attempts = s.attempts;
        row.good = good_spine_bands(detail::census_unchecked(s.path, TConvention::kLagging), cfg.N, cfg.d,
                                    cfg.epsilon);
        rep.rows[t] = std::move(row);
    });
    RunningStat u, tt, v1, v2;
    for (const auto& r : rep.rows) {
        rep.summary.good += r.good;
        u.add(static_cast<double>(r.stats.U) / cfg.N);
        tt.add(static_cast<double>(r.stats.T) / cfg.N);
        v1.add(static_cast<double>(r.stats.V1) / cfg.N);
        v2.add(static_cast<double>(r.stats.V2) / cfg.N);
    }
    rep.summary.trials = cfg.trials;
    rep.summary.frac_good = static_cast<double>(rep.summary.good) / static_cast<double>(cfg.trials);
    rep.summary.frac_interval = wilson_interval(rep.summary.good, cfg.trials);
    rep.summary.mean_u_frac = u.mean();
    rep.summary.se_u_frac = u.standard_error();
    rep.summary.mean_t_frac = tt.mean();
    rep.summary.mean_v1_frac = v1.mean();
    rep.summary.mean_v2_frac = v2.mean();
    return rep;
}

// ---- bridge experiment --------------------------------------------------------

struct BridgeRow {
    std::uint64_t trial;
    int size_a0 = 0, size_a = 0, size_b = 0, size_c = 0;
    int size_u = 0;
    double floor_log2 = 0.0;
    bool injection_checked = false;
};

struct McdiarmidCheck {
    char stat;         // 'A', 'B' or 'C'
    double x;          // deviation tested
    double tail_freq;  // empirical P(size <= mean - x)
    double bound;      // McDiarmid bound at x
    bool ok;           // tail_freq <= bound
};

struct BridgeSummary {
    double mean_a_frac = 0.0, mean_b_frac = 0.0, mean_c_frac = 0.0;
    double target = 0.0;  // (2d)^{-2}
    std::vector<McdiarmidCheck> mcdiarmid;
    std::uint64_t injections_validated = 0;
    bool floor_inequality_ok = true;  // log2 floor >= |A| + 2 min(|B|,|C|) - log2(4 min)
};

struct BridgeReport {
    ExperimentConfig config;
    bool low_p_warning = false;  // p below 1/(2d)
    std::vector<BridgeRow> rows;
    BridgeSummary summary;
};

namespace detail {

inline double mpz_log2(const mpz_class& z) {
    signed long exp2 = 0;
    const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp2);
}

// Trims the detected sets (dropping highest indices first, largest set
// first) until the selection count fits the cap. Subsets of valid bridge
// sets keep every side condition, so the injection audit is unaffected.
inline BridgeSets trim_to_cap(BridgeSets sets, std::uint64_t cap) {
    while (count_lower_bound(sets.A.size(), sets.B.size(), sets.C.size()) >
           mpz_class(static_cast<unsigned long>(cap))) {
        const std::size_t a = sets.A.size(), b = sets.B.size(), c = sets.C.size();
        if (a >= b && a >= c && a > 0)
            sets.A.pop_back();
        else if (b >= c && b > 0)
            sets.B.pop_back();
        else if (c > 0)
            sets.C.pop_back();
        else
            break;
    }
    return sets;
}

}  // namespace detail

// Samples good spines and seeded environments, detects bridges, reports the
// set-size distributions against the (2d)^{-2} target, audits the counting
// floor, checks the empirical lower tails against McDiarmid bounds, and
// validates the path injection on a cadence subsample.
inline BridgeReport run_bridge_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    BridgeReport rep;
    rep.config = cfg;
    rep.low_p_warning = cfg.p < 1.0 / (2.0 * cfg.d);
    rep.rows.resize(cfg.trials);
    std::vector<int> a0_sizes(cfg.trials), u_sizes(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t t) {
        StreamRng rng(cfg.seed, t);
        const std::uint64_t env_seed = rng.next_u64();
        Environment env(cfg.p, env_seed);
        Path spine;
        bool good = false;
        for (std::uint64_t attempt = 0; attempt < cfg.max_attempts && !good; ++attempt) {
            spine = sample_uniform_saw(cfg.d, cfg.N, rng, cfg.max_attempts).path;
            good = good_spine_bands(detail::census_unchecked(spine, TConvention::kLagging), cfg.N, cfg.d,
                                    cfg.epsilon);
        }
        if (!good) throw RejectionExhausted(cfg.max_attempts);
        const PathCensus cen = census(spine);
        const BridgeSets sets = detect_bridges(env, spine);
        BridgeRow row;
        row.trial = t;
        row.size_a0 = static_cast<int>(sets.A0.size());
        row.size_a = static_cast<int>(sets.A.size());
        row.size_b = static_cast<int>(sets.B.size());
        row.size_c = static_cast<int>(sets.C.size());
        row.size_u = static_cast<int>(cen.U.size());
        row.floor_log2 =
            detail::mpz_log2(count_lower_bound(sets.A.size(), sets.B.size(), sets.C.size()));
        if (cfg.validate_every > 0 && t % cfg.validate_every == 0) {
            const BridgeSets trimmed = detail::trim_to_cap(sets, cfg.injection_cap);
            enumerate_selected_paths(spine, trimmed, cfg.injection_cap, &env);
            row.injection_checked = true;
        }
        rep.rows[t] = std::move(row);
        a0_sizes[t] = rep.rows[t].size_a0;
        u_sizes[t] = rep.rows[t].size_u;
    });

    RunningStat sa, sb, sc, s_a_abs, s_b_abs, s_c_abs, s_a0, s_u;
    for (const auto& r : rep.rows) {
        sa.add(static_cast<double>(r.size_a) / cfg.N);
        sb.add(static_cast<double>(r.size_b) / cfg.N);
        sc.add(static_cast<double>(r.size_c) / cfg.N);
        s_a_abs.add(r.size_a);
        s_b_abs.add(r.size_b);
        s_c_abs.add(r.size_c);
        s_a0.add(r.size_a0);
        s_u.add(r.size_u);
        rep.summary.injections_validated += r.injection_checked;
        const int m = std::min(r.size_b, r.size_c);
        if (m >= 1) {
            const double rhs = r.size_a + 2.0 * m - std::log2(4.0 * m);
            if (r.floor_log2 < rhs - 1e-9) rep.summary.floor_inequality_ok = false;
        } else if (std::abs(r.floor_log2 - r.size_a) > 1e-9) {
            rep.summary.floor_inequality_ok = false;
        }
    }
    rep.summary.mean_a_frac = sa.mean();
    rep.summary.mean_b_frac = sb.mean();
    rep.summary.mean_c_frac = sc.mean();
    rep.summary.target = 1.0 / (4.0 * cfg.d * cfg.d);

    // Empirical lower tails against McDiarmid bounds. |A| and |B| are
    // 1-Lipschitz in their Bernoulli fields (sizes |A0| and |U|); |C| is
    // K-Lipschitz in the near-spine edge field of size <= 4dN.
    auto tail_check = [&](char stat, const RunningStat& abs, auto size_of, double n_vars, double lipschitz) {
        for (double mult : {2.0, 3.0}) {
            const double x = mult * abs.sd();
            std::uint64_t hits = 0;
            for (const auto& r : rep.rows)
                if (static_cast<double>(size_of(r)) <= abs.mean() - x) ++hits;
            McdiarmidCheck chk;
            chk.stat = stat;
            chk.x = x;
            chk.tail_freq = static_cast<double>(hits) / static_cast<double>(cfg.trials);
            chk.bound = mcdiarmid_tail(x, static_cast<std::uint64_t>(std::max(1.0, n_vars)), lipschitz);
            chk.ok = chk.tail_freq <= chk.bound;
            rep.summary.mcdiarmid.push_back(chk);
        }
    };
    tail_check('A', s_a_abs, [](const BridgeRow& r) { return r.size_a; }, s_a0.mean(), 1.0);
    tail_check('B', s_b_abs, [](const BridgeRow& r) { return r.size_b; }, s_u.mean(), 1.0);
    tail_check('C', s_c_abs, [](const BridgeRow& r) { return r.size_c; }, 4.0 * cfg.d * cfg.N, 10.0);
    return rep;
}

// ---- Monte Carlo annealed identity -------------------------------------------

struct AnnealedMcCheck {
    double mean_z = 0.0;
    double se = 0.0;
    double expected = 0.0;  // p^N |S_N|
    double z_score = 0.0;
    bool within_4se = false;
};

inline AnnealedMcCheck annealed_identity_mc(int d, int N, double p, std::uint64_t trials,
                                            std::uint64_t seed, int workers,
                                            std::uint64_t budget = kDefaultDfsBudget) {
    std::vector<double> z(trials);
    parallel_for(trials, workers, [&](std::uint64_t t) {
        StreamRng rng(seed, t);
        Environment env(p, rng.next_u64());
        z[t] = static_cast<double>(count_open_saw_u64(env, N, Site::origin(d), budget));
    });
    RunningStat st;
    for (double v : z) st.add(v);
    AnnealedMcCheck out;
    out.mean_z = st.mean();
    out.se = st.standard_error();
    mpq_class expected(p);
    mpq_class pw(1);
    for (int i = 0; i < N; ++i) pw *= expected;
    pw *= mpq_class(count_saw(d, N, budget));
    out.expected = pw.get_d();
    out.z_score = out.se > 0 ? (out.mean_z - out.expected) / out.se : 0.0;
    out.within_4se = std::abs(out.z_score) <= 4.0;
    return out;
}

// ---- verification manifest ----------------------------------------------------

struct ManifestCase {
    std::string name;
    bool pass;
    std::string detail;
};

struct Manifest {
    std::string suite;
    std::vector<ManifestCase> cases;
    bool all_pass() const {
        for (const auto& c : cases)
            if (!c.pass) return false;
        return true;
    }
};

struct HashVector {
    int d;
    std::vector<std::int32_t> base;
    std::uint32_t axis;
    std::uint64_t seed;
    std::uint64_t u53;
    double p;
    bool open;
};

// Published regression vectors for the procedural environment.
inline const std::vector<HashVector>& hash_test_vectors() {
    static const std::vector<HashVector> kVectors = {
        {2, {0, 0}, 0, 1, 2768654964659479ull, 0.5, true},
        {2, {0, 0}, 1, 1, 1930587344188080ull, 0.5, true},
        {2, {5, -2}, 0, 42, 7218712296277902ull, 0.3, false},
        {3, {1, 2, 3}, 2, 7, 8011513307220159ull, 0.25, false},
        {3, {0, 0, 0}, 0, 0, 8258215967109590ull, 0.75, false},
        {4, {-1, 0, 2, -3}, 3, 123456789, 4622162204786555ull, 0.125, false},
    };
    return kVectors;
}

namespace detail {

template <class Fn>
void run_case(Manifest& m, const std::string& name, Fn&& fn) {
    ManifestCase c{name, false, ""};
    try {
        c.detail = fn();
        c.pass = true;
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = e.what();
    }
    m.cases.push_back(std::move(c));
}

}  // namespace detail

// Runs every exhaustive oracle: environment determinism, SAW spot counts,
// the exact annealed identity, the spine-construction law equality, the pi2
// change-of-measure law, a seeded injection audit, the threshold gap and the
// geometric-rate band of the non-backtracking SAW probability.
inline Manifest run_all_verifications(int workers = 1, std::uint64_t seed = 1) {
    Manifest m;
    m.suite = "verify";

    detail::run_case(m, "environment_determinism_vectors", [&] {
        for (const auto& v : hash_test_vectors()) {
            Environment env(v.p, v.seed);
            const Edge e{Site(v.base), v.axis};
            if (env.uniform53(e) != v.u53)
                throw std::runtime_error("uniform53 mismatch on published vector");
            if (env.is_open(e) != v.open) throw std::runtime_error("open state mismatch on published vector");
        }
        return "all " + std::to_string(hash_test_vectors().size()) + " vectors reproduced";
    });

    detail::run_case(m, "saw_spot_counts", [&] {
        const std::vector<std::pair<int, std::vector<unsigned long>>> expect = {
            {2, {4, 12, 36, 100}}, {3, {6, 30, 150}}};
        for (const auto& [d, counts] : expect)
            for (std::size_t n = 0; n < counts.size(); ++n)
                if (count_saw(d, static_cast<int>(n + 1)) != counts[n])
                    throw std::runtime_error("count_saw(" + std::to_string(d) + "," + std::to_string(n + 1) +
                                             ") != " + std::to_string(counts[n]));
        return std::string("spot values 4,12,36,100 (d=2) and 6,30,150 (d=3) reproduced");
    });

    detail::run_case(m, "annealed_identity_exact", [&] {
        const mpq_class p(1, 2);
        const auto edges = relevant_edges(2, Site::origin(2));
        mpq_class total(0);
        enumerate_finite(edges, p, [&](const FiniteEnvironment& env, const mpq_class& w) {
            total += w * static_cast<unsigned long>(count_open_saw_u64(env, 2, Site::origin(2)));
        });
        mpq_class expected = p * p * mpq_class(count_saw(2, 2));
        if (total != expected) throw std::runtime_error("sum_omega P(omega) Z_2 != p^2 |S_2|");
        return "E[Z_2] = p^2 |S_2| exactly at d=2, p=1/2 over " + std::to_string(edges.size()) + " edges";
    });

    detail::run_case(m, "spine_lemma_tv_zero", [&] {
        for (const auto& p : {mpq_class(1, 4), mpq_class(1, 2), mpq_class(3, 4)}) {
            const Distribution biased = size_biased_law_exact(2, 2, p, workers);
            const Distribution spine = spine_law_exact(2, 2, p, workers);
            if (tv_distance(biased, spine) != 0)
                throw std::runtime_error("TV distance nonzero at p = " + p.get_str());
            if (biased.total_mass() != 1) throw std::runtime_error("size-biased law mass != 1");
        }
        return std::string("exact TV distance 0 at (d=2, N=2), p in {1/4, 1/2, 3/4}");
    });

    detail::run_case(m, "pi2_change_of_measure", [&] {
        // Every pi2 path probability times the reweighting factor must be the
        // same constant: that is the change-of-measure identity at (d=2,N=5).
        const int d = 2, N = 5;
        mpq_class ratio(2 * d - 2, 2 * d - 1);
        bool first = true;
        mpq_class constant(0);
        std::uint64_t paths = 0;
        enumerate_saw(d, N, [&](const std::vector<Site>& sites) {
            Path p = Path::from_sites(sites);
            if (!valid_for_pi2(p)) return;
            mpq_class w(1);
            for (int i = 0; i < u_count_to(p, N - 1); ++i) w *= ratio;
            const mpq_class prod = pi2_path_probability(p) * w;
            if (first) {
                constant = prod;
                first = false;
            } else if (prod != constant) {
                throw std::runtime_error("pi2 probability is not proportional to the reciprocal U-census weight");
            }
            ++paths;
        });
        // Self-avoiding paths of length 5 cannot contain a 4-loop, so the
        // pi2-valid ones coincide with S4_5 restricted to S_5; the tree
        // enumeration below covers non-self-avoiding S4 paths too.
        std::uint64_t s4 = 0;
        mpq_class mass(0);
        std::vector<Site> walk{Site::origin(d)};
        auto rec = [&](auto&& self, int depth, mpq_class prob) -> void {
            if (depth == N) {
                ++s4;
                Path p = Path::from_sites(walk);
                if (pi2_path_probability(p) != prob)
                    throw std::runtime_error("decision-tree probability != product of reciprocal choice counts");
                mass += prob;
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
        if (mass != 1) throw std::runtime_error("pi2 decision tree mass != 1");
        if (mpz_class(static_cast<unsigned long>(s4)) != count_saw_no4(d, N))
            throw std::runtime_error("pi2 decision tree leaf count != |S4_5|");
        return "direction pinned on " + std::to_string(paths) + " self-avoiding and " + std::to_string(s4) +
               " total length-5 tree paths";
    });

    detail::run_case(m, "injection_audit_seeded", [&] {
        const int d = 4, N = 60;
        const double p = 1.0 / (2.0 * d);
        std::uint64_t paths_checked = 0;
        for (std::uint64_t t = 0; t < 100; ++t) {
            StreamRng rng(seed, t);
            Environment env(p, rng.next_u64());
            const Path spine = sample_uniform_saw(d, N, rng).path;
            BridgeSets sets = detect_bridges(env, spine);
            const auto audit = audit_bridge_squares(spine, sets);
            if (!audit.ok) throw std::runtime_error("square overlap: " + audit.detail);
            sets = detail::trim_to_cap(std::move(sets), 1u << 12);
            paths_checked += enumerate_selected_paths(spine, sets, 1u << 12, &env).paths.size();
        }
        return "100 seeded instances, " + std::to_string(paths_checked) + " rerouted paths validated";
    });

    detail::run_case(m, "threshold_gap", [&] {
        const double eps = 0.1;
        for (const auto& row : thresholds_table(2, 64, eps)) {
            if (!(row.bound > row.pc3))
                throw std::runtime_error("gap not positive at d=" + std::to_string(row.d));
            if (std::abs(row.gap_symbolic - row.gap_formula) > 1e-15 * row.gap_formula)
                throw std::runtime_error("gap formula mismatch at d=" + std::to_string(row.d));
        }
        return std::string("bound - pc3 = (3 log 2 - 3/2 - eps)/(2d)^3 > 0 for d in [2,64] at eps=0.1");
    });

    detail::run_case(m, "pi1_saw_rate_band", [&] {
        const int d = 4;
        const double K = 8.0;
        const double center = 1.0 - 1.0 / ((2.0 * d) * (2.0 * d));
        const double half = K / ((2.0 * d) * (2.0 * d) * (2.0 * d));
        mpq_class prev = pi1_saw_probability_exact(d, 5);
        for (int n = 6; n <= 10; ++n) {
            const mpq_class cur = pi1_saw_probability_exact(d, n);
            const double ratio = mpq_class(cur / prev).get_d();
            if (ratio < center - half || ratio > center + half)
                throw std::runtime_error("geometric rate outside band at N=" + std::to_string(n));
            prev = cur;
        }
        return std::string("per-step rate within 1 - 1/(2d)^2 +- 8/(2d)^3 for d=4, N in [6,10]");
    });

    return m;
}

}  // namespace dilute
