#pragma once

// Wire formats: JSON codecs for paths, bridge sets, distributions and the
// verification manifest, plus the CSV schemas of the experiment reports.

#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dilute/bridges.hpp"
#include "dilute/experiments.hpp"
#include "dilute/paths.hpp"
#include "dilute/sizebias.hpp"

namespace dilute {

using json = nlohmann::json;

// Paths: {d, start, steps: [signed axis codes +-(axis+1)]}.
inline json path_to_json(const Path& p) {
    json j;
    j["d"] = p.dim();
    j["start"] = p.start.coords;
    json steps = json::array();
    for (Direction e : p.steps) steps.push_back(direction_code(e));
    j["steps"] = std::move(steps);
    return j;
}

inline Path path_from_json(const json& j) {
    const int d = j.at("d").get<int>();
    Site start(j.at("start").get<std::vector<std::int32_t>>());
    std::vector<Direction> steps;
    for (const auto& c : j.at("steps")) steps.push_back(direction_from_code(c.get<int>()));
    return Path(d, std::move(steps), std::move(start));
}

// Bridge sets: {A0:[], A:[{n,dir}], B:[], C0:[], C:[{n,dir}]}.
inline json bridge_sets_to_json(const BridgeSets& s) {
    json j;
    j["A0"] = s.A0;
    j["B"] = s.B;
    j["C0"] = s.C0;
    json a = json::array(), c = json::array();
    for (const auto& w : s.A) a.push_back({{"n", w.n}, {"dir", direction_code(w.dir)}});
    for (const auto& w : s.C) c.push_back({{"n", w.n}, {"dir", direction_code(w.dir)}});
    j["A"] = std::move(a);
    j["C"] = std::move(c);
    return j;
}

// Distributions: {support: [[value, num, den], ...]} with exact integers as
// strings.
inline json distribution_to_json(const Distribution& dist) {
    json support = json::array();
    for (const auto& [v, w] : dist.support)
        support.push_back({v, w.get_num().get_str(), w.get_den().get_str()});
    return json{{"support", std::move(support)}};
}

inline Distribution distribution_from_json(const json& j) {
    Distribution dist;
    for (const auto& row : j.at("support")) {
        mpq_class w(mpz_class(row.at(1).get<std::string>()), mpz_class(row.at(2).get<std::string>()));
        w.canonicalize();
        dist.support.emplace_back(row.at(0).get<std::uint64_t>(), std::move(w));
    }
    return dist;
}

// Manifest: {suite, cases: [{name, status, detail}]}.
inline json manifest_to_json(const Manifest& m) {
    json cases = json::array();
    for (const auto& c : m.cases)
        cases.push_back({{"name", c.name}, {"status", c.pass ? "pass" : "fail"}, {"detail", c.detail}});
    return json{{"suite", m.suite}, {"cases", std::move(cases)}};
}

inline void manifest_to_csv(const Manifest& m, std::ostream& os) {
    os << "suite,name,status,detail\n";
    for (const auto& c : m.cases) {
        std::string detail = c.detail;
        for (char& ch : detail)
            if (ch == ',' || ch == '\n') ch = ';';
        os << m.suite << ',' << c.name << ',' << (c.pass ? "pass" : "fail") << ',' << detail << '\n';
    }
}

// Census statistics CSV: one row per trial.
inline void walk_statistics_csv(const std::vector<GoodSpineRow>& rows, std::ostream& os) {
    os << "trial,N,U,U1,U2,T,V1,V2,W1,W2,tau2_count\n";
    for (const auto& r : rows) {
        const WalkStatistics& s = r.stats;
        os << s.trial << ',' << s.N << ',' << s.U << ',' << s.U1 << ',' << s.U2 << ',' << s.T << ',' << s.V1
           << ',' << s.V2 << ',' << s.W1 << ',' << s.W2 << ',' << s.tau2_count << '\n';
    }
}

// Bridge census CSV.
inline void bridge_report_csv(const BridgeReport& rep, std::ostream& os) {
    os << "trial,N,p,d,sizeA,sizeB,sizeC,floor_log2\n";
    for (const auto& r : rep.rows) {
        std::ostringstream fl;
        fl.precision(17);
        fl << r.floor_log2;
        os << r.trial << ',' << rep.config.N << ',' << rep.config.p << ',' << rep.config.d << ','
           << r.size_a << ',' << r.size_b << ',' << r.size_c << ',' << fl.str() << '\n';
    }
}

// Quenched growth CSV: one row per (trial, N). The ratio column compares
// the quenched root to the annealed one at the same N.
inline void quenched_report_csv(const QuenchedReport& rep, std::ostream& os) {
    os.precision(17);
    os << "trial,N,Z,root,ratio\n";
    for (const auto& t : rep.trials)
        for (const auto& g : t.growth) {
            const double denom = rep.annealed_roots[static_cast<std::size_t>(g.N - 1)];
            os << t.trial << ',' << g.N << ',' << g.Z << ',' << g.root << ','
               << (denom > 0 ? g.root / denom : 0.0) << '\n';
        }
}

inline void thresholds_csv(const std::vector<ThresholdRow>& rows, std::ostream& os) {
    os.precision(17);
    os << "d,pc3,bound,gap,gap_symbolic,gap_formula,mu,mu4\n";
    for (const auto& r : rows)
        os << r.d << ',' << r.pc3 << ',' << r.bound << ',' << r.gap << ',' << r.gap_symbolic << ','
           << r.gap_formula << ',' << mu_expansion(r.d) << ',' << mu4_expansion(r.d) << '\n';
}

inline json good_spine_report_json(const GoodSpineReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows) {
        rows.push_back({{"trial", r.stats.trial},
                        {"N", r.stats.N},
                        {"U", r.stats.U},
                        {"U1", r.stats.U1},
                        {"U2", r.stats.U2},
                        {"T", r.stats.T},
                        {"V1", r.stats.V1},
                        {"V2", r.stats.V2},
                        {"W1", r.stats.W1},
                        {"W2", r.stats.W2},
                        {"tau2_count", r.stats.tau2_count},
                        {"good", r.good}});
    }
    return json{{"rows", std::move(rows)},
                {"summary",
                 {{"trials", rep.summary.trials},
                  {"good", rep.summary.good},
                  {"frac_good", rep.summary.frac_good},
                  {"wilson_lo", rep.summary.frac_interval.lo},
                  {"wilson_hi", rep.summary.frac_interval.hi},
                  {"mean_u_frac", rep.summary.mean_u_frac},
                  {"mean_t_frac", rep.summary.mean_t_frac},
                  {"mean_v1_frac", rep.summary.mean_v1_frac},
                  {"mean_v2_frac", rep.summary.mean_v2_frac}}}};
}

inline json bridge_report_json(const BridgeReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"trial", r.trial},
                        {"sizeA0", r.size_a0},
                        {"sizeA", r.size_a},
                        {"sizeB", r.size_b},
                        {"sizeC", r.size_c},
                        {"sizeU", r.size_u},
                        {"floor_log2", r.floor_log2},
                        {"injection_checked", r.injection_checked}});
    json mcd = json::array();
    for (const auto& c : rep.summary.mcdiarmid)
        mcd.push_back({{"stat", std::string(1, c.stat)},
                       {"x", c.x},
                       {"tail_freq", c.tail_freq},
                       {"bound", c.bound},
                       {"ok", c.ok}});
    return json{{"rows", std::move(rows)},
                {"summary",
                 {{"mean_a_frac", rep.summary.mean_a_frac},
                  {"mean_b_frac", rep.summary.mean_b_frac},
                  {"mean_c_frac", rep.summary.mean_c_frac},
                  {"target", rep.summary.target},
                  {"floor_inequality_ok", rep.summary.floor_inequality_ok},
                  {"injections_validated", rep.summary.injections_validated},
                  {"mcdiarmid", std::move(mcd)}}}};
}

inline json quenched_report_json(const QuenchedReport& rep) {
    json trials = json::array();
    for (const auto& t : rep.trials) {
        json growth = json::array();
        for (const auto& g : t.growth) growth.push_back({{"N", g.N}, {"Z", g.Z}, {"root", g.root}});
        trials.push_back({{"trial", t.trial},
                          {"env_seed", t.env_seed},
                          {"retries", t.retries},
                          {"growth", std::move(growth)},
                          {"final_ratio", t.final_ratio}});
    }
    return json{{"annealed", rep.annealed.value},
                {"proxy_mu", rep.annealed.proxy_mu},
                {"proxy_N", rep.annealed.proxy_N},
                {"annealed_roots", rep.annealed_roots},
                {"exact_roots_up_to", rep.exact_roots_up_to},
                {"subcritical_warning", rep.subcritical_warning},
                {"trials", std::move(trials)}};
}

}  // namespace dilute
