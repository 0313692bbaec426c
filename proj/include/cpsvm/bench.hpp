#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>
#include <json.hpp>
#include <cpsvm/data/io.hpp>
#include <cpsvm/svm/common.hpp>

namespace cpsvm {

/// One solve, as written to a JSON-lines metrics file.
struct MetricsRecord
{
    std::string command = "solve";
    std::string method;      ///< label used to group rows of the ARA table
    std::string model;
    std::string strategy;
    std::string init;
    int rep = 0;
    int point = 0;           ///< index on a lambda grid
    std::uint64_t seed = 0;
    double lambda = 0.0;     ///< penalty level (Slope: scale applied to the weight shape)
    double lambda_frac = 0.0;
    double epsilon = 0.0;
    double objective = 0.0;
    double lp_objective = 0.0;
    bool certified = false;
    std::string lp_status = "optimal";
    int n = 0;
    int p = 0;
    int samples = 0;
    int features = 0;
    int groups = 0;
    int cuts = 0;
    int outer_rounds = 0;
    long pivots = 0;
    double seconds = 0.0;
    double init_seconds = 0.0;
};

inline void to_json(nlohmann::json& j, const MetricsRecord& r)
{
    j = nlohmann::json{{"command", r.command},     {"method", r.method},
                       {"model", r.model},         {"strategy", r.strategy},
                       {"init", r.init},           {"rep", r.rep},
                       {"point", r.point},         {"seed", r.seed},
                       {"lambda", r.lambda},       {"lambda_frac", r.lambda_frac},
                       {"epsilon", r.epsilon},     {"objective", r.objective},
                       {"lp_objective", r.lp_objective}, {"certified", r.certified},
                       {"lp_status", r.lp_status}, {"n", r.n},
                       {"p", r.p},                 {"samples", r.samples},
                       {"features", r.features},   {"groups", r.groups},
                       {"cuts", r.cuts},           {"outer_rounds", r.outer_rounds},
                       {"pivots", r.pivots},       {"seconds", r.seconds},
                       {"init_seconds", r.init_seconds}};
}

inline void from_json(const nlohmann::json& j, MetricsRecord& r)
{
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("command", r.command);
    get("method", r.method);
    get("model", r.model);
    get("strategy", r.strategy);
    get("init", r.init);
    get("rep", r.rep);
    get("point", r.point);
    get("seed", r.seed);
    r.lambda = j.at("lambda").get<double>();
    get("lambda_frac", r.lambda_frac);
    get("epsilon", r.epsilon);
    r.objective = j.at("objective").get<double>();
    get("lp_objective", r.lp_objective);
    get("certified", r.certified);
    get("lp_status", r.lp_status);
    get("n", r.n);
    get("p", r.p);
    get("samples", r.samples);
    get("features", r.features);
    get("groups", r.groups);
    get("cuts", r.cuts);
    get("outer_rounds", r.outer_rounds);
    get("pivots", r.pivots);
    get("seconds", r.seconds);
    get("init_seconds", r.init_seconds);
}

/// Fills the solution-derived fields of a record.
inline void fill_record(MetricsRecord& r, const Dataset& d, const SvmSolution& s)
{
    r.objective = s.objective;
    r.lp_objective = s.lp_objective;
    r.certified = s.diag.certified;
    r.lp_status = lp::to_string(s.diag.lp_status);
    r.n = d.n();
    r.p = d.p();
    r.samples = static_cast<int>(s.samples.size());
    r.features = static_cast<int>(s.features.size());
    r.groups = static_cast<int>(s.groups.size());
    r.cuts = s.diag.cuts;
    r.outer_rounds = s.diag.outer_rounds;
    r.pivots = s.diag.pivots;
    r.seconds = s.diag.seconds;
}

inline void write_record(std::ostream& out, const MetricsRecord& r)
{
    out << nlohmann::json(r).dump() << '\n';
}

inline std::vector<MetricsRecord> read_records(std::istream& in)
{
    std::vector<MetricsRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<MetricsRecord>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad metrics record: ") + e.what(), lineno);
        }
    }
    return out;
}

inline std::vector<MetricsRecord> load_records(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_records(in);
}

/**
 * Solution file: a header line "# p <p>", then one "<j>:<beta_j>" line per
 * nonzero coefficient (1-based j, increasing), then "intercept:<beta0>".
 * Values use %.17g so the file reproduces the solution exactly.
 */
inline void write_solution(std::ostream& out, const Vec& beta, double beta0)
{
    out << "# p " << beta.size() << '\n';
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) out << (j + 1) << ':' << detail::format_double(beta[j]) << '\n';
    out << "intercept:" << detail::format_double(beta0) << '\n';
}

struct StoredSolution
{
    Vec beta;
    double beta0 = 0.0;
};

inline StoredSolution read_solution(std::istream& in)
{
    StoredSolution s;
    std::string line;
    std::size_t lineno = 0;
    bool have_p = false, have_b0 = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto sv = detail::trim(line);
        if (sv.empty()) continue;
        if (sv.substr(0, 4) == "# p ") {
            long p = 0;
            if (!detail::parse_int(detail::trim(sv.substr(4)), p) || p < 0) throw ParseError("bad dimension line", lineno);
            s.beta = Vec::Zero(p);
            have_p = true;
            continue;
        }
        if (sv.front() == '#') continue;
        if (!have_p) throw ParseError("missing '# p' header", lineno);
        const auto colon = sv.find(':');
        if (colon == std::string_view::npos) throw ParseError("expected key:value", lineno);
        double v = 0;
        if (!detail::parse_double(sv.substr(colon + 1), v)) throw ParseError("bad value", lineno);
        const auto key = sv.substr(0, colon);
        if (key == "intercept") {
            s.beta0 = v;
            have_b0 = true;
            continue;
        }
        long j = 0;
        if (!detail::parse_int(key, j) || j < 1 || j > s.beta.size()) throw ParseError("bad coefficient index", lineno);
        s.beta[j - 1] = v;
    }
    if (!have_p || !have_b0) throw ParseError("incomplete solution file");
    return s;
}

struct AraRow
{
    std::string method;
    int reps = 0;
    double ara_mean = 0.0;   ///< percent
    double ara_std = 0.0;
    double time_mean = 0.0;  ///< seconds per replication, summed over grid points
    double time_std = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v)
{
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

} // namespace detail

/**
 * ARA per method. For every (rep, point) the reference f* is the lowest
 * objective any method reached there; a replication's value is the mean over
 * its points of (f - f*) / f*; rows report mean and sample standard deviation
 * over replications, in percent. Methods appear in first-seen order.
 */
inline std::vector<AraRow> ara_table(const std::vector<MetricsRecord>& recs)
{
    std::map<std::pair<int, int>, double> best;
    std::vector<std::string> order;
    for (const auto& r : recs) {
        const auto key = std::make_pair(r.rep, r.point);
        auto it = best.find(key);
        if (it == best.end() || r.objective < it->second) best[key] = r.objective;
        if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
    }
    std::vector<AraRow> rows;
    for (const auto& m : order) {
        std::map<int, std::pair<double, int>> gap;  // rep -> (sum of gaps, count)
        std::map<int, double> time;
        for (const auto& r : recs) {
            if (r.method != m) continue;
            const double f_star = best.at({r.rep, r.point});
            if (!(f_star > 0.0)) throw DomainError("ara_table: reference objective must be positive");
            auto& g = gap[r.rep];
            g.first += (r.objective - f_star) / f_star;
            ++g.second;
            time[r.rep] += r.seconds + r.init_seconds;
        }
        std::vector<double> per_rep, per_time;
        for (const auto& [rep, g] : gap) {
            per_rep.push_back(100.0 * g.first / g.second);
            per_time.push_back(time[rep]);
        }
        AraRow row;
        row.method = m;
        row.reps = static_cast<int>(per_rep.size());
        std::tie(row.ara_mean, row.ara_std) = detail::mean_std(per_rep);
        std::tie(row.time_mean, row.time_std) = detail::mean_std(per_time);
        rows.push_back(row);
    }
    return rows;
}

/// "Method  Reps  Time (s)  ARA (%)" with "mean (std)" cells.
inline std::string format_ara_table(const std::vector<AraRow>& rows)
{
    std::size_t w = 6;
    for (const auto& r : rows) w = std::max(w, r.method.size());
    std::ostringstream s;
    auto cell = [](double m, double sd, int prec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f (%.*f)", prec, m, prec, sd);
        return std::string(buf);
    };
    char head[160];
    std::snprintf(head, sizeof head, "%-*s  %4s  %-18s  %s\n", static_cast<int>(w), "Method", "Reps", "Time (s)", "ARA (%)");
    s << head;
    for (const auto& r : rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%-*s  %4d  %-18s  %s\n", static_cast<int>(w), r.method.c_str(), r.reps,
                      cell(r.time_mean, r.time_std, 2).c_str(), cell(r.ara_mean, r.ara_std, 3).c_str());
        s << line;
    }
    return s.str();
}

} // namespace cpsvm
