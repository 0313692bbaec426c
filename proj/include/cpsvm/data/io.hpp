#pragma once
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/error.hpp>

namespace cpsvm {
namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view tok, double& out)
{
    // from_chars rejects a leading '+', which svmlight labels commonly carry
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

inline bool parse_int(std::string_view tok, long& out)
{
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Maps raw labels to {-1,+1}: {-1,+1} subsets pass through, {0,1} maps 0 -> -1.
inline Vec map_binary_labels(const std::vector<double>& raw)
{
    std::set<double> distinct(raw.begin(), raw.end());
    const bool pm = std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 1.0 || v == -1.0; });
    const bool zo = std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 1.0 || v == 0.0; });
    if (!pm && !zo) throw DomainError("labels must be binary: {-1,+1} or {0,1}");
    Vec y(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i) y[i] = raw[i] > 0 ? 1.0 : -1.0;
    return y;
}

} // namespace detail

/**
 * Reads svmlight/libsvm text: one sample per line, "label idx:val idx:val ...",
 * 1-based strictly increasing feature indices. Blank lines and '#' comments
 * are skipped. The feature count is the largest index seen unless `num_features`
 * is given (indices beyond it are an error).
 */
inline Dataset read_svmlight(std::istream& in, std::optional<int> num_features = std::nullopt)
{
    std::vector<double> raw_labels;
    std::vector<Eigen::Triplet<double>> trip;
    std::string line;
    std::size_t lineno = 0;
    long max_index = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv(line);
        if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
        sv = detail::trim(sv);
        if (sv.empty()) continue;
        const auto toks = detail::split_ws(sv);
        double label = 0;
        if (!detail::parse_double(toks[0], label)) throw ParseError("bad label '" + std::string(toks[0]) + "'", lineno);
        const int row = static_cast<int>(raw_labels.size());
        long prev = 0;
        for (std::size_t k = 1; k < toks.size(); ++k) {
            const auto colon = toks[k].find(':');
            if (colon == std::string_view::npos) throw ParseError("expected idx:val, got '" + std::string(toks[k]) + "'", lineno);
            long idx = 0;
            double val = 0;
            if (!detail::parse_int(toks[k].substr(0, colon), idx) || idx < 1)
                throw ParseError("bad feature index in '" + std::string(toks[k]) + "'", lineno);
            if (!detail::parse_double(toks[k].substr(colon + 1), val))
                throw ParseError("bad feature value in '" + std::string(toks[k]) + "'", lineno);
            if (idx <= prev) throw ParseError("feature indices must be strictly increasing", lineno);
            if (num_features && idx > *num_features) throw ParseError("feature index exceeds declared dimension", lineno);
            prev = idx;
            max_index = std::max(max_index, idx);
            if (val != 0.0) trip.emplace_back(row, static_cast<int>(idx - 1), val);
        }
        raw_labels.push_back(label);
    }
    if (raw_labels.empty()) throw ParseError("no samples");
    const int p = num_features ? *num_features : static_cast<int>(max_index);
    SpMat x(static_cast<Eigen::Index>(raw_labels.size()), p);
    x.setFromTriplets(trip.begin(), trip.end());
    return Dataset(FeatureMatrix(std::move(x)), detail::map_binary_labels(raw_labels));
}

inline Dataset load_svmlight(const std::string& path, std::optional<int> num_features = std::nullopt)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_svmlight(in, num_features);
}

/// Writes svmlight text: "+1"/"-1" labels, nonzero entries only, values as %.17g.
inline void write_svmlight(std::ostream& out, const Dataset& d)
{
    std::vector<std::vector<std::pair<int, double>>> rows(d.n());
    for (int j = 0; j < d.p(); ++j)
        d.features.for_each_in_col(j, [&](Eigen::Index i, double v) {
            if (v != 0.0) rows[i].emplace_back(j, v);
        });
    for (int i = 0; i < d.n(); ++i) {
        out << (d.labels[i] > 0 ? "+1" : "-1");
        for (const auto& [j, v] : rows[i]) out << ' ' << (j + 1) << ':' << detail::format_double(v);
        out << '\n';
    }
}

inline void save_svmlight(const std::string& path, const Dataset& d)
{
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    write_svmlight(out, d);
}

/**
 * Reads comma-separated values: one header row, then one sample per row,
 * features first and the label in the last column. Produces a dense Dataset.
 */
inline Dataset read_csv(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("no samples");
    ++lineno;
    std::vector<std::vector<double>> rows;
    std::vector<double> raw_labels;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto sv = detail::trim(line);
        if (sv.empty()) continue;
        std::vector<double> vals;
        std::size_t start = 0;
        while (true) {
            const auto comma = sv.find(',', start);
            const auto tok = detail::trim(sv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            double v = 0;
            if (!detail::parse_double(tok, v)) throw ParseError("bad number '" + std::string(tok) + "'", lineno);
            vals.push_back(v);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (vals.size() < 2) throw ParseError("need at least one feature and a label", lineno);
        if (width == 0) width = vals.size();
        if (vals.size() != width) throw ParseError("inconsistent column count", lineno);
        raw_labels.push_back(vals.back());
        vals.pop_back();
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw ParseError("no samples");
    Mat x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j + 1 < width; ++j) x(i, j) = rows[i][j];
    return Dataset(FeatureMatrix(std::move(x)), detail::map_binary_labels(raw_labels));
}

inline Dataset load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_csv(in);
}

/// Group file: one group per line, whitespace-separated 0-based feature indices.
inline GroupStructure read_groups(std::istream& in)
{
    std::vector<std::vector<int>> groups;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto sv = detail::trim(line);
        if (sv.empty()) continue;
        std::vector<int> g;
        for (auto tok : detail::split_ws(sv)) {
            long idx = 0;
            if (!detail::parse_int(tok, idx) || idx < 0) throw ParseError("bad feature index '" + std::string(tok) + "'", lineno);
            g.push_back(static_cast<int>(idx));
        }
        groups.push_back(std::move(g));
    }
    return GroupStructure(std::move(groups));
}

inline GroupStructure load_groups(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_groups(in);
}

inline void write_groups(std::ostream& out, const GroupStructure& g)
{
    for (const auto& grp : g.groups) {
        for (std::size_t k = 0; k < grp.size(); ++k) out << (k ? " " : "") << grp[k];
        out << '\n';
    }
}

/// Slope weight file: one weight per line, nonincreasing.
inline SlopeWeights read_slope_weights(std::istream& in)
{
    std::vector<double> w;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto sv = detail::trim(line);
        if (sv.empty()) continue;
        double v = 0;
        if (!detail::parse_double(sv, v)) throw ParseError("bad weight '" + std::string(sv) + "'", lineno);
        w.push_back(v);
    }
    return SlopeWeights(std::move(w));
}

inline SlopeWeights load_slope_weights(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_slope_weights(in);
}

} // namespace cpsvm
