#pragma once
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>
#include <cpsvm/error.hpp>
#include <cpsvm/lp/model.hpp>

namespace cpsvm::lp {

namespace detail {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/**
 * Fixed-layout MPS-like text. Rows are named R<i>, columns C<j>, the
 * objective OBJ. One coefficient per COLUMNS line; RHS lists every row;
 * BOUNDS lists every column as LO/UP pairs, FR for free and MI for -inf lower.
 *
 *   NAME <name>
 *   ROWS
 *    N  OBJ
 *    G  R0            (G, L or E)
 *   COLUMNS
 *       C0  OBJ  1
 *       C0  R0   2
 *   RHS
 *       RHS  R0  1
 *   BOUNDS
 *    LO BND  C0  0
 *    UP BND  C0  4
 *   ENDATA
 */
inline void write_lp(std::ostream& out, const LpModel& m, const std::string& name = "cpsvm")
{
    out << "NAME " << name << "\nROWS\n N  OBJ\n";
    for (int i = 0; i < m.num_rows(); ++i) {
        const char s = m.row_sense(i) == RowSense::GreaterEq ? 'G' : m.row_sense(i) == RowSense::LessEq ? 'L' : 'E';
        out << ' ' << s << "  R" << i << '\n';
    }
    out << "COLUMNS\n";
    for (int j = 0; j < m.num_cols(); ++j) {
        const auto& c = m.column(j);
        out << "    C" << j << "  OBJ  " << detail::fmt(c.cost) << '\n';
        for (std::size_t k = 0; k < c.coef.nnz(); ++k)
            out << "    C" << j << "  R" << c.coef.index[k] << "  " << detail::fmt(c.coef.value[k]) << '\n';
    }
    out << "RHS\n";
    for (int i = 0; i < m.num_rows(); ++i) out << "    RHS  R" << i << "  " << detail::fmt(m.row_rhs(i)) << '\n';
    out << "BOUNDS\n";
    for (int j = 0; j < m.num_cols(); ++j) {
        const auto& c = m.column(j);
        if (c.lower == -kInf && c.upper == kInf) {
            out << " FR BND  C" << j << '\n';
            continue;
        }
        if (c.lower == -kInf) out << " MI BND  C" << j << '\n';
        else out << " LO BND  C" << j << "  " << detail::fmt(c.lower) << '\n';
        if (c.upper != kInf) out << " UP BND  C" << j << "  " << detail::fmt(c.upper) << '\n';
    }
    out << "ENDATA\n";
}

inline std::string to_lp_text(const LpModel& m)
{
    std::ostringstream s;
    write_lp(s, m);
    return s.str();
}

/// Reads the layout produced by write_lp.
inline LpModel read_lp(std::istream& in)
{
    enum class Sec { None, Rows, Columns, Rhs, Bounds, Done } sec = Sec::None;
    std::vector<RowSense> senses;
    std::vector<double> rhs;
    std::vector<LpColumn> cols;
    std::string line;
    std::size_t lineno = 0;

    auto index_of = [&](const std::string& tok, char prefix) {
        if (tok.size() < 2 || tok[0] != prefix) throw ParseError("bad name '" + tok + "'", lineno);
        int v = 0;
        const auto r = std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
        if (r.ec != std::errc() || r.ptr != tok.data() + tok.size() || v < 0) throw ParseError("bad name '" + tok + "'", lineno);
        return v;
    };
    auto number = [&](const std::string& tok) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw ParseError("bad number '" + tok + "'", lineno);
            return v;
        } catch (const std::logic_error&) {
            throw ParseError("bad number '" + tok + "'", lineno);
        }
    };
    auto column = [&](int j) -> LpColumn& {
        if (j >= static_cast<int>(cols.size())) cols.resize(j + 1);
        return cols[j];
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const bool header = line[0] != ' ';
        if (header) {
            if (tok[0] == "NAME") continue;
            if (tok[0] == "ROWS") sec = Sec::Rows;
            else if (tok[0] == "COLUMNS") sec = Sec::Columns;
            else if (tok[0] == "RHS") sec = Sec::Rhs;
            else if (tok[0] == "BOUNDS") sec = Sec::Bounds;
            else if (tok[0] == "ENDATA") sec = Sec::Done;
            else throw ParseError("unknown section '" + tok[0] + "'", lineno);
            continue;
        }
        switch (sec) {
        case Sec::Rows: {
            if (tok.size() != 2) throw ParseError("bad ROWS line", lineno);
            if (tok[0] == "N") break;
            const int i = index_of(tok[1], 'R');
            if (i != static_cast<int>(senses.size())) throw ParseError("rows must be listed in order", lineno);
            if (tok[0] == "G") senses.push_back(RowSense::GreaterEq);
            else if (tok[0] == "L") senses.push_back(RowSense::LessEq);
            else if (tok[0] == "E") senses.push_back(RowSense::Equal);
            else throw ParseError("bad row sense '" + tok[0] + "'", lineno);
            rhs.push_back(0.0);
            break;
        }
        case Sec::Columns: {
            if (tok.size() != 3) throw ParseError("bad COLUMNS line", lineno);
            auto& c = column(index_of(tok[0], 'C'));
            const double v = number(tok[2]);
            if (tok[1] == "OBJ") c.cost = v;
            else {
                const int i = index_of(tok[1], 'R');
                if (i >= static_cast<int>(senses.size())) throw ParseError("unknown row '" + tok[1] + "'", lineno);
                c.coef.push(i, v);
            }
            break;
        }
        case Sec::Rhs: {
            if (tok.size() != 3) throw ParseError("bad RHS line", lineno);
            const int i = index_of(tok[1], 'R');
            if (i >= static_cast<int>(rhs.size())) throw ParseError("unknown row '" + tok[1] + "'", lineno);
            rhs[i] = number(tok[2]);
            break;
        }
        case Sec::Bounds: {
            if (tok.size() < 3) throw ParseError("bad BOUNDS line", lineno);
            auto& c = column(index_of(tok[2], 'C'));
            if (tok[0] == "FR") c.lower = -kInf, c.upper = kInf;
            else if (tok[0] == "MI") c.lower = -kInf;
            else if (tok.size() == 4 && tok[0] == "LO") c.lower = number(tok[3]);
            else if (tok.size() == 4 && tok[0] == "UP") c.upper = number(tok[3]);
            else throw ParseError("bad BOUNDS line", lineno);
            break;
        }
        default:
            throw ParseError("data outside a section", lineno);
        }
    }
    if (sec != Sec::Done) throw ParseError("missing ENDATA");
    LpModel m;
    for (std::size_t i = 0; i < senses.size(); ++i) m.add_row(senses[i], rhs[i]);
    for (auto& c : cols) m.add_column(std::move(c));
    return m;
}

} // namespace cpsvm::lp
