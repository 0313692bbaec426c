#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/first_order/apg.hpp>
#include <cpsvm/first_order/block_cd.hpp>
#include <cpsvm/heuristics.hpp>
#include <cpsvm/svm/group_svm.hpp>
#include <cpsvm/svm/l1_svm.hpp>
#include <cpsvm/svm/slope_svm.hpp>

namespace cpsvm {

enum class Model { L1, Group, Slope };
enum class Strategy { Full, Colgen, Congen, Colcon };
enum class Init { Random, Corr, Fo, Sfo, Path };

inline const char* to_string(Model m)
{
    switch (m) {
    case Model::L1: return "l1";
    case Model::Group: return "group";
    case Model::Slope: return "slope";
    }
    return "?";
}

inline const char* to_string(Strategy s)
{
    switch (s) {
    case Strategy::Full: return "full";
    case Strategy::Colgen: return "colgen";
    case Strategy::Congen: return "congen";
    case Strategy::Colcon: return "colcon";
    }
    return "?";
}

inline const char* to_string(Init i)
{
    switch (i) {
    case Init::Random: return "random";
    case Init::Corr: return "corr";
    case Init::Fo: return "fo";
    case Init::Sfo: return "sfo";
    case Init::Path: return "path";
    }
    return "?";
}

inline Model parse_model(const std::string& s)
{
    if (s == "l1") return Model::L1;
    if (s == "group") return Model::Group;
    if (s == "slope") return Model::Slope;
    throw DomainError("unknown model '" + s + "'");
}

inline Strategy parse_strategy(const std::string& s)
{
    if (s == "full") return Strategy::Full;
    if (s == "colgen") return Strategy::Colgen;
    if (s == "congen") return Strategy::Congen;
    if (s == "colcon") return Strategy::Colcon;
    throw DomainError("unknown strategy '" + s + "'");
}

inline Init parse_init(const std::string& s)
{
    if (s == "random") return Init::Random;
    if (s == "corr") return Init::Corr;
    if (s == "fo") return Init::Fo;
    if (s == "sfo") return Init::Sfo;
    if (s == "path") return Init::Path;
    throw DomainError("unknown init '" + s + "'");
}

/// Data plus whatever the model needs besides it.
struct Problem
{
    Dataset data;
    std::optional<GroupStructure> groups;
    /// Slope weight shape; the penalty is lambda * shape.
    std::optional<SlopeWeights> shape;
};

struct SolveRequest
{
    Model model = Model::L1;
    Strategy strategy = Strategy::Colgen;
    Init init = Init::Corr;
    /// Absolute penalty level; when unset, lambda_frac * lambda_max.
    std::optional<double> lambda;
    double lambda_frac = 0.01;
    double epsilon = 1e-2;
    std::uint64_t seed = 0;
    int jobs = 1;
    /// Columns (or groups) taken by random and corr initialization.
    int init_width = 50;
    /// Largest column (or group) set taken from a first-order fit under colcon.
    int init_cap = 200;
    /// Most violated samples added per round under colcon; 0 adds every violated sample.
    int row_cap = 100;
    /// Grid length and first-point count for path initialization.
    int path_points = 7;
    int j0 = 10;
    int max_outer = 1000;
};

struct SolveOutcome
{
    SvmSolution solution;
    double lambda = 0.0;
    double lambda_max = 0.0;
    double init_seconds = 0.0;
    /// Weights actually used (Slope only).
    std::optional<SlopeWeights> weights;
};

inline void validate_problem(const Problem& pb, Model m)
{
    pb.data.require_both_classes();
    if (m == Model::Group) {
        if (!pb.groups) throw DomainError("group model needs a group structure");
        pb.groups->validate(pb.data.p());
    }
    if (m == Model::Slope) {
        if (!pb.shape) throw DomainError("slope model needs a weight specification");
        if (pb.shape->size() != static_cast<std::size_t>(pb.data.p()))
            throw DomainError("slope weights must have one entry per feature");
    }
}

inline double model_lambda_max(const Problem& pb, Model m)
{
    switch (m) {
    case Model::L1: return lambda_max_l1(pb.data);
    case Model::Group: return lambda_max_group(pb.data, *pb.groups);
    case Model::Slope: return slope_lambda_max(pb.data, *pb.shape);
    }
    return 0.0;
}

inline double model_objective(const Problem& pb, Model m, double lambda, const Vec& beta, double beta0)
{
    switch (m) {
    case Model::L1: return l1_objective(pb.data, beta, beta0, lambda);
    case Model::Group: return group_objective(pb.data, *pb.groups, beta, beta0, lambda);
    case Model::Slope: return slope_objective(pb.data, beta, beta0, pb.shape->scaled(lambda));
    }
    return 0.0;
}

namespace detail {

struct InitSets
{
    std::vector<int> samples;
    std::vector<int> columns;  ///< features, or groups for the group model
    std::optional<Vec> beta;
    bool have_samples = false;
};

inline std::vector<int> random_subset(int total, int k, std::uint64_t seed, int stream)
{
    return draw_subset(total, std::min(k, total), seed, stream);
}

inline int default_sample_width(const Dataset& d) { return std::min(d.n(), 10 * d.p()); }

// First-order fit on the full data, on the most correlated columns (groups) only.
inline FoResult fo_fit(const Problem& pb, Model m, double lambda, const FoConfig& fo)
{
    const Dataset& d = pb.data;
    if (m == Model::Group) {
        const auto& groups = *pb.groups;
        const int keep = std::min(groups.size(), d.n());
        if (keep >= groups.size()) return block_cd_group(d, groups, lambda, fo);
        const auto gsel = group_correlation_screen(d, groups, keep);
        std::vector<int> cols;
        std::vector<std::vector<int>> sub_groups;
        for (int g : gsel) {
            std::vector<int> members;
            for (int j : groups[g]) {
                members.push_back(static_cast<int>(cols.size()));
                cols.push_back(j);
            }
            sub_groups.push_back(std::move(members));
        }
        const GroupStructure sg(std::move(sub_groups));
        FoResult r = block_cd_group(d.subset_cols(cols), sg, lambda, fo);
        Vec full = Vec::Zero(d.p());
        for (std::size_t k = 0; k < cols.size(); ++k) full[cols[k]] = r.beta[k];
        r.beta = std::move(full);
        return r;
    }
    const int keep = std::min(d.p(), 10 * d.n());
    const std::vector<int> cols = correlation_screen(d, keep);
    const Dataset sub = keep < d.p() ? d.subset_cols(cols) : d;
    FoResult r = m == Model::L1 ? accelerated_prox_gradient(sub, L1Penalty{lambda}, fo)
                                : accelerated_prox_gradient(sub, SlopePenalty{pb.shape->scaled(lambda).values()}, fo);
    if (keep < d.p()) {
        Vec full = Vec::Zero(d.p());
        for (std::size_t k = 0; k < cols.size(); ++k) full[cols[k]] = r.beta[k];
        r.beta = std::move(full);
    }
    return r;
}

inline SubsampleFit sfo_fit(const Problem& pb, Model m, double lambda, const SolveRequest& req)
{
    FoConfig fo;
    fo.taus = FoConfig::geometric_taus(0.2, 0.7, 5);
    SubsampleConfig sc;
    sc.seed = req.seed;
    sc.jobs = req.jobs;
    const int n0 = std::min(pb.data.n(), 10 * pb.data.p());
    if (m == Model::L1) {
        if (10 * n0 < pb.data.p()) sc.screen = 10 * n0;
        return subsample_average_fit(pb.data, lambda, sc, fo);
    }
    return subsample_average(pb.data, sc, [&](const Dataset& sub, double scale) {
        Problem sp{sub, pb.groups, pb.shape};
        return fo_fit(sp, m, lambda * scale, fo);
    });
}

inline std::vector<int> columns_from_beta(const Problem& pb, Model m, const Vec& beta, int cap)
{
    if (m == Model::Group) return init_groups_from_beta(*pb.groups, beta, cap);
    return init_columns_from_beta(beta, cap);
}

inline InitSets initial_sets(const Problem& pb, const SolveRequest& req, double lambda)
{
    const Dataset& d = pb.data;
    const int width_total = req.model == Model::Group ? pb.groups->size() : d.p();
    const int big_cap = std::max(1, width_total);
    InitSets s;
    switch (req.init) {
    case Init::Random:
        s.columns = random_subset(width_total, req.init_width, req.seed, 1);
        s.samples = random_subset(d.n(), default_sample_width(d), req.seed, 2);
        break;
    case Init::Corr:
        s.columns = req.model == Model::Group ? group_correlation_screen(d, *pb.groups, std::min(req.init_width, width_total))
                                              : correlation_screen(d, std::min(req.init_width, width_total));
        s.samples = random_subset(d.n(), default_sample_width(d), req.seed, 2);
        break;
    case Init::Fo: {
        FoConfig fo;
        const FoResult r = fo_fit(pb, req.model, lambda, fo);
        const int cap = req.strategy == Strategy::Colcon ? req.init_cap : big_cap;
        s.columns = columns_from_beta(pb, req.model, r.beta, cap);
        s.samples = init_constraints_from_beta(d, r.beta, r.beta0);
        s.beta = r.beta;
        s.have_samples = true;
        break;
    }
    case Init::Sfo: {
        const SubsampleFit r = sfo_fit(pb, req.model, lambda, req);
        const int cap = req.strategy == Strategy::Colcon || req.strategy == Strategy::Colgen ? req.init_cap : big_cap;
        s.columns = columns_from_beta(pb, req.model, r.beta, cap);
        s.samples = init_constraints_from_beta(d, r.beta, r.beta0);
        s.beta = r.beta;
        s.have_samples = true;
        break;
    }
    case Init::Path:
        break;
    }
    return s;
}

// Geometric grid from lambda_max / 2 down to lambda with `points` values (just lambda when it is already larger).
inline std::vector<double> continuation_grid(double lambda_max, double lambda, int points)
{
    const double top = 0.5 * lambda_max;
    if (points < 2 || lambda >= top) return {lambda};
    std::vector<double> g(points);
    const double ratio = std::pow(lambda / top, 1.0 / (points - 1));
    for (int k = 0; k < points; ++k) g[k] = top * std::pow(ratio, k);
    g.back() = lambda;
    return g;
}

} // namespace detail

/// Chooses lambda, builds the initial working sets and runs the requested driver.
inline SolveOutcome solve_problem(const Problem& pb, const SolveRequest& req)
{
    validate_problem(pb, req.model);
    const Dataset& d = pb.data;
    SolveOutcome out;
    out.lambda_max = model_lambda_max(pb, req.model);
    out.lambda = req.lambda ? *req.lambda : req.lambda_frac * out.lambda_max;
    detail::require(out.lambda > 0.0 && std::isfinite(out.lambda), "lambda must be positive");

    CutgenConfig cfg;
    cfg.epsilon = req.epsilon;
    cfg.max_outer = req.max_outer;
    if (req.strategy == Strategy::Colcon) cfg.max_samples_per_round = req.row_cap;
    cfg.validate();

    if (req.model == Model::Slope && (req.strategy == Strategy::Congen || req.strategy == Strategy::Colcon))
        throw DomainError("slope model supports only the full and colgen strategies");
    if (req.init == Init::Path) {
        if (req.model == Model::Slope) throw DomainError("path initialization supports the l1 and group models");
        if (req.strategy != Strategy::Colgen) throw DomainError("path initialization needs --strategy colgen");
    }

    const detail::Stopwatch init_clock;
    detail::InitSets init;
    if (req.strategy != Strategy::Full && req.init != Init::Path) init = detail::initial_sets(pb, req, out.lambda);
    out.init_seconds = req.strategy == Strategy::Full ? 0.0 : init_clock.seconds();

    const auto all_groups = [&] {
        std::vector<int> g(pb.groups ? pb.groups->size() : 0);
        std::iota(g.begin(), g.end(), 0);
        return g;
    };

    SvmSolution s;
    switch (req.model) {
    case Model::L1:
        switch (req.strategy) {
        case Strategy::Full: s = solve_l1_full(d, out.lambda, cfg); break;
        case Strategy::Colgen:
            if (req.init == Init::Path) {
                const detail::Stopwatch clock;
                auto path = regularization_path(d, detail::continuation_grid(out.lambda_max, out.lambda, req.path_points),
                                                req.j0, cfg);
                s = std::move(path.back());
                s.diag.seconds = clock.seconds();
            } else {
                s = solve_colgen(d, out.lambda, init.columns, cfg);
            }
            break;
        case Strategy::Congen: s = solve_congen(d, out.lambda, init.samples, cfg); break;
        case Strategy::Colcon: s = solve_colcon(d, out.lambda, WorkingSet{init.samples, init.columns}, cfg); break;
        }
        break;
    case Model::Group: {
        const auto& groups = *pb.groups;
        switch (req.strategy) {
        case Strategy::Full: s = solve_group_colgen(d, groups, out.lambda, all_groups(), cfg); break;
        case Strategy::Colgen:
            if (req.init == Init::Path) {
                const detail::Stopwatch clock;
                auto path = group_regularization_path(
                    d, groups, detail::continuation_grid(out.lambda_max, out.lambda, req.path_points), req.j0, cfg);
                s = std::move(path.back());
                s.diag.seconds = clock.seconds();
            } else {
                s = solve_group_colgen(d, groups, out.lambda, init.columns, cfg);
            }
            break;
        case Strategy::Congen: s = solve_group_colcon(d, groups, out.lambda, init.samples, all_groups(), cfg); break;
        case Strategy::Colcon: s = solve_group_colcon(d, groups, out.lambda, init.samples, init.columns, cfg); break;
        }
        break;
    }
    case Model::Slope: {
        out.weights = pb.shape->scaled(out.lambda);
        SlopeConfig scfg;
        static_cast<CutgenConfig&>(scfg) = cfg;
        scfg.max_added_per_round = 10;
        std::vector<int> cols = init.columns;
        if (req.strategy == Strategy::Full) {
            cols.resize(d.p());
            std::iota(cols.begin(), cols.end(), 0);
        } else if (cols.empty()) {
            cols = correlation_screen(d, std::min(req.init_width, d.p()));
        }
        const Vec* warm = init.beta ? &*init.beta : nullptr;
        s = solve_slope(d, *out.weights, cols, warm, scfg);
        break;
    }
    }
    out.solution = std::move(s);
    return out;
}

} // namespace cpsvm
