#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <cpsvm/cpsvm.hpp>

using namespace cpsvm;

namespace {

struct Options
{
    std::string data;
    std::string synth;
    std::string groups_file;
    int group_size = 0;
    std::string slope_weights;
    std::string model = "l1";
    std::string strategy = "colgen";
    std::string init = "corr";
    double lambda = 0.0;
    double lambda_frac = 0.01;
    double epsilon = 1e-2;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool standardize = false;
    std::string out;
    std::string metrics;
    int init_width = 50;
    int init_cap = 200;
    int row_cap = 100;
    int j0 = 10;
    int max_outer = 1000;
    CLI::Option* lambda_opt = nullptr;
};

// "n=100,p=2000,k0=10,rho=0.1[,groups=G]"
SynthConfig parse_synth(const std::string& spec, std::uint64_t seed)
{
    SynthConfig cfg;
    cfg.seed = seed;
    std::stringstream ss(spec);
    std::string item;
    bool have_k0 = false;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw DomainError("synth spec: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        try {
            if (key == "n") cfg.n = std::stoi(val);
            else if (key == "p") cfg.p = std::stoi(val);
            else if (key == "k0") cfg.k0 = std::stoi(val), have_k0 = true;
            else if (key == "rho") cfg.rho = std::stod(val);
            else if (key == "groups") cfg.num_groups = std::stoi(val);
            else throw DomainError("synth spec: unknown key '" + key + "'");
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const DomainError*>(&e)) throw;
            throw DomainError("synth spec: bad value for '" + key + "'");
        }
    }
    if (cfg.num_groups > 0) {
        if (cfg.p % cfg.num_groups) throw DomainError("synth spec: p must be a multiple of groups");
        cfg.group_size = cfg.p / cfg.num_groups;
        if (!have_k0) cfg.k0 = std::min(cfg.k0, cfg.num_groups);
    }
    return cfg;
}

SlopeWeights parse_weights(const std::string& spec, int p)
{
    if (spec == "bh-log") return SlopeWeights::bh_log(p, 1.0);
    if (spec.rfind("two-level:", 0) == 0) {
        const int k0 = std::stoi(spec.substr(10));
        if (k0 < 0) throw DomainError("two-level weights need k0 >= 0");
        return SlopeWeights::two_level(p, k0, 1.0);
    }
    return load_slope_weights(spec);
}

Problem load_problem(const Options& o, const Model model, std::uint64_t seed_offset = 0)
{
    if (o.data.empty() == o.synth.empty()) throw DomainError("give exactly one of --data and --synth");
    Problem pb;
    if (!o.synth.empty()) {
        const SynthConfig cfg = parse_synth(o.synth, o.seed + seed_offset);
        if (cfg.num_groups > 0) {
            auto [d, g] = synth_group_gaussian(cfg);
            pb.data = std::move(d);
            pb.groups = std::move(g);
        } else {
            pb.data = synth_gaussian(cfg);
        }
    } else {
        const std::filesystem::path path(o.data);
        if (!std::filesystem::exists(path)) throw ParseError("cannot open '" + o.data + "'");
        pb.data = path.extension() == ".csv" ? load_csv(o.data) : load_svmlight(o.data);
        if (o.standardize) pb.data = standardize_columns(pb.data);
    }
    if (!o.groups_file.empty()) pb.groups = load_groups(o.groups_file);
    else if (o.group_size > 0) {
        if (pb.data.p() % o.group_size) throw DomainError("--group-size must divide p");
        pb.groups = GroupStructure::contiguous(pb.data.p() / o.group_size, o.group_size);
    }
    if (model == Model::Slope) {
        if (o.slope_weights.empty()) throw DomainError("--model slope needs --slope-weights");
        pb.shape = parse_weights(o.slope_weights, pb.data.p());
    }
    return pb;
}

SolveRequest make_request(const Options& o)
{
    SolveRequest r;
    r.model = parse_model(o.model);
    r.strategy = parse_strategy(o.strategy);
    r.init = parse_init(o.init);
    if (o.lambda_opt && o.lambda_opt->count() > 0) r.lambda = o.lambda;
    r.lambda_frac = o.lambda_frac;
    r.epsilon = o.epsilon;
    r.seed = o.seed;
    r.jobs = std::max(1, o.jobs);
    r.init_width = o.init_width;
    r.init_cap = o.init_cap;
    r.row_cap = o.row_cap;
    r.j0 = o.j0;
    r.max_outer = o.max_outer;
    return r;
}

std::string method_label(const SolveRequest& r)
{
    if (r.strategy == Strategy::Full) return "full";
    return std::string(to_string(r.strategy)) + ":" + to_string(r.init);
}

MetricsRecord record_for(const std::string& command, const SolveRequest& req, const Problem& pb, const SolveOutcome& out)
{
    MetricsRecord rec;
    rec.command = command;
    rec.method = method_label(req);
    rec.model = to_string(req.model);
    rec.strategy = to_string(req.strategy);
    rec.init = req.strategy == Strategy::Full ? "none" : to_string(req.init);
    rec.seed = req.seed;
    rec.lambda = out.lambda;
    rec.lambda_frac = out.lambda_max > 0.0 ? out.lambda / out.lambda_max : 0.0;
    rec.epsilon = req.epsilon;
    fill_record(rec, pb.data, out.solution);
    rec.init_seconds = out.init_seconds;
    return rec;
}

class MetricsSink
{
public:
    explicit MetricsSink(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::app);
            if (!file_) throw ParseError("cannot write '" + path + "'");
        }
    }
    void write(const MetricsRecord& r) { write_record(file_.is_open() ? file_ : std::cout, r); }

private:
    std::ofstream file_;
};

void save_solution(const std::string& path, const Vec& beta, double beta0)
{
    std::ofstream f(path);
    if (!f) throw ParseError("cannot write '" + path + "'");
    write_solution(f, beta, beta0);
}

int cmd_solve(const Options& o)
{
    const SolveRequest req = make_request(o);
    const Problem pb = load_problem(o, req.model);
    const SolveOutcome out = solve_problem(pb, req);
    if (!o.out.empty()) save_solution(o.out, out.solution.beta, out.solution.beta0);
    MetricsSink(o.metrics).write(record_for("solve", req, pb, out));
    return out.solution.diag.certified ? 0 : 2;
}

struct PathOptions
{
    int points = 20;
    double ratio = 0.7;
};

// One record per grid point; colgen runs the warm-started path, full solves every point from scratch.
std::vector<std::pair<MetricsRecord, SvmSolution>> run_path(const Problem& pb, const SolveRequest& req,
                                                            const std::vector<double>& grid, const std::string& command)
{
    validate_problem(pb, req.model);
    if (req.model == Model::Slope) throw DomainError("path supports the l1 and group models");
    if (req.strategy != Strategy::Colgen && req.strategy != Strategy::Full)
        throw DomainError("path supports the colgen and full strategies");
    CutgenConfig cfg;
    cfg.epsilon = req.epsilon;
    cfg.max_outer = req.max_outer;
    const double lmax = model_lambda_max(pb, req.model);
    std::vector<SvmSolution> sols;
    if (req.strategy == Strategy::Colgen) {
        sols = req.model == Model::L1 ? regularization_path(pb.data, grid, req.j0, cfg)
                                      : group_regularization_path(pb.data, *pb.groups, grid, req.j0, cfg);
    } else {
        for (double lam : grid) {
            SolveRequest r = req;
            r.lambda = lam;
            sols.push_back(solve_problem(pb, r).solution);
        }
    }
    std::vector<std::pair<MetricsRecord, SvmSolution>> out;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        SolveOutcome so;
        so.lambda = grid[k];
        so.lambda_max = lmax;
        so.solution = std::move(sols[k]);
        MetricsRecord rec = record_for(command, req, pb, so);
        rec.method = req.strategy == Strategy::Full ? "full" : "colgen:path";
        rec.init = req.strategy == Strategy::Full ? "none" : "path";
        rec.point = static_cast<int>(k);
        out.emplace_back(std::move(rec), std::move(so.solution));
    }
    return out;
}

int cmd_path(const Options& o, const PathOptions& po)
{
    const SolveRequest req = make_request(o);
    const Problem pb = load_problem(o, req.model);
    validate_problem(pb, req.model);
    const auto grid = geometric_grid(model_lambda_max(pb, req.model), po.ratio, po.points);
    const auto rows = run_path(pb, req, grid, "path");
    if (!o.out.empty()) std::filesystem::create_directories(o.out);
    MetricsSink sink(o.metrics);
    bool all = true;
    for (const auto& [rec, sol] : rows) {
        sink.write(rec);
        all = all && rec.certified;
        if (!o.out.empty())
            save_solution((std::filesystem::path(o.out) / ("point_" + std::to_string(rec.point) + ".sol")).string(),
                          sol.beta, sol.beta0);
    }
    return all ? 0 : 2;
}

struct BenchOptions
{
    int reps = 10;
    std::vector<std::string> methods{"full", "colgen:corr"};
    int points = 1;
    double ratio = 0.7;
    std::string replay;
};

// "strategy[:init][@epsilon]"
SolveRequest parse_method(const std::string& spec, const SolveRequest& base, std::string& label)
{
    SolveRequest r = base;
    label = spec;
    std::string body = spec;
    if (const auto at = body.find('@'); at != std::string::npos) {
        r.epsilon = std::stod(body.substr(at + 1));
        body = body.substr(0, at);
    }
    const auto colon = body.find(':');
    r.strategy = parse_strategy(body.substr(0, colon));
    if (colon != std::string::npos) r.init = parse_init(body.substr(colon + 1));
    return r;
}

int cmd_bench(const Options& o, const BenchOptions& bo)
{
    if (!bo.replay.empty()) {
        std::cout << format_ara_table(ara_table(load_records(bo.replay)));
        return 0;
    }
    if (bo.reps < 1 || bo.points < 1) throw DomainError("--reps and --points must be positive");
    const SolveRequest base = make_request(o);
    std::vector<std::pair<std::string, SolveRequest>> methods;
    for (const auto& m : bo.methods) {
        std::string label;
        SolveRequest r = parse_method(m, base, label);
        methods.emplace_back(label, r);
    }
    // the data check runs up front so bad flags fail before any thread starts
    validate_problem(load_problem(o, base.model), base.model);

    std::vector<std::vector<MetricsRecord>> per_rep(bo.reps);
    std::vector<std::string> errors(bo.reps);
    auto run_rep = [&](int rep) {
        try {
            const Problem pb = load_problem(o, base.model, static_cast<std::uint64_t>(rep));
            const double lmax = model_lambda_max(pb, base.model);
            const std::vector<double> grid = bo.points > 1 ? geometric_grid(lmax, bo.ratio, bo.points)
                                                           : std::vector<double>{base.lambda ? *base.lambda : base.lambda_frac * lmax};
            for (const auto& [label, req0] : methods) {
                SolveRequest req = req0;
                req.seed = o.seed + rep;
                std::vector<MetricsRecord> recs;
                if (req.init == Init::Path && bo.points > 1) {
                    for (auto& row : run_path(pb, req, grid, "bench")) recs.push_back(std::move(row.first));
                } else {
                    for (std::size_t k = 0; k < grid.size(); ++k) {
                        req.lambda = grid[k];
                        const SolveOutcome so = solve_problem(pb, req);
                        MetricsRecord rec = record_for("bench", req, pb, so);
                        rec.point = static_cast<int>(k);
                        recs.push_back(std::move(rec));
                    }
                }
                for (auto& r : recs) {
                    r.method = label;
                    r.rep = rep;
                    r.seed = o.seed + rep;
                    per_rep[rep].push_back(std::move(r));
                }
            }
        } catch (const std::exception& e) {
            errors[rep] = e.what();
        }
    };
    const int jobs = std::max(1, std::min(o.jobs, bo.reps));
    if (jobs == 1) {
        for (int rep = 0; rep < bo.reps; ++rep) run_rep(rep);
    } else {
        std::vector<std::thread> pool;
        std::mutex mu;
        int next = 0;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                while (true) {
                    int rep;
                    {
                        std::lock_guard lock(mu);
                        rep = next++;
                    }
                    if (rep >= bo.reps) return;
                    run_rep(rep);
                }
            });
        for (auto& t : pool) t.join();
    }
    for (int rep = 0; rep < bo.reps; ++rep)
        if (!errors[rep].empty()) throw std::runtime_error("replication " + std::to_string(rep) + ": " + errors[rep]);

    std::vector<MetricsRecord> all;
    bool certified = true;
    MetricsSink sink(o.metrics);
    for (auto& v : per_rep)
        for (auto& r : v) {
            certified = certified && r.certified;
            sink.write(r);
            all.push_back(std::move(r));
        }
    std::cout << format_ara_table(ara_table(all));
    return certified ? 0 : 2;
}

struct SynthOptions
{
    int n = 100;
    int p = 1000;
    int k0 = 10;
    double rho = 0.1;
    int num_groups = 0;
    std::string groups_out;
};

int cmd_synth(const Options& o, const SynthOptions& so)
{
    if (o.out.empty()) throw DomainError("synth needs --out");
    SynthConfig cfg;
    cfg.n = so.n;
    cfg.p = so.p;
    cfg.k0 = so.k0;
    cfg.rho = so.rho;
    cfg.seed = o.seed;
    Dataset d;
    if (so.num_groups > 0) {
        if (so.p % so.num_groups) throw DomainError("--p must be a multiple of --groups");
        cfg.num_groups = so.num_groups;
        cfg.group_size = so.p / so.num_groups;
        auto [dd, g] = synth_group_gaussian(cfg);
        d = std::move(dd);
        if (!so.groups_out.empty()) {
            std::ofstream f(so.groups_out);
            if (!f) throw ParseError("cannot write '" + so.groups_out + "'");
            write_groups(f, g);
        }
    } else {
        if (!so.groups_out.empty()) throw DomainError("--groups-out needs --groups");
        d = synth_gaussian(cfg);
    }
    save_svmlight(o.out, d);
    return 0;
}

struct EvalOptions
{
    std::string solution;
    std::string record_file;
    int record = -1;
};

int cmd_eval(const Options& o, const EvalOptions& eo)
{
    const SolveRequest req = make_request(o);
    const Problem pb = load_problem(o, req.model);
    validate_problem(pb, req.model);
    std::ifstream f(eo.solution);
    if (!f) throw ParseError("cannot open '" + eo.solution + "'");
    const StoredSolution s = read_solution(f);
    if (s.beta.size() != pb.data.p()) throw DomainError("solution dimension does not match the data");

    std::optional<MetricsRecord> rec;
    if (!eo.record_file.empty()) {
        const auto recs = load_records(eo.record_file);
        if (recs.empty()) throw DomainError("no metrics records in '" + eo.record_file + "'");
        const int idx = eo.record < 0 ? static_cast<int>(recs.size()) - 1 : eo.record;
        if (idx >= static_cast<int>(recs.size())) throw DomainError("--record out of range");
        rec = recs[idx];
    }
    double lambda;
    if (req.lambda) lambda = *req.lambda;
    else if (rec) lambda = rec->lambda;
    else lambda = req.lambda_frac * model_lambda_max(pb, req.model);

    const double f_eval = model_objective(pb, req.model, lambda, s.beta, s.beta0);
    nlohmann::json j{{"lambda", lambda}, {"objective", f_eval}};
    int code = 0;
    if (rec) {
        const double rel = std::abs(f_eval - rec->objective) / std::max(1.0, std::abs(rec->objective));
        j["recorded"] = rec->objective;
        j["relative_difference"] = rel;
        j["match"] = rel <= 1e-6;
        code = rel <= 1e-6 ? 0 : 2;
    }
    std::cout << j.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cutting-plane solvers for L1, Group and Slope SVMs"};
    app.set_config("--config", "", "key=value file overriding defaults");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    auto* data = app.add_option("--data", o.data, "svmlight file (.csv: header row, label last)");
    app.add_option("--synth", o.synth, "synthetic data: n=..,p=..,k0=..,rho=..[,groups=G]")->excludes(data);
    app.add_option("--groups", o.groups_file, "group file: one group of 0-based indices per line");
    app.add_option("--group-size", o.group_size, "contiguous groups of this size");
    app.add_option("--slope-weights", o.slope_weights, "file, two-level:k0 or bh-log");
    app.add_option("--model", o.model, "l1, group or slope")->check(CLI::IsMember({"l1", "group", "slope"}));
    app.add_option("--strategy", o.strategy, "full, colgen, congen or colcon")
        ->check(CLI::IsMember({"full", "colgen", "congen", "colcon"}));
    app.add_option("--init", o.init, "random, corr, fo, sfo or path")
        ->check(CLI::IsMember({"random", "corr", "fo", "sfo", "path"}));
    o.lambda_opt = app.add_option("--lambda", o.lambda, "absolute penalty level");
    app.add_option("--lambda-frac", o.lambda_frac, "penalty as a fraction of lambda_max")->excludes(o.lambda_opt);
    app.add_option("--epsilon", o.epsilon, "pricing tolerance");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--jobs", o.jobs, "worker threads")->envname("CPSVM_JOBS");
    app.add_flag("--standardize", o.standardize, "scale columns of file data to unit norm");
    app.add_option("--out", o.out, "solution file (path: directory; synth: data file)");
    app.add_option("--metrics", o.metrics, "append JSON-lines metrics here instead of stdout");
    app.add_option("--init-width", o.init_width, "columns taken by random/corr initialization");
    app.add_option("--init-cap", o.init_cap, "columns kept from a first-order fit under colcon");
    app.add_option("--row-cap", o.row_cap, "most violated samples added per colcon round (0 = all)")->check(CLI::NonNegativeNumber);
    app.add_option("--j0", o.j0, "initial columns of a path");
    app.add_option("--max-outer", o.max_outer, "outer round limit");

    auto* solve = app.add_subcommand("solve", "solve at one lambda");

    PathOptions po;
    auto* path = app.add_subcommand("path", "geometric lambda path from lambda_max");
    path->add_option("--points", po.points, "grid length");
    path->add_option("--ratio", po.ratio, "grid ratio");

    BenchOptions bo;
    auto* bench = app.add_subcommand("bench", "method matrix over replications with an ARA table");
    bench->add_option("--reps", bo.reps, "replications (synthetic seeds seed..seed+reps-1)");
    bench->add_option("--methods", bo.methods, "strategy[:init][@epsilon], comma separated")->delimiter(',');
    bench->add_option("--points", bo.points, "lambda grid length (1: single lambda)");
    bench->add_option("--ratio", bo.ratio, "lambda grid ratio");
    bench->add_option("--replay", bo.replay, "print the ARA table of an existing metrics file");

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "write a synthetic svmlight data set");
    synth->add_option("--n", so.n);
    synth->add_option("--p", so.p);
    auto* k0_opt = synth->add_option("--k0", so.k0, "signal columns (groups: signal groups; default min(10, groups))");
    synth->add_option("--rho", so.rho);
    synth->add_option("--num-groups", so.num_groups, "group variant with this many groups");
    synth->add_option("--groups-out", so.groups_out, "write the group file here");

    EvalOptions eo;
    auto* eval = app.add_subcommand("eval", "recompute the objective of a solution file");
    eval->add_option("--solution", eo.solution)->required();
    eval->add_option("--record", eo.record_file, "metrics file to compare against");
    eval->add_option("--index", eo.record, "record index (default: last)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*solve) return cmd_solve(o);
        if (*path) return cmd_path(o, po);
        if (*bench) return cmd_bench(o, bo);
        if (*synth) {
            if (so.num_groups > 0 && k0_opt->count() == 0) so.k0 = std::min(so.k0, so.num_groups);
            return cmd_synth(o, so);
        }
        if (*eval) return cmd_eval(o, eo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
