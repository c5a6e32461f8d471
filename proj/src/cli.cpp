#include "gspca/cli.hpp"

#include "gspca/bench.hpp"
#include "gspca/error.hpp"
#include "gspca/io.hpp"
#include "gspca/solver.hpp"
#include "gspca/variance.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>
#include <sstream>

namespace gspca::cli {

namespace {

namespace fs = std::filesystem;

GroupedMatrix load_data(const CliConfig& cfg)
{
    io::CsvTable table = io::read_csv(cfg.data_path);
    if (cfg.center)
        center_columns(table.data);
    GroupStructure groups = cfg.groups_path.empty()
                                ? GroupStructure::singletons(table.data.cols())
                                : io::read_groups(cfg.groups_path);
    if (groups.total() != table.data.cols())
        throw io::DataError(cfg.data_path + ": " + std::to_string(table.data.cols()) +
                            " columns, but the group spec covers " + std::to_string(groups.total()) +
                            " variables");
    return GroupedMatrix(std::move(table.data), std::move(groups));
}

SparsityParams sparsity_for(const CliConfig& cfg, const GroupedMatrix& a, double lambda)
{
    if (!cfg.gamma.empty()) {
        if (static_cast<int>(cfg.gamma.size()) != cfg.m)
            throw InvalidInput("--gamma needs exactly m = " + std::to_string(cfg.m) + " values");
        return SparsityParams(Eigen::Map<const Vector>(cfg.gamma.data(), cfg.m));
    }
    return SparsityParams::from_lambda(a, cfg.m, lambda);
}

SolverConfig solver_config(const CliConfig& cfg, SparsityParams gamma)
{
    SolverConfig sc{.weights = cfg.mu_mode == "equal" ? Weights::equal(cfg.m)
                                                      : Weights::decreasing(cfg.m),
                    .sparsity = std::move(gamma),
                    .max_iterations = cfg.max_iterations,
                    .rel_tol = cfg.tol};
    if (cfg.init == "random") {
        sc.init = InitKind::Random;
        sc.seed = cfg.seed;
    }
    return sc;
}

GspcaResult solve(const CliConfig& cfg, const GroupedMatrix& a, const SolverConfig& sc)
{
    if (cfg.algorithm == "pca")
        return pca_baseline(a, cfg.m);
    if (cfg.algorithm == "deflation")
        return deflation_solve(a, cfg.m, sc);
    return block_solve(a, cfg.m, sc);
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count)
{
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < count; ++j)
        names.push_back(prefix + std::to_string(j + 1));
    return names;
}

nlohmann::json active_json(const ActiveVariance& av)
{
    nlohmann::json j = av.report ? to_json(*av.report) : nlohmann::json::object();
    auto comps = nlohmann::json::array();
    for (auto k : av.active)
        comps.push_back(k + 1);
    j["components"] = comps;
    if (!av.report)
        j["error"] = av.error;
    return j;
}

std::vector<double> parse_grid(const std::string& text)
{
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':'))
            parts.push_back(std::stod(item));
        if (parts.size() != 3)
            throw InvalidInput("--lambda-grid expects start:stop:step or a comma list");
        return bench::lambda_range(parts[0], parts[1], parts[2]);
    }
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        grid.push_back(std::stod(item));
    if (grid.empty())
        throw InvalidInput("empty lambda grid");
    for (double v : grid)
        if (!(v >= 0.0 && v <= 1.0))
            throw InvalidInput("lambda values must lie in [0, 1]");
    return grid;
}

void ensure_parent(const std::string& path)
{
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty())
        fs::create_directories(parent);
}

std::vector<double> epsilon_grid(const nlohmann::json& spec)
{
    if (spec.contains("epsilon_grid"))
        return spec.at("epsilon_grid").get<std::vector<double>>();
    return {0.0, 1e-3, 1e-2};
}

bench::ExperimentSpec load_spec(const CliConfig& cfg, std::vector<double>& epsilons)
{
    const nlohmann::json j = io::read_json(cfg.spec_path);
    bench::ExperimentSpec spec = bench::spec_from_json(j);
    if (cfg.seed_given)
        spec.seed = cfg.seed;
    if (cfg.threads)
        spec.threads = cfg.threads;
    epsilons = epsilon_grid(j);
    return spec;
}

} // namespace

int cmd_fit(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
    const GroupedMatrix a = load_data(cfg);
    const SparsityParams gamma = sparsity_for(cfg, a, cfg.lambda.value_or(0.0));
    const SolverConfig sc = solver_config(cfg, gamma);
    const GspcaResult res = solve(cfg, a, sc);

    const double gmax = gamma_max(a);
    if (cfg.algorithm != "pca" && gamma.gamma().minCoeff() >= gmax)
        err << "warning: min_j gamma_j >= max_i ||a_i||_2; every loading is thresholded to zero\n";
    if (!res.converged)
        err << "warning: no convergence within " << cfg.max_iterations << " iterations\n";

    fs::create_directories(cfg.output);
    const fs::path dir(cfg.output);
    const Eigen::Index m = res.z.components();
    io::write_csv((dir / "loadings.csv").string(), res.z.z(), numbered("z", m));
    io::write_csv((dir / "components.csv").string(), res.y, numbered("y", m));
    io::write_csv((dir / "normalized_components.csv").string(), res.x, numbered("x", m));
    io::write_csv((dir / "objective_trace.csv").string(),
                  Eigen::Map<const Vector>(res.objective_trace.data(),
                                           static_cast<Eigen::Index>(res.objective_trace.size())),
                  {"F"});

    const SparsityPattern pattern = sparsity_pattern(res.z);
    const Matrix nonzero = (!pattern).cast<double>();
    io::write_csv((dir / "pattern.csv").string(), nonzero, numbered("z", m));
    const auto nonzero_groups = static_cast<long>(nonzero.sum());

    const ActiveVariance av = variance_of_active(a, res.z);
    if (av.active.size() < static_cast<std::size_t>(m))
        err << "warning: " << (m - static_cast<Eigen::Index>(av.active.size()))
            << " loading(s) are zero; explained variance uses the remaining ones\n";
    io::write_json((dir / "variance.json").string(), active_json(av));

    nlohmann::json fit;
    fit["algorithm"] = cfg.algorithm;
    fit["mu"] = cfg.mu_mode;
    fit["m"] = cfg.m;
    fit["gamma"] = std::vector<double>(gamma.gamma().data(), gamma.gamma().data() + m);
    fit["gamma_max"] = gmax;
    if (cfg.lambda)
        fit["lambda"] = *cfg.lambda;
    fit["objective"] = res.objective_trace.back();
    fit["iterations"] = res.iterations;
    fit["converged"] = res.converged;
    fit["nonzero_groups"] = nonzero_groups;
    fit["seed"] = cfg.seed;
    io::write_json((dir / "fit.json").string(), fit);

    out << "F*=" << io::format_double(res.objective_trace.back()) << " pev_optVar="
        << (av.report ? io::format_double(av.report->pev_optimal()) : std::string("n/a"))
        << " nonzero_groups=" << nonzero_groups << "/" << pattern.size()
        << " iterations=" << res.iterations << " converged=" << (res.converged ? "yes" : "no")
        << " seed=" << cfg.seed << '\n';
    return kSuccess;
}

int cmd_variance(const CliConfig& cfg, std::ostream& out, std::ostream&)
{
    const GroupedMatrix a = load_data(cfg);
    const io::CsvTable z = io::read_csv(cfg.loadings_path);
    if (z.data.rows() != a.cols())
        throw io::DataError(cfg.loadings_path + ": " + std::to_string(z.data.rows()) +
                            " rows, expected one per data column (" + std::to_string(a.cols()) + ")");
    VarianceReport report;
    try {
        report = variance_report(a, LoadingBlock(z.data, a.groups()));
    } catch (const RankDeficient& e) {
        throw RankDeficient(std::string("explained variance requires linearly independent "
                                        "components and loadings, rank(AZ) = rank(Z) = m: ") +
                            e.what());
    }
    const nlohmann::json j = to_json(report);
    if (cfg.output.empty()) {
        out << j.dump(2) << '\n';
    } else {
        ensure_parent(cfg.output);
        io::write_json(cfg.output, j);
        const auto pev = pev_values(report);
        for (std::size_t i = 0; i < pev.size(); ++i)
            out << (i ? " " : "") << "pev_" << kVarianceLabels[i] << '=' << io::format_double(pev[i]);
        out << '\n';
    }
    return kSuccess;
}

int cmd_sweep(const CliConfig& cfg, std::ostream& out, std::ostream&)
{
    const GroupedMatrix a = load_data(cfg);
    std::vector<bench::LongRow> rows;
    for (double lambda : parse_grid(cfg.lambda_grid)) {
        const GspcaResult res = solve(cfg, a, solver_config(cfg, sparsity_for(cfg, a, lambda)));
        auto add = [&](const std::string& metric, const std::string& comp, double v) {
            rows.push_back({cfg.algorithm, lambda, 0, metric, comp, v});
        };
        add("objective", "all", res.objective_trace.back());
        add("iterations", "all", res.iterations);
        add("converged", "all", res.converged ? 1.0 : 0.0);
        const SparsityPattern pattern = sparsity_pattern(res.z);
        add("nonzero_groups", "all", static_cast<double>((!pattern).count()));
        add("vol", "all", orthogonality_volume(res.y));
        const ActiveVariance av = variance_of_active(a, res.z);
        add("nonzero_loadings", "all", static_cast<double>(av.active.size()));
        if (av.report) {
            const auto pev = pev_values(*av.report);
            for (std::size_t i = 0; i < pev.size(); ++i)
                add(std::string("pev_") + kVarianceLabels[i], "all", pev[i]);
            for (Eigen::Index j = 0; j < av.theta_optimal.size(); ++j)
                add("theta_optVar", std::to_string(j + 1), av.theta_optimal(j));
        }
    }
    if (cfg.output.empty()) {
        io::write_long_csv(out, rows);
    } else {
        ensure_parent(cfg.output);
        io::write_long_csv(cfg.output, rows);
    }
    return kSuccess;
}

int cmd_bench(const CliConfig& cfg, std::ostream& out, std::ostream&)
{
    std::vector<double> epsilons;
    const bench::ExperimentSpec spec = load_spec(cfg, epsilons);
    out << "seed=" << spec.seed << '\n';
    const bench::ExperimentResult res = bench::run_experiment(spec);
    ensure_parent(cfg.output);
    io::write_long_csv(cfg.output + ".csv", bench::long_rows(res));
    const nlohmann::json summary = bench::summary_json(res, epsilons);
    io::write_json(cfg.output + ".json", summary);
    out << "cells=" << res.cells.size() << " failed=" << summary["failed_cells"].get<std::size_t>()
        << " wrote " << cfg.output << ".csv and " << cfg.output << ".json\n";
    return kSuccess;
}

int cmd_compare_groups(const CliConfig& cfg, std::ostream& out, std::ostream&)
{
    std::vector<double> epsilons;
    const bench::ExperimentSpec spec = load_spec(cfg, epsilons);
    out << "seed=" << spec.seed << '\n';
    const bench::GroupComparison cmp = bench::scalar_vs_group(spec);
    ensure_parent(cfg.output);
    io::write_long_csv(cfg.output + "_group.csv", bench::long_rows(cmp.group));
    io::write_long_csv(cfg.output + "_scalar.csv", bench::long_rows(cmp.scalar));
    nlohmann::json j;
    j["group"] = bench::summary_json(cmp.group, epsilons);
    j["scalar"] = bench::summary_json(cmp.scalar, epsilons);
    io::write_json(cfg.output + ".json", j);
    out << "wrote " << cfg.output << "_group.csv, " << cfg.output << "_scalar.csv and "
        << cfg.output << ".json\n";
    return kSuccess;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Group-sparse block PCA and explained variance for non-orthogonal components"};
    app.require_subcommand(1);
    CliConfig cfg;

    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data_path, "CSV data file (rows = samples)")->required();
        sub->add_option("--groups", cfg.groups_path, "JSON array of group sizes");
        sub->add_flag("--center", cfg.center, "Subtract column means before fitting");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("-m,--components", cfg.m, "Number of loadings")->check(CLI::PositiveNumber);
        sub->add_option("--algo", cfg.algorithm, "block | deflation | pca")
            ->check(CLI::IsMember({"block", "deflation", "pca"}));
        sub->add_option("--mu", cfg.mu_mode, "decreasing (1/j) | equal (1)")
            ->check(CLI::IsMember({"decreasing", "equal"}));
        sub->add_option("--init", cfg.init, "svd | random")->check(CLI::IsMember({"svd", "random"}));
        sub->add_option("--tol", cfg.tol, "Relative stopping tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", cfg.max_iterations, "Iteration limit")->check(CLI::PositiveNumber);
    };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "Seed for every random draw")
            ->each([&](const std::string&) { cfg.seed_given = true; });
    };

    auto* fit = app.add_subcommand("fit", "Fit group-sparse loadings on a data file");
    add_data(fit);
    add_solver(fit);
    add_seed(fit);
    auto* lam = fit->add_option("--lambda", cfg.lambda, "Reduced sparsity parameter in [0, 1]")
                    ->check(CLI::Range(0.0, 1.0));
    auto* gam = fit->add_option("--gamma", cfg.gamma, "Explicit gamma_j values")->delimiter(',');
    lam->excludes(gam);
    fit->add_option("-o,--out", cfg.output, "Output directory")->required();

    auto* var = app.add_subcommand("variance", "Explained-variance report for given loadings");
    add_data(var);
    var->add_option("--loadings", cfg.loadings_path, "CSV loadings (|p| x m)")->required();
    var->add_option("-o,--out", cfg.output, "Output JSON file (stdout if omitted)");

    auto* sweep = app.add_subcommand("sweep", "Single-algorithm lambda sweep on a data file");
    add_data(sweep);
    add_solver(sweep);
    add_seed(sweep);
    sweep->add_option("--lambda-grid", cfg.lambda_grid, "start:stop:step or comma list")
        ->check([](const std::string& text) {
            try {
                parse_grid(text);
            } catch (const std::exception& e) {
                return std::string("bad lambda grid '") + text + "': " + e.what();
            }
            return std::string();
        });
    sweep->add_option("-o,--out", cfg.output, "Output long CSV (stdout if omitted)");

    auto* bench_cmd = app.add_subcommand("bench", "Replicated synthetic benchmark");
    auto* cmp = app.add_subcommand("compare-groups", "Group versus scalar variables benchmark");
    for (auto* sub : {bench_cmd, cmp}) {
        sub->add_option("--spec", cfg.spec_path, "Experiment JSON")->required();
        sub->add_option("-o,--out", cfg.output, "Output prefix")->required();
        sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
        add_seed(sub);
    }

    std::vector<std::string> argv_store{"gspca"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store)
        argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        // help requests come through here too, with exit code 0
        return app.exit(e, out, err) == 0 ? kSuccess : kUsageError;
    }

    try {
        if (fit->parsed())
            return cmd_fit(cfg, out, err);
        if (var->parsed())
            return cmd_variance(cfg, out, err);
        if (sweep->parsed())
            return cmd_sweep(cfg, out, err);
        if (bench_cmd->parsed())
            return cmd_bench(cfg, out, err);
        return cmd_compare_groups(cfg, out, err);
    } catch (const RankDeficient& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const InvalidInput& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

} // namespace gspca::cli
