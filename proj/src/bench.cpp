#include "gspca/bench.hpp"

#include "gspca/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <thread>
#include <tuple>

namespace gspca::bench {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Matrix basis_from(const GroundTruth& gt, std::mt19937_64& rng)
{
    const Eigen::Index p = gt.z_true.z().rows();
    const Eigen::Index m = gt.components();
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Matrix stacked(p, p);
    stacked.leftCols(m) = gt.z_true.z();
    for (Eigen::Index j = m; j < p; ++j)
        for (Eigen::Index i = 0; i < p; ++i)
            stacked(i, j) = uniform(rng);
    return thin_q(stacked);
}

std::optional<double> ratio(int num, int den)
{
    if (den == 0)
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

struct MetricValue {
    std::string metric;
    std::string component;
    double value;
};

std::vector<MetricValue> cell_metrics(const Cell& c)
{
    std::vector<MetricValue> out;
    if (!c.ok) {
        out.push_back({"failed", "all", 1.0});
        return out;
    }
    for (std::size_t j = 0; j < c.rates.tpr.size(); ++j) {
        const std::string comp = std::to_string(j + 1);
        if (c.rates.tpr[j])
            out.push_back({"tpr", comp, *c.rates.tpr[j]});
        if (c.rates.fpr[j])
            out.push_back({"fpr", comp, *c.rates.fpr[j]});
    }
    if (c.rates.tpr_global)
        out.push_back({"tpr", "global", *c.rates.tpr_global});
    if (c.rates.fpr_global)
        out.push_back({"fpr", "global", *c.rates.fpr_global});
    if (c.rv)
        out.push_back({"rv", "all", *c.rv});
    out.push_back({"vol", "all", c.vol});
    out.push_back({"nonzero_loadings", "all", static_cast<double>(c.nonzero_loadings)});
    out.push_back({"iterations", "all", static_cast<double>(c.iterations)});
    out.push_back({"converged", "all", c.converged ? 1.0 : 0.0});
    out.push_back({"objective", "all", c.objective});
    if (c.variance) {
        const auto pev = pev_values(*c.variance);
        for (std::size_t i = 0; i < pev.size(); ++i)
            out.push_back({std::string("pev_") + kVarianceLabels[i], "all", pev[i]});
        for (std::size_t j = 0; j < c.theta_optimal.size(); ++j)
            out.push_back({"theta_optVar", std::to_string(j + 1), c.theta_optimal[j]});
    }
    return out;
}

Cell evaluate_cell(const ExperimentSpec& spec, const GroupedMatrix& a, Algorithm algo,
                   std::size_t lambda_index, int replicate)
{
    const GroundTruth& gt = spec.ground_truth;
    const Eigen::Index m = gt.components();
    Cell c;
    c.algorithm = algo;
    c.lambda_index = lambda_index;
    c.lambda = spec.lambda_grid[lambda_index];
    c.replicate = replicate;
    try {
        const SparsityParams gamma = SparsityParams::from_lambda(a, m, c.lambda);
        GspcaResult res = run_algorithm(algo, a, m, gamma, spec.max_iterations, spec.rel_tol);
        Matrix z = res.z.z();
        Matrix y = res.y;
        if (spec.alignment == Alignment::Matched) {
            const auto order = match_columns(z, gt.z_true.z());
            Matrix zs(z.rows(), m), ys(y.rows(), m);
            for (Eigen::Index j = 0; j < m; ++j) {
                zs.col(j) = z.col(order[static_cast<std::size_t>(j)]);
                ys.col(j) = y.col(order[static_cast<std::size_t>(j)]);
            }
            z = std::move(zs);
            y = std::move(ys);
        }
        const LoadingBlock loadings(z, a.groups());
        if (spec.evaluation_groups)
            c.rates = tpr_fpr(LoadingBlock(z, *spec.evaluation_groups),
                              LoadingBlock(gt.z_true.z(), *spec.evaluation_groups), spec.zero_tol);
        else
            c.rates = tpr_fpr(loadings, gt.z_true, spec.zero_tol);
        c.iterations = res.iterations;
        c.converged = res.converged;
        c.objective = res.objective_trace.back();
        c.max_relative_drop = max_relative_drop(res);
        c.vol = orthogonality_volume(y);

        ActiveVariance av = variance_of_active(a, loadings, spec.zero_tol);
        c.nonzero_loadings = static_cast<int>(av.active.size());
        if (!av.active.empty())
            c.rv = rv_coefficient(z, gt.z_true.z());
        c.theta_optimal.assign(av.theta_optimal.data(), av.theta_optimal.data() + m);
        c.variance = std::move(av.report);
        c.ok = true;
    } catch (const std::exception& e) {
        c.ok = false;
        c.error = e.what();
    }
    return c;
}

} // namespace

void GroundTruth::validate() const
{
    const Matrix& z = z_true.z();
    const Eigen::Index m = z.cols();
    if (eigenvalues.size() != z.rows())
        throw InvalidInput("ground truth: need one eigenvalue per variable");
    if ((eigenvalues.array() <= 0.0).any())
        throw InvalidInput("ground truth: eigenvalues must be positive");
    for (Eigen::Index j = 1; j < m; ++j)
        if (eigenvalues(j) > eigenvalues(j - 1))
            throw InvalidInput("ground truth: leading eigenvalues must be nonincreasing");
    if (m > z.rows())
        throw InvalidInput("ground truth: more loadings than variables");
    if ((z.transpose() * z - Matrix::Identity(m, m)).norm() > 1e-10)
        throw InvalidInput("ground truth: loadings must be orthonormal");
}

GroundTruth GroundTruth::standard()
{
    const GroupStructure groups({4, 4, 4, 4, 4});
    // h_lead and h_share are orthogonal, so loadings overlapping in one
    // group stay orthogonal without touching the zero groups.
    Vector h_lead = (Vector(4) << 1.0, 0.8, 0.6, 0.4).finished();
    Vector h_share = (Vector(4) << 0.4, -0.6, 0.8, -1.0).finished();
    h_lead.normalize();
    h_share.normalize();
    // uneven group weights: the weak group goes first as lambda grows
    const double strong = 0.85;
    const double weak = std::sqrt(1.0 - strong * strong);

    constexpr Eigen::Index m = 4;
    Matrix z = Matrix::Zero(groups.total(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
        z.col(j).segment(groups.offset(j), 4) = strong * h_lead;
        z.col(j).segment(groups.offset(j + 1), 4) = weak * h_share;
    }

    Vector eig = Vector::Ones(groups.total());
    eig.head(m) << 200.0, 180.0, 150.0, 130.0;
    GroundTruth gt{LoadingBlock(std::move(z), groups), std::move(eig)};
    gt.validate();
    return gt;
}

GroundTruth GroundTruth::with_groups(GroupStructure groups) const
{
    return GroundTruth{LoadingBlock(z_true.z(), std::move(groups)), eigenvalues};
}

Matrix true_basis(const GroundTruth& gt, std::uint64_t seed)
{
    gt.validate();
    std::mt19937_64 rng(seed);
    return basis_from(gt, rng);
}

GroupedMatrix generate_data(const GroundTruth& gt, Eigen::Index n, std::uint64_t seed)
{
    gt.validate();
    if (n < 1)
        throw InvalidInput("generate_data: need at least one sample");
    std::mt19937_64 rng(seed);
    const Matrix v = basis_from(gt, rng);
    const Matrix factor = v * gt.eigenvalues.cwiseSqrt().asDiagonal();   // C = factor factor^T

    const Eigen::Index p = v.rows();
    std::normal_distribution<double> normal;
    Matrix g(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < p; ++k)
            g(i, k) = normal(rng);
    return GroupedMatrix(g * factor.transpose(), gt.groups());
}

Rates tpr_fpr(const LoadingBlock& z, const LoadingBlock& z_true, double zero_tol)
{
    if (z.z().rows() != z_true.z().rows() || z.components() != z_true.components() ||
        !(z.groups() == z_true.groups()))
        throw InvalidInput("tpr_fpr: loadings and ground truth differ in shape or groups");
    const SparsityPattern detected = sparsity_pattern(z, zero_tol);
    const SparsityPattern truth = sparsity_pattern(z_true, 0.0);

    Rates r;
    int tp_all = 0, zeros_all = 0, fp_all = 0, nonzeros_all = 0;
    for (Eigen::Index j = 0; j < z.components(); ++j) {
        int tp = 0, zeros = 0, fp = 0, nonzeros = 0;
        for (Eigen::Index i = 0; i < truth.rows(); ++i) {
            if (truth(i, j)) {
                ++zeros;
                tp += detected(i, j) ? 1 : 0;
            } else {
                ++nonzeros;
                fp += detected(i, j) ? 1 : 0;
            }
        }
        r.tpr.push_back(ratio(tp, zeros));
        r.fpr.push_back(ratio(fp, nonzeros));
        tp_all += tp;
        zeros_all += zeros;
        fp_all += fp;
        nonzeros_all += nonzeros;
    }
    r.tpr_global = ratio(tp_all, zeros_all);
    r.fpr_global = ratio(fp_all, nonzeros_all);
    return r;
}

std::vector<Eigen::Index> match_columns(const Matrix& z, const Matrix& z_true)
{
    const Eigen::Index m = z_true.cols();
    if (z.cols() != m || z.rows() != z_true.rows())
        throw InvalidInput("match_columns: shapes differ");
    Matrix score = Matrix::Zero(m, m);   // score(k, j): |cos(z_k, z_true_j)|
    for (Eigen::Index k = 0; k < m; ++k) {
        const double nk = z.col(k).norm();
        if (nk == 0.0)
            continue;
        for (Eigen::Index j = 0; j < m; ++j)
            score(k, j) = std::abs(z.col(k).dot(z_true.col(j))) / (nk * z_true.col(j).norm());
    }

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    if (m > 8) {
        // greedy for large blocks
        std::vector<bool> used(static_cast<std::size_t>(m), false);
        for (Eigen::Index j = 0; j < m; ++j) {
            Eigen::Index best = -1;
            for (Eigen::Index k = 0; k < m; ++k)
                if (!used[static_cast<std::size_t>(k)] && (best < 0 || score(k, j) > score(best, j)))
                    best = k;
            used[static_cast<std::size_t>(best)] = true;
            perm[static_cast<std::size_t>(j)] = best;
        }
        return perm;
    }
    std::vector<Eigen::Index> best = perm;
    double best_score = -1.0;
    do {
        double s = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            s += score(perm[static_cast<std::size_t>(j)], j);
        if (s > best_score + 1e-15) {
            best_score = s;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::Deflation: return "deflation";
    case Algorithm::BlockDifferentMu: return "block_different_mu";
    case Algorithm::BlockSameMu: return "block_same_mu";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& s)
{
    if (s == "deflation")
        return Algorithm::Deflation;
    if (s == "block_different_mu")
        return Algorithm::BlockDifferentMu;
    if (s == "block_same_mu")
        return Algorithm::BlockSameMu;
    throw InvalidInput("unknown algorithm '" + s + "'");
}

GspcaResult run_algorithm(Algorithm algo, const GroupedMatrix& a, Eigen::Index m,
                          const SparsityParams& gamma, int max_iterations, double rel_tol)
{
    SolverConfig cfg{.weights = algo == Algorithm::BlockSameMu ? Weights::equal(m)
                                                               : Weights::decreasing(m),
                     .sparsity = gamma,
                     .max_iterations = max_iterations,
                     .rel_tol = rel_tol};
    if (algo == Algorithm::Deflation)
        return deflation_solve(a, m, cfg);
    return block_solve(a, m, cfg);
}

void ExperimentSpec::validate() const
{
    ground_truth.validate();
    if (n_samples < 1)
        throw InvalidInput("experiment: n_samples must be at least 1");
    if (n_replicates < 1)
        throw InvalidInput("experiment: n_replicates must be at least 1");
    if (lambda_grid.empty())
        throw InvalidInput("experiment: lambda grid is empty");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] >= 0.0 && lambda_grid[i] <= 1.0))
            throw InvalidInput("experiment: lambda values must lie in [0, 1]");
        if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))
            throw InvalidInput("experiment: lambda grid must be sorted ascending");
    }
    if (algorithms.empty())
        throw InvalidInput("experiment: no algorithm selected");
    if (zero_tol < 0.0)
        throw InvalidInput("experiment: zero_tol must be nonnegative");
}

std::uint64_t replicate_seed(std::uint64_t seed, int replicate)
{
    return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(replicate));
}

const Cell& ExperimentResult::cell(std::size_t algo_index, std::size_t lambda_index,
                                   int replicate) const
{
    const std::size_t reps = static_cast<std::size_t>(n_replicates);
    return cells.at((algo_index * lambda_grid.size() + lambda_index) * reps +
                    static_cast<std::size_t>(replicate));
}

ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    const std::size_t n_algo = spec.algorithms.size();
    const std::size_t n_lambda = spec.lambda_grid.size();
    const std::size_t reps = static_cast<std::size_t>(spec.n_replicates);

    ExperimentResult res;
    res.algorithms = spec.algorithms;
    res.lambda_grid = spec.lambda_grid;
    res.n_replicates = spec.n_replicates;
    res.components = spec.ground_truth.components();
    res.cells.resize(n_algo * n_lambda * reps);

    // each task writes only its own slots, so the output is thread-count independent
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < reps; r = next++) {
            const int rep = static_cast<int>(r);
            std::optional<GroupedMatrix> a;
            std::string failure;
            try {
                a.emplace(generate_data(spec.ground_truth, spec.n_samples,
                                        replicate_seed(spec.seed, rep)));
            } catch (const std::exception& e) {
                failure = e.what();
            }
            for (std::size_t ai = 0; ai < n_algo; ++ai)
                for (std::size_t li = 0; li < n_lambda; ++li) {
                    Cell& slot = res.cells[(ai * n_lambda + li) * reps + r];
                    if (a) {
                        slot = evaluate_cell(spec, *a, spec.algorithms[ai], li, rep);
                    } else {
                        slot.algorithm = spec.algorithms[ai];
                        slot.lambda_index = li;
                        slot.lambda = spec.lambda_grid[li];
                        slot.replicate = rep;
                        slot.error = failure;
                    }
                }
        }
    };
    unsigned n_threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(reps));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return res;
}

double max_relative_drop(const GspcaResult& res)
{
    double worst = 0.0;
    auto scan = [&](const std::vector<double>& trace) {
        for (std::size_t k = 1; k < trace.size(); ++k) {
            const double scale = std::abs(trace[k - 1]);
            const double drop = trace[k - 1] - trace[k];
            if (drop > 0.0)
                worst = std::max(worst, scale > 0.0 ? drop / scale : drop);
        }
    };
    scan(res.objective_trace);
    for (const auto& t : res.step_traces)
        scan(t);
    return worst;
}

std::vector<LongRow> long_rows(const ExperimentResult& res)
{
    std::vector<LongRow> rows;
    for (const Cell& c : res.cells)
        for (const MetricValue& mv : cell_metrics(c))
            rows.push_back({to_string(c.algorithm), c.lambda, c.replicate, mv.metric, mv.component,
                            mv.value});
    return rows;
}

Summary summarize(std::vector<double> values)
{
    Summary s;
    s.count = values.size();
    if (values.empty())
        return s;
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    auto quantile = [&](double q) {
        const double h = (n - 1.0) * q;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    s.min = values.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = values.back();
    return s;
}

Summary aggregate(const ExperimentResult& res, Algorithm algo, std::size_t lambda_index,
                  const std::string& metric, const std::string& component)
{
    const auto it = std::find(res.algorithms.begin(), res.algorithms.end(), algo);
    if (it == res.algorithms.end())
        throw InvalidInput("aggregate: algorithm not in the experiment");
    const auto ai = static_cast<std::size_t>(it - res.algorithms.begin());
    std::vector<double> values;
    for (int r = 0; r < res.n_replicates; ++r)
        for (const MetricValue& mv : cell_metrics(res.cell(ai, lambda_index, r)))
            if (mv.metric == metric && mv.component == component)
                values.push_back(mv.value);
    return summarize(std::move(values));
}

RankingTables ranking_tables(const ExperimentResult& res, const std::vector<double>& epsilons)
{
    if (res.algorithms.size() < 2)
        throw InvalidInput("ranking_tables: need at least two algorithms");
    RankingTables t;

    std::array<std::array<int, 5>, 5> wins{};
    int evaluated = 0;
    for (const Cell& c : res.cells) {
        if (!c.ok || !c.variance)
            continue;
        const auto pev = pev_values(*c.variance);
        ++evaluated;
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                wins[i][j] += pev[i] >= pev[j] - kDominanceSlack ? 1 : 0;
    }
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            t.dominance[i][j] = evaluated ? std::optional<double>(100.0 * wins[i][j] / evaluated)
                                          : std::nullopt;

    // differences pev(P) - pev(Q) for every couple of algorithms on the same A and lambda
    std::vector<std::array<double, 5>> diffs;
    const std::size_t n_algo = res.algorithms.size();
    for (std::size_t li = 0; li < res.lambda_grid.size(); ++li)
        for (int r = 0; r < res.n_replicates; ++r)
            for (std::size_t p = 0; p < n_algo; ++p)
                for (std::size_t q = p + 1; q < n_algo; ++q) {
                    const Cell& cp = res.cell(p, li, r);
                    const Cell& cq = res.cell(q, li, r);
                    if (!cp.ok || !cq.ok || !cp.variance || !cq.variance)
                        continue;
                    const auto a = pev_values(*cp.variance);
                    const auto b = pev_values(*cq.variance);
                    std::array<double, 5> d{};
                    for (std::size_t i = 0; i < 5; ++i)
                        d[i] = a[i] - b[i];
                    diffs.push_back(d);
                }

    auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
    for (double eps : epsilons) {
        RankingTables::Agreement ag;
        ag.epsilon = eps;
        std::array<std::array<int, 5>, 5> same{};
        for (const auto& d : diffs) {
            if (!std::all_of(d.begin(), d.end(), [&](double v) { return std::abs(v) >= eps; }))
                continue;
            ++ag.couples;
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t j = i + 1; j < 5; ++j)
                    same[i][j] += sign(d[i]) == sign(d[j]) ? 1 : 0;
        }
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j)
                if (ag.couples > 0)
                    ag.percent[i][j] = 100.0 * same[i][j] / static_cast<double>(ag.couples);
        t.agreement.push_back(ag);
    }
    return t;
}

GroupComparison scalar_vs_group(const ExperimentSpec& spec)
{
    spec.validate();
    if (spec.ground_truth.groups().count() == spec.ground_truth.groups().total())
        throw InvalidInput("scalar_vs_group: ground truth has no non-trivial group");
    ExperimentSpec scalar = spec;
    scalar.ground_truth =
        spec.ground_truth.with_groups(GroupStructure::singletons(spec.ground_truth.groups().total()));
    scalar.evaluation_groups = spec.ground_truth.groups();
    return GroupComparison{run_experiment(spec), run_experiment(scalar)};
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json matrix_json(const PevMatrix& m)
{
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t i = 0; i < 5; ++i) {
        nlohmann::json row = nlohmann::json::object();
        for (std::size_t j = 0; j < 5; ++j)
            row[kVarianceLabels[j]] = optional_json(m[i][j]);
        out[kVarianceLabels[i]] = row;
    }
    return out;
}

nlohmann::json summary_to_json(const Summary& s)
{
    return {{"count", s.count},   {"mean", s.mean}, {"std_error", s.std_error},
            {"min", s.min},       {"q1", s.q1},     {"median", s.median},
            {"q3", s.q3},         {"max", s.max}};
}

} // namespace

nlohmann::json to_json(const RankingTables& t)
{
    nlohmann::json j;
    j["dominance_percent"] = matrix_json(t.dominance);
    auto ag = nlohmann::json::array();
    for (const auto& a : t.agreement)
        ag.push_back({{"epsilon", a.epsilon},
                      {"distinguishable_couples", a.couples},
                      {"agreement_percent", matrix_json(a.percent)}});
    j["ranking_agreement"] = ag;
    return j;
}

nlohmann::json summary_json(const ExperimentResult& res, const std::vector<double>& epsilons)
{
    nlohmann::json out;
    out["n_replicates"] = res.n_replicates;
    out["lambda_grid"] = res.lambda_grid;
    std::size_t failures = 0;
    for (const Cell& c : res.cells)
        failures += c.ok ? 0 : 1;
    out["failed_cells"] = failures;

    nlohmann::json algos = nlohmann::json::object();
    for (std::size_t ai = 0; ai < res.algorithms.size(); ++ai) {
        auto lambdas = nlohmann::json::array();
        for (std::size_t li = 0; li < res.lambda_grid.size(); ++li) {
            std::map<std::pair<std::string, std::string>, std::vector<double>> samples;
            for (int r = 0; r < res.n_replicates; ++r)
                for (const MetricValue& mv : cell_metrics(res.cell(ai, li, r)))
                    samples[{mv.metric, mv.component}].push_back(mv.value);
            nlohmann::json metrics = nlohmann::json::object();
            for (auto& [key, values] : samples)
                metrics[key.first][key.second] = summary_to_json(summarize(std::move(values)));
            lambdas.push_back({{"lambda", res.lambda_grid[li]}, {"metrics", metrics}});
        }
        algos[to_string(res.algorithms[ai])] = lambdas;
    }
    out["algorithms"] = algos;
    if (res.algorithms.size() >= 2)
        out["ranking"] = to_json(ranking_tables(res, epsilons));
    return out;
}

std::vector<double> lambda_range(double start, double stop, double step)
{
    if (!(step > 0.0) || stop < start)
        throw InvalidInput("lambda range: need step > 0 and stop >= start");
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        const double v = start + k * step;
        if (v > stop + 1e-9)
            break;
        grid.push_back(std::min(v, stop));
    }
    return grid;
}

ExperimentSpec spec_from_json(const nlohmann::json& j)
{
    ExperimentSpec spec;
    if (j.contains("ground_truth")) {
        const auto& g = j.at("ground_truth");
        const GroundTruth base = GroundTruth::standard();
        std::vector<Eigen::Index> sizes = g.value("groups", base.groups().sizes());
        GroupStructure groups(sizes);
        Matrix z = base.z_true.z();
        if (g.contains("loadings")) {
            const auto& rows = g.at("loadings");
            if (rows.empty())
                throw InvalidInput("ground_truth.loadings is empty");
            z.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows[0].size())
                    throw InvalidInput("ground_truth.loadings: ragged rows");
                for (std::size_t k = 0; k < rows[i].size(); ++k)
                    z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
            }
        }
        Vector eig = base.eigenvalues;
        if (g.contains("eigenvalues")) {
            const auto values = g.at("eigenvalues").get<std::vector<double>>();
            eig = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        }
        spec.ground_truth = GroundTruth{LoadingBlock(std::move(z), std::move(groups)), std::move(eig)};
    }
    spec.n_samples = j.value("n_samples", spec.n_samples);
    spec.n_replicates = j.value("n_replicates", spec.n_replicates);
    if (j.contains("lambda_grid")) {
        const auto& g = j.at("lambda_grid");
        if (g.is_object())
            spec.lambda_grid = lambda_range(g.value("start", 0.0), g.value("stop", 1.0),
                                            g.value("step", 0.01));
        else
            spec.lambda_grid = g.get<std::vector<double>>();
    } else {
        spec.lambda_grid = lambda_range(0.0, 1.0, 0.01);
    }
    if (j.contains("algorithms")) {
        spec.algorithms.clear();
        for (const auto& name : j.at("algorithms"))
            spec.algorithms.push_back(algorithm_from_string(name.get<std::string>()));
    }
    spec.seed = j.value("seed", spec.seed);
    spec.zero_tol = j.value("zero_tol", spec.zero_tol);
    const std::string alignment = j.value("alignment", std::string("direct"));
    if (alignment == "direct")
        spec.alignment = Alignment::Direct;
    else if (alignment == "matched")
        spec.alignment = Alignment::Matched;
    else
        throw InvalidInput("unknown alignment '" + alignment + "'");
    spec.max_iterations = j.value("max_iterations", spec.max_iterations);
    spec.rel_tol = j.value("rel_tol", spec.rel_tol);
    spec.threads = j.value("threads", spec.threads);
    spec.validate();
    return spec;
}

} // namespace gspca::bench
