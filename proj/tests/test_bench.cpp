#include "gspca/bench.hpp"
#include "gspca/error.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>

using namespace gspca;
using namespace gspca::bench;

namespace {

ExperimentSpec small_spec(std::vector<double> grid, int reps, Eigen::Index n)
{
    ExperimentSpec s;
    s.n_samples = n;
    s.n_replicates = reps;
    s.lambda_grid = std::move(grid);
    s.seed = 7;
    s.threads = 1;
    return s;
}

bool same_cells(const ExperimentResult& a, const ExperimentResult& b)
{
    if (a.cells.size() != b.cells.size())
        return false;
    const auto ra = long_rows(a), rb = long_rows(b);
    if (ra.size() != rb.size())
        return false;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        if (ra[i].algorithm != rb[i].algorithm || ra[i].metric != rb[i].metric ||
            ra[i].component != rb[i].component || ra[i].replicate != rb[i].replicate)
            return false;
        // bitwise, not approximate
        if (std::memcmp(&ra[i].value, &rb[i].value, sizeof(double)) != 0)
            return false;
    }
    return true;
}

// same metrics up to rounding
bool close_cells(const ExperimentResult& a, const ExperimentResult& b, double tol)
{
    const auto ra = long_rows(a), rb = long_rows(b);
    if (ra.size() != rb.size())
        return false;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        if (ra[i].metric != rb[i].metric || ra[i].component != rb[i].component)
            return false;
        if (std::abs(ra[i].value - rb[i].value) > tol * std::max(1.0, std::abs(ra[i].value)))
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("standard ground truth")
{
    const GroundTruth gt = GroundTruth::standard();
    CHECK(gt.components() == 4);
    CHECK(gt.groups() == GroupStructure({4, 4, 4, 4, 4}));
    const Matrix& z = gt.z_true.z();
    CHECK((z.transpose() * z - Matrix::Identity(4, 4)).norm() < 1e-14);
    CHECK(gt.eigenvalues.head(4) == (Vector(4) << 200, 180, 150, 130).finished());
    CHECK((gt.eigenvalues.tail(16).array() == 1.0).all());
    // each loading touches exactly two groups
    const SparsityPattern pat = sparsity_pattern(gt.z_true, 0.0);
    for (Eigen::Index j = 0; j < 4; ++j) {
        int zeros = 0;
        for (Eigen::Index i = 0; i < 5; ++i)
            zeros += pat(i, j) ? 1 : 0;
        CHECK(zeros == 3);
    }

    GroundTruth bad = gt;
    bad.eigenvalues(2) = 190.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = gt;
    bad.eigenvalues(7) = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("true basis starts with Z_true")
{
    const GroundTruth gt = GroundTruth::standard();
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        const Matrix v = true_basis(gt, seed);
        CHECK((v.transpose() * v - Matrix::Identity(20, 20)).norm() < 1e-12);
        for (Eigen::Index j = 0; j < 4; ++j) {
            const double s = v.col(j).dot(gt.z_true.z().col(j)) > 0 ? 1.0 : -1.0;
            CHECK((s * v.col(j) - gt.z_true.z().col(j)).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("sample covariance matches V diag(eig) V^T")
{
    const GroundTruth gt = GroundTruth::standard();
    const std::uint64_t seed = 11;
    const Eigen::Index n = 200000;
    const GroupedMatrix a = generate_data(gt, n, seed);
    const Matrix v = true_basis(gt, seed);
    const Matrix c = v * gt.eigenvalues.asDiagonal() * v.transpose();
    const Matrix s = a.data().transpose() * a.data() / static_cast<double>(n);   // zero mean known
    int outside = 0;
    for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index k = 0; k <= i; ++k) {
            // var(x_i x_k) = C_ii C_kk + C_ik^2 for a Gaussian pair
            const double se = std::sqrt((c(i, i) * c(k, k) + c(i, k) * c(i, k)) / static_cast<double>(n));
            outside += std::abs(s(i, k) - c(i, k)) > 3.0 * se ? 1 : 0;
        }
    CHECK(outside == 0);
}

TEST_CASE("identity spectrum gives standard normal samples")
{
    GroundTruth gt = GroundTruth::standard();
    gt.eigenvalues.setOnes();
    const Eigen::Index n = 100000;
    const GroupedMatrix a = generate_data(gt, n, 3);
    const Matrix s = a.data().transpose() * a.data() / static_cast<double>(n);
    const double se = std::sqrt(2.0 / static_cast<double>(n));
    CHECK((s - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 5.0 * se);
    CHECK(a.data().colwise().mean().cwiseAbs().maxCoeff() < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("generate_data is deterministic per seed")
{
    const GroundTruth gt = GroundTruth::standard();
    CHECK(generate_data(gt, 50, 5).data() == generate_data(gt, 50, 5).data());
    CHECK(generate_data(gt, 50, 5).data() != generate_data(gt, 50, 6).data());
    CHECK_THROWS_AS(generate_data(gt, 0, 5), InvalidInput);
}

TEST_CASE("tpr_fpr examples")
{
    const GroundTruth gt = GroundTruth::standard();
    const Matrix& zt = gt.z_true.z();

    Matrix same = zt;
    same *= 3.0;
    auto r = tpr_fpr(LoadingBlock(same, gt.groups()), gt.z_true);
    CHECK(*r.tpr_global == 1.0);
    CHECK(*r.fpr_global == 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(*r.tpr[j] == 1.0);
        CHECK(*r.fpr[j] == 0.0);
    }

    r = tpr_fpr(LoadingBlock(Matrix::Zero(20, 4), gt.groups()), gt.z_true);
    CHECK(*r.tpr_global == 1.0);
    CHECK(*r.fpr_global == 1.0);

    r = tpr_fpr(LoadingBlock(Matrix::Ones(20, 4), gt.groups()), gt.z_true);
    CHECK(*r.tpr_global == 0.0);
    CHECK(*r.fpr_global == 0.0);

    // one true-zero group of column 0 detected, one true-nonzero group zeroed
    Matrix part = Matrix::Ones(20, 4);
    part.block(8, 0, 4, 1).setZero();
    part.block(0, 0, 4, 1).setZero();
    r = tpr_fpr(LoadingBlock(part, gt.groups()), gt.z_true);
    CHECK(*r.tpr[0] == doctest::Approx(1.0 / 3.0));
    CHECK(*r.fpr[0] == doctest::Approx(0.5));
    CHECK(*r.tpr_global == doctest::Approx(1.0 / 12.0));
    CHECK(*r.fpr_global == doctest::Approx(1.0 / 8.0));

    // zero_tol treats tiny groups as zero
    Matrix tiny = zt;
    tiny.block(8, 0, 4, 1).setConstant(1e-13);
    CHECK(*tpr_fpr(LoadingBlock(tiny, gt.groups()), gt.z_true, 1e-12).tpr[0] == 1.0);
    CHECK(*tpr_fpr(LoadingBlock(tiny, gt.groups()), gt.z_true, 0.0).tpr[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("tpr_fpr absent rates")
{
    const GroupStructure g({2, 2});
    const LoadingBlock dense(Matrix::Ones(4, 1), g);
    const auto r = tpr_fpr(dense, dense);
    CHECK_FALSE(r.tpr[0].has_value());
    CHECK_FALSE(r.tpr_global.has_value());
    CHECK(*r.fpr_global == 0.0);

    Matrix zero = Matrix::Zero(4, 1);
    const auto q = tpr_fpr(dense, LoadingBlock(zero, g));
    CHECK_FALSE(q.fpr_global.has_value());
    CHECK(*q.tpr_global == 0.0);

    CHECK_THROWS_AS(tpr_fpr(dense, LoadingBlock(Matrix::Ones(4, 1), GroupStructure({1, 3}))), InvalidInput);
}

TEST_CASE("match_columns recovers a permutation")
{
    std::mt19937_64 rng(81);
    const Matrix zt = oracle::orthonormal(12, 5, rng);
    const std::vector<Eigen::Index> perm{3, 0, 4, 1, 2};
    Matrix z(12, 5);
    for (Eigen::Index j = 0; j < 5; ++j)
        z.col(perm[static_cast<std::size_t>(j)]) = (j % 2 ? -2.0 : 0.5) * zt.col(j) + 0.05 * oracle::gaussian(12, 1, rng);
    CHECK(match_columns(z, zt) == perm);
}

TEST_CASE("replicate seeds differ and are stable")
{
    CHECK(replicate_seed(1, 0) == replicate_seed(1, 0));
    CHECK(replicate_seed(1, 0) != replicate_seed(1, 1));
    CHECK(replicate_seed(1, 0) != replicate_seed(2, 0));
}

TEST_CASE("experiment spec validation")
{
    ExperimentSpec s = small_spec({0.0, 0.5}, 1, 50);
    CHECK_NOTHROW(s.validate());
    s.lambda_grid = {0.5, 0.2};
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s.lambda_grid = {1.5};
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s.lambda_grid = {};
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = small_spec({0.1}, 0, 50);
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = small_spec({0.1}, 1, 50);
    s.algorithms.clear();
    CHECK_THROWS_AS(s.validate(), InvalidInput);
}

TEST_CASE("lambda zero recovers PCA with no detected zeros")
{
    const ExperimentResult res = run_experiment(small_spec({0.0}, 3, 300));
    CHECK(res.cells.size() == 9);
    for (const Cell& c : res.cells) {
        REQUIRE(c.ok);
        CHECK(*c.rates.tpr_global == 0.0);
        CHECK(*c.rates.fpr_global == 0.0);
        REQUIRE(c.variance);
        const auto& v = *c.variance;
        CHECK(v.subspace == doctest::Approx(v.pca_bound).epsilon(1e-8));
        CHECK(v.optimal == doctest::Approx(v.pca_bound).epsilon(1e-8));
    }
}

TEST_CASE("experiment output does not depend on the thread count")
{
    ExperimentSpec s = small_spec({0.0, 0.1, 0.3}, 4, 200);
    const ExperimentResult one = run_experiment(s);
    s.threads = 3;
    const ExperimentResult three = run_experiment(s);
    CHECK(same_cells(one, three));
    CHECK(same_cells(one, run_experiment(s)));
    s.seed = 8;
    CHECK_FALSE(same_cells(one, run_experiment(s)));
}

TEST_CASE("aggregates are ordered by lambda and stay in [0, 1]")
{
    const std::vector<double> grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    ExperimentSpec s = small_spec(grid, 20, 300);
    s.threads = 0;
    const ExperimentResult res = run_experiment(s);

    for (const Cell& c : res.cells) {
        REQUIRE(c.ok);
        for (const auto& v : {c.rates.tpr_global, c.rates.fpr_global})
            if (v) {
                CHECK(*v >= 0.0);
                CHECK(*v <= 1.0);
            }
        if (c.rv) {
            CHECK(*c.rv >= 0.0);
            CHECK(*c.rv <= 1.0 + 1e-12);
        }
        CHECK(c.vol >= 0.0);
        CHECK(c.vol <= 1.0 + 1e-12);
        if (c.variance)
            for (double p : pev_values(*c.variance)) {
                CHECK(p >= 0.0);
                CHECK(p <= 1.0 + 1e-12);
            }
    }

    for (Algorithm algo : s.algorithms) {
        for (std::size_t li = 1; li < grid.size(); ++li) {
            const Summary t0 = aggregate(res, algo, li - 1, "tpr", "global");
            const Summary t1 = aggregate(res, algo, li, "tpr", "global");
            CHECK(t1.mean >= t0.mean - std::max(t0.std_error, t1.std_error));
            const Summary p0 = aggregate(res, algo, li - 1, "pev_optVar", "all");
            const Summary p1 = aggregate(res, algo, li, "pev_optVar", "all");
            CHECK(p1.mean <= p0.mean + std::max(p0.std_error, p1.std_error));
        }
    }

    // per-component contributions shrink under the same-weight block solver
    for (std::size_t j = 1; j <= 4; ++j) {
        const Summary at0 = aggregate(res, Algorithm::BlockSameMu, 0, "theta_optVar", std::to_string(j));
        const Summary at5 = aggregate(res, Algorithm::BlockSameMu, 5, "theta_optVar", std::to_string(j));
        CHECK(at5.mean < at0.mean);
    }

    const RankingTables t = ranking_tables(res, {0.0, 1e-3, 1e-2});
    for (std::size_t j = 0; j < 5; ++j)
        CHECK(*t.dominance[0][j] == 100.0);
    CHECK(*t.dominance[1][2] == 100.0);
    REQUIRE(t.agreement.size() == 3);
    CHECK(t.agreement[0].couples >= t.agreement[1].couples);
    CHECK(t.agreement[1].couples >= t.agreement[2].couples);
    for (const auto& ag : t.agreement)
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j)
                if (ag.percent[i][j]) {
                    CHECK(*ag.percent[i][j] >= 0.0);
                    CHECK(*ag.percent[i][j] <= 100.0);
                }
}

TEST_CASE("ranking agreement absent when no couple is distinguishable")
{
    ExperimentSpec s = small_spec({0.2}, 2, 100);
    const RankingTables t = ranking_tables(run_experiment(s), {10.0});
    CHECK(t.agreement[0].couples == 0);
    CHECK_FALSE(t.agreement[0].percent[0][1].has_value());

    s.algorithms = {Algorithm::Deflation};
    CHECK_THROWS_AS(ranking_tables(run_experiment(s), {0.0}), InvalidInput);
}

TEST_CASE("scalar and group runs agree without an active penalty")
{
    const GroupComparison cmp = scalar_vs_group(small_spec({0.0}, 3, 200));
    CHECK(close_cells(cmp.group, cmp.scalar, 1e-8));

    // singleton truth: both runs use the same partition
    ExperimentSpec s = small_spec({0.0, 0.2}, 2, 200);
    s.ground_truth = s.ground_truth.with_groups(GroupStructure::singletons(20));
    CHECK_THROWS_AS(scalar_vs_group(s), InvalidInput);
    const ExperimentResult r1 = run_experiment(s);
    GroundTruth again = s.ground_truth.with_groups(GroupStructure::singletons(20));
    s.ground_truth = again;
    CHECK(same_cells(r1, run_experiment(s)));
}

TEST_CASE("scalar run is scored on the true groups")
{
    const GroupComparison cmp = scalar_vs_group(small_spec({0.3}, 2, 300));
    for (const Cell& c : cmp.scalar.cells) {
        REQUIRE(c.ok);
        CHECK(c.rates.tpr.size() == 4);
        CHECK(c.rates.tpr_global.has_value());
    }
}

TEST_CASE("summarize uses type-7 quantiles")
{
    const Summary s = summarize({4, 1, 3, 2, 5});
    CHECK(s.count == 5);
    CHECK(s.mean == 3.0);
    CHECK(s.min == 1.0);
    CHECK(s.q1 == 2.0);
    CHECK(s.median == 3.0);
    CHECK(s.q3 == 4.0);
    CHECK(s.max == 5.0);
    CHECK(s.std_error == doctest::Approx(std::sqrt(2.5 / 5.0)));
    const Summary e = summarize({1, 2, 3, 4});
    CHECK(e.q1 == doctest::Approx(1.75));
    CHECK(e.median == doctest::Approx(2.5));
    CHECK(summarize({}).count == 0);
    CHECK(summarize({7}).std_error == 0.0);
}

TEST_CASE("lambda_range")
{
    const auto g = lambda_range(0.0, 1.0, 0.25);
    CHECK(g == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(lambda_range(0.0, 1.0, 0.01).size() == 101);
    CHECK(lambda_range(0.0, 1.0, 0.01).back() == 1.0);
    CHECK_THROWS_AS(lambda_range(0.0, 1.0, 0.0), InvalidInput);
}

TEST_CASE("spec_from_json")
{
    const auto j = nlohmann::json::parse(R"({
        "n_samples": 120, "n_replicates": 3, "seed": 42,
        "lambda_grid": {"start": 0, "stop": 0.5, "step": 0.25},
        "algorithms": ["deflation", "block_same_mu"],
        "alignment": "matched", "threads": 2,
        "ground_truth": {"eigenvalues": [9, 8, 7, 6, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]}
    })");
    const ExperimentSpec s = spec_from_json(j);
    CHECK(s.n_samples == 120);
    CHECK(s.n_replicates == 3);
    CHECK(s.seed == 42);
    CHECK(s.lambda_grid == std::vector<double>{0.0, 0.25, 0.5});
    CHECK(s.algorithms == std::vector<Algorithm>{Algorithm::Deflation, Algorithm::BlockSameMu});
    CHECK(s.alignment == Alignment::Matched);
    CHECK(s.threads == 2);
    CHECK(s.ground_truth.eigenvalues(0) == 9.0);

    const ExperimentSpec list = spec_from_json(nlohmann::json::parse(R"({"lambda_grid": [0, 0.1]})"));
    CHECK(list.lambda_grid == std::vector<double>{0.0, 0.1});

    CHECK_THROWS(spec_from_json(nlohmann::json::parse(R"({"algorithms": ["nope"]})")));
    CHECK_THROWS(spec_from_json(nlohmann::json::parse(R"({"alignment": "nope"})")));
}

TEST_CASE("summary_json has one section per algorithm")
{
    const ExperimentResult res = run_experiment(small_spec({0.0, 0.2}, 2, 100));
    const nlohmann::json j = summary_json(res, {1e-2});
    CHECK(j.at("algorithms").size() == 3);
    CHECK(j.at("n_replicates") == 2);
    CHECK(j.contains("ranking"));
    CHECK(j.at("failed_cells") == 0);
}

TEST_CASE("max_relative_drop")
{
    GspcaResult r{LoadingBlock(Matrix::Zero(2, 1), GroupStructure({2})), Matrix(), Matrix(), {1.0, 2.0, 4.0}};
    CHECK(max_relative_drop(r) == 0.0);
    r.objective_trace = {1.0, 4.0, 3.0, 3.5};
    CHECK(max_relative_drop(r) == doctest::Approx(0.25));
    r.step_traces = {{2.0, 1.0}};
    CHECK(max_relative_drop(r) == doctest::Approx(0.5));
}
