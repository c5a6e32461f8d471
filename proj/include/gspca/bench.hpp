#pragma once

#include "gspca/groups.hpp"
#include "gspca/linalg.hpp"
#include "gspca/solver.hpp"
#include "gspca/variance.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gspca::bench {

/// Group-sparse orthonormal loadings and the covariance spectrum around them.
struct GroundTruth {
    LoadingBlock z_true;   // |p| x m_true, orthonormal columns
    Vector eigenvalues;    // |p| entries, positive, nonincreasing over the first m_true

    const GroupStructure& groups() const { return z_true.groups(); }
    Eigen::Index components() const { return z_true.components(); }

    /// Throws InvalidInput when an invariant fails.
    void validate() const;

    /// Four loadings over five groups of four variables, eigenvalues
    /// (200, 180, 150, 130, 1, ..., 1). Each loading is supported on two
    /// adjacent groups, with group norms 0.85 and 0.53; loadings sharing a
    /// group are orthogonal inside it.
    static GroundTruth standard();

    /// The same loadings with every variable in its own group.
    GroundTruth with_groups(GroupStructure groups) const;
};

/// V_true: orthogonal |p| x |p| basis from QR of [Z_true, U] with U ~ U(0, 1).
Matrix true_basis(const GroundTruth& gt, std::uint64_t seed);

/// n samples of N(0, V diag(eigenvalues) V^T) as rows. Deterministic per seed.
GroupedMatrix generate_data(const GroundTruth& gt, Eigen::Index n, std::uint64_t seed);

/// Rates with "positive" meaning a zero group entry. Absent when the
/// denominator class is empty.
struct Rates {
    std::vector<std::optional<double>> tpr;   // per loading
    std::vector<std::optional<double>> fpr;
    std::optional<double> tpr_global;
    std::optional<double> fpr_global;
};

Rates tpr_fpr(const LoadingBlock& z, const LoadingBlock& z_true, double zero_tol = 0.0);

/// Column order of Z maximizing the summed |cosine| with the Z_true columns:
/// result[j] is the Z column matched to Z_true column j.
std::vector<Eigen::Index> match_columns(const Matrix& z, const Matrix& z_true);

enum class Algorithm { Deflation, BlockDifferentMu, BlockSameMu };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

/// Direct compares column j with column j; Matched pairs columns by |cosine|.
enum class Alignment { Direct, Matched };

/// Solves with the weights/solver that `algo` stands for.
GspcaResult run_algorithm(Algorithm algo, const GroupedMatrix& a, Eigen::Index m,
                          const SparsityParams& gamma, int max_iterations, double rel_tol);

struct ExperimentSpec {
    GroundTruth ground_truth = GroundTruth::standard();
    Eigen::Index n_samples = 300;
    int n_replicates = 100;
    std::vector<double> lambda_grid;
    std::vector<Algorithm> algorithms{Algorithm::Deflation, Algorithm::BlockDifferentMu,
                                      Algorithm::BlockSameMu};
    std::uint64_t seed = 1;
    double zero_tol = 0.0;
    Alignment alignment = Alignment::Direct;
    int max_iterations = 2000;
    double rel_tol = 1e-9;
    unsigned threads = 0;   // 0: hardware concurrency
    /// Partition used to score tpr/fpr. Defaults to the ground-truth groups;
    /// a scalar-variable fit can still be scored on the true groups.
    std::optional<GroupStructure> evaluation_groups;

    void validate() const;
};

/// Replicate seed derived from the experiment seed and the replicate index.
std::uint64_t replicate_seed(std::uint64_t seed, int replicate);

/// One (algorithm, lambda, replicate) solve and its metrics.
struct Cell {
    Algorithm algorithm = Algorithm::Deflation;
    std::size_t lambda_index = 0;
    double lambda = 0.0;
    int replicate = 0;

    bool ok = false;
    std::string error;

    Rates rates;
    std::optional<double> rv;   // absent when Z = 0
    double vol = 0.0;
    int nonzero_loadings = 0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double max_relative_drop = 0.0;   // largest (F_k - F_{k+1}) / |F_k| over the traces

    // Explained variance of the nonzero loadings; absent if none or if the
    // remaining components are linearly dependent.
    std::optional<VarianceReport> variance;
    std::vector<double> theta_optimal;   // m entries, 0 for zero loadings
};

struct ExperimentResult {
    std::vector<Algorithm> algorithms;
    std::vector<double> lambda_grid;
    int n_replicates = 0;
    Eigen::Index components = 0;
    std::vector<Cell> cells;   // ordered by (algorithm, lambda, replicate)

    const Cell& cell(std::size_t algo_index, std::size_t lambda_index, int replicate) const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Largest relative decrease between consecutive entries of the objective
/// trace (and of every deflation step trace); 0 for a nondecreasing run.
double max_relative_drop(const GspcaResult& res);

/// One line of the long-format output.
struct LongRow {
    std::string algorithm;
    double lambda = 0.0;
    int replicate = 0;
    std::string metric;
    std::string component;   // "global", "all" or a 1-based index
    double value = 0.0;
};

std::vector<LongRow> long_rows(const ExperimentResult& res);

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Type-7 quantile summary of a sample; count = 0 for an empty sample.
Summary summarize(std::vector<double> values);

/// Summary of one metric over the replicates of an (algorithm, lambda) cell.
Summary aggregate(const ExperimentResult& res, Algorithm algo, std::size_t lambda_index,
                  const std::string& metric, const std::string& component);

using PevMatrix = std::array<std::array<std::optional<double>, 5>, 5>;

struct RankingTables {
    /// [i][j]: percentage of cells with pev_i >= pev_j.
    PevMatrix dominance;
    struct Agreement {
        double epsilon = 0.0;
        std::size_t couples = 0;   // epsilon-distinguishable couples
        PevMatrix percent;         // [i][j], i < j: identical ranking by pev_i and pev_j
    };
    std::vector<Agreement> agreement;
};

/// Comparison slack used for pev_i >= pev_j in the dominance table.
inline constexpr double kDominanceSlack = 1e-12;

RankingTables ranking_tables(const ExperimentResult& res, const std::vector<double>& epsilons);

struct GroupComparison {
    ExperimentResult group;
    ExperimentResult scalar;
};

/// Same data, once with the true groups and once with singleton groups.
GroupComparison scalar_vs_group(const ExperimentSpec& spec);

nlohmann::json summary_json(const ExperimentResult& res, const std::vector<double>& epsilons);

nlohmann::json to_json(const RankingTables& t);

ExperimentSpec spec_from_json(const nlohmann::json& j);

/// lambda grid start, start + step, ..., up to stop (inclusive within 1e-9).
std::vector<double> lambda_range(double start, double stop, double step);

} // namespace gspca::bench
