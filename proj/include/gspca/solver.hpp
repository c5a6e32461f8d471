#pragma once

#include "gspca/groups.hpp"
#include "gspca/linalg.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gspca {

/// Component weights mu_j (the diagonal of N).
class Weights {
public:
    explicit Weights(Vector mu);

    /// mu_j = 1/j, strictly decreasing.
    static Weights decreasing(Eigen::Index m);
    /// mu_j = 1.
    static Weights equal(Eigen::Index m);

    const Vector& mu() const { return mu_; }
    Eigen::Index size() const { return mu_.size(); }
    bool strictly_decreasing() const;

private:
    Vector mu_;
};

/// Per-component thresholds gamma_j >= 0.
class SparsityParams {
public:
    explicit SparsityParams(Vector gamma);

    /// gamma_j = lambda * gamma_{j,max} with lambda in [0, 1].
    static SparsityParams from_lambda(const GroupedMatrix& a, Eigen::Index m, double lambda);
    static SparsityParams zero(Eigen::Index m) { return SparsityParams(Vector::Zero(m)); }

    const Vector& gamma() const { return gamma_; }
    Eigen::Index size() const { return gamma_.size(); }

private:
    Vector gamma_;
};

enum class InitKind { LeftSingularVectors, Provided, Random };

struct SolverConfig {
    Weights weights;
    SparsityParams sparsity;
    int max_iterations = 2000;
    double rel_tol = 1e-9;
    InitKind init = InitKind::LeftSingularVectors;
    std::optional<Matrix> x0;        // used when init == Provided
    std::uint64_t seed = 0;          // used when init == Random

    /// Throws InvalidInput if the config does not fit m components.
    void validate(Eigen::Index m) const;
};

/// t_{ij} = u_{ij} [alpha_{ij} - gamma_j]_+ for every group i, component j.
struct ThresholdResult {
    Matrix t;           // |p| x m
    Matrix alpha;       // groups x m, alpha_{ij} = ||a_i^T x_j||
    Matrix directions;  // |p| x m, block (i, j) is the unit vector u_{ij}
};

struct GspcaResult {
    LoadingBlock z;                       // unit or zero columns
    Matrix y;                             // A Z against the original data
    Matrix x;                             // n x m, orthonormal columns
    std::vector<double> objective_trace;  // F(X_k), k = 0, 1, ...
    int iterations = 0;
    bool converged = false;
    /// Deflation only: the objective trace of each single-loading solve.
    std::vector<std::vector<double>> step_traces;
};

/// gamma_{j,max} = (sigma_j / sigma_1) max_i ||a_i||_2 for j < m.
Vector nominal_gammas(const GroupedMatrix& a, Eigen::Index m);

/// max_i ||a_i||_2.
double gamma_max(const GroupedMatrix& a);

ThresholdResult threshold_map(const GroupedMatrix& a, const Matrix& x, const SparsityParams& gamma);

/// F(X) = sum_j mu_j^2 sum_i [||a_i^T x_j|| - gamma_j]_+^2.
double objective_F(const GroupedMatrix& a, const Matrix& x, const SolverConfig& cfg);

/// 2 A T N^2 (a subgradient at kinks).
Matrix gradient_F(const GroupedMatrix& a, const Matrix& x, const SolverConfig& cfg);

/// Group-sparse block PCA: X_{k+1} = polar(2 A T_k N^2), then z_j = t_j / ||t_j||.
GspcaResult block_solve(const GroupedMatrix& a, Eigen::Index m, const SolverConfig& cfg);

/// Loading-by-loading solve on successively deflated data.
GspcaResult deflation_solve(const GroupedMatrix& a, Eigen::Index m, const SolverConfig& cfg);

/// Plain PCA: Z = V_m, Y = U_m Sigma_m, X = U_m.
GspcaResult pca_baseline(const GroupedMatrix& a, Eigen::Index m);

/// Flips signs so that the largest-magnitude entry of each column is positive.
void fix_column_signs(Matrix& z, Matrix* companion = nullptr);

/// A seeded random n x m matrix with orthonormal columns.
Matrix random_orthonormal(Eigen::Index n, Eigen::Index m, std::uint64_t seed);

} // namespace gspca
