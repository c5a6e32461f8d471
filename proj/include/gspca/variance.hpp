#pragma once

#include "gspca/groups.hpp"
#include "gspca/linalg.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace gspca {

// Explained variance of a block of possibly non-orthogonal components
// Y = A Z with rank(Y) = rank(Z) = m. Every function below throws
// RankDeficient when that precondition fails.

/// ||A P_Z||_F^2, depends only on span(Z).
double subspace_variance(const GroupedMatrix& a, const LoadingBlock& z);

/// tr{(Z^T A^T A Z)(Z^T Z)^{-1}}, evaluated through the triangular factor of Z^T Z.
double generalized_rayleigh_quotient(const Matrix& a, const Matrix& z);

/// Sum of squared diagonal entries of R in the norm-ordered QR of Y.
double adjusted_variance(const Matrix& y);

/// Sum of squared diagonal entries of (Y^T Y)^{1/2}.
double optimal_variance(const Matrix& y);

/// sum_j 1 / ||t_j||^2 with T = Z R^{-1} from the norm-ordered QR of Y = A Z.
double qr_normalized_variance(const GroupedMatrix& a, const LoadingBlock& z);

/// sum_j 1 / ||t_j||^2 with T = Z (Y^T Y)^{-1/2}.
double up_normalized_variance(const GroupedMatrix& a, const LoadingBlock& z);

/// (S)^{1/2} and (S)^{-1/2} of a symmetric PSD matrix through its
/// eigendecomposition, eigenvalues floored at 1e-14 lambda_max.
struct SymmetricRoots {
    Matrix sqrt;
    Matrix inv_sqrt;
};
SymmetricRoots symmetric_roots(const Matrix& s);

struct VarianceReport {
    double subspace = 0.0;
    double optimal = 0.0;
    double adjusted = 0.0;
    double qr_normalized = 0.0;
    double up_normalized = 0.0;
    double total_data_variance = 0.0;   // ||A||_F^2
    double pca_bound = 0.0;             // sum_{j<=m} sigma_j^2

    // Per-component contributions to each pev, in the original column
    // order. The subspace definition has no per-component split.
    Vector theta_optimal;
    Vector theta_adjusted;
    Vector theta_qr_normalized;
    Vector theta_up_normalized;

    double pev_subspace() const { return subspace / total_data_variance; }
    double pev_optimal() const { return optimal / total_data_variance; }
    double pev_adjusted() const { return adjusted / total_data_variance; }
    double pev_qr_normalized() const { return qr_normalized / total_data_variance; }
    double pev_up_normalized() const { return up_normalized / total_data_variance; }
};

VarianceReport variance_report(const GroupedMatrix& a, const LoadingBlock& z);

/// Definition labels, in the order subspVar, optVar, adjVar, QRnormVar, UPnormVar.
inline constexpr const char* kVarianceLabels[5] = {"subspVar", "optVar", "adjVar", "QRnormVar",
                                                   "UPnormVar"};

/// The five pev values in kVarianceLabels order.
std::array<double, 5> pev_values(const VarianceReport& r);

/// Explained variance restricted to the loadings with a nonzero group.
/// A zero loading carries no component, so it is left out and its
/// contributions are reported as 0.
struct ActiveVariance {
    std::vector<Eigen::Index> active;     // indices of the nonzero loadings
    std::optional<VarianceReport> report; // absent if no loading is active or rank fails
    std::string error;
    Vector theta_optimal;                 // m entries
};
ActiveVariance variance_of_active(const GroupedMatrix& a, const LoadingBlock& z, double zero_tol = 0.0);

nlohmann::json to_json(const VarianceReport& r);
VarianceReport variance_report_from_json(const nlohmann::json& j);

/// Throws RankDeficient naming `what` unless `m` has full column rank.
void require_full_column_rank(const Matrix& m, const char* what);

} // namespace gspca
