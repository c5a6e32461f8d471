#pragma once

#include <Eigen/Dense>

#include <vector>

namespace gspca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values at or below this fraction of sigma_1 count as zero.
inline constexpr double kRankTolerance = 1e-12;

/// Throws InvalidInput if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// Thin SVD truncated to the numerical rank: A = U diag(sigma) V^T.
struct SvdResult {
    Matrix left_vectors;        // n x r
    Vector singular_values;     // r, nonincreasing, all > 0
    Matrix right_vectors;       // cols(A) x r

    Eigen::Index rank() const { return singular_values.size(); }
};

/// Rank-revealing thin SVD. Throws InvalidInput on an all-zero or non-finite matrix.
SvdResult svd(const Matrix& a);

/// G = U P with U^T U = I and P symmetric positive semidefinite.
struct PolarResult {
    Matrix unitary;       // k x l
    Matrix psd_factor;    // l x l
    bool rank_deficient = false;   // U is then not unique
};

/// Polar decomposition of a k x l matrix (k >= l), computed from the thin SVD.
PolarResult polar(const Matrix& g);

/// QR factorization of Y after ordering its columns by decreasing norm.
///
/// `permutation[j]` is the original index of the j-th factored column, so
/// Q R = Y(:, permutation). Equal norms keep their original relative order.
/// The diagonal of R is strictly positive. Throws RankDeficient when the
/// columns are (numerically) linearly dependent.
struct NormOrderedQr {
    Matrix q;                            // n x m
    Matrix r;                            // m x m upper triangular
    std::vector<Eigen::Index> permutation;
};

NormOrderedQr qr_norm_ordered(const Matrix& y);

/// Largest singular value; 0 for the zero matrix.
double spectral_norm(const Matrix& b);

/// RV similarity ||X^T Y||_F^2 / (||X^T X||_F ||Y^T Y||_F), in [0, 1].
double rv_coefficient(const Matrix& x, const Matrix& y);

/// Volume of the parallelepiped spanned by the columns of Y divided by the
/// product of the column norms. 1 for orthogonal columns, 0 when degenerate.
double orthogonality_volume(const Matrix& y);

/// Thin orthonormal basis Q (first cols(m) columns of the Householder Q).
Matrix thin_q(const Matrix& m);

} // namespace gspca
