#include "gspca/linalg.hpp"

#include "gspca/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gspca {

namespace {

using JacobiThin = Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner>;

} // namespace

void require_finite(const Matrix& m, const char* what)
{
    if (!m.allFinite())
        throw InvalidInput(std::string(what) + ": matrix contains NaN or infinite entries");
}

SvdResult svd(const Matrix& a)
{
    require_finite(a, "svd");
    if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0)
        throw InvalidInput("svd: matrix is empty or all-zero");

    JacobiThin solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = solver.singularValues();
    const double cutoff = kRankTolerance * s(0);
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > cutoff)
        ++rank;

    SvdResult out;
    out.left_vectors = solver.matrixU().leftCols(rank);
    out.singular_values = s.head(rank);
    out.right_vectors = solver.matrixV().leftCols(rank);
    return out;
}

PolarResult polar(const Matrix& g)
{
    require_finite(g, "polar");
    const Eigen::Index k = g.rows();
    const Eigen::Index l = g.cols();
    if (l == 0 || k < l)
        throw InvalidInput("polar: expected a k x l matrix with k >= l >= 1");

    PolarResult out;
    if (l == 1) {
        const double norm = g.norm();
        out.psd_factor = Matrix::Constant(1, 1, norm);
        if (norm > 0.0) {
            out.unitary = g / norm;
        } else {
            out.unitary = Matrix::Zero(k, 1);
            out.unitary(0, 0) = 1.0;
            out.rank_deficient = true;
        }
        return out;
    }

    JacobiThin solver(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = solver.singularValues();
    const Matrix& w1 = solver.matrixU();
    const Matrix& w2 = solver.matrixV();
    out.unitary = w1 * w2.transpose();
    out.psd_factor = w2 * s.asDiagonal() * w2.transpose();
    out.psd_factor = 0.5 * (out.psd_factor + out.psd_factor.transpose()).eval();
    out.rank_deficient = s(0) == 0.0 || s(l - 1) <= kRankTolerance * s(0);
    return out;
}

Matrix thin_q(const Matrix& m)
{
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

namespace {

// Shared by qr_norm_ordered (throws) and orthogonality_volume (returns 0).
bool try_qr_norm_ordered(const Matrix& y, NormOrderedQr& out)
{
    const Eigen::Index n = y.rows();
    const Eigen::Index m = y.cols();
    if (m == 0)
        throw InvalidInput("qr_norm_ordered: matrix has no columns");
    require_finite(y, "qr_norm_ordered");

    const Vector norms = y.colwise().norm().transpose();
    out.permutation.resize(static_cast<std::size_t>(m));
    std::iota(out.permutation.begin(), out.permutation.end(), Eigen::Index{0});
    std::stable_sort(out.permutation.begin(), out.permutation.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return norms(a) > norms(b); });

    const double largest = norms(out.permutation.front());
    if (n < m || largest == 0.0)
        return false;

    Matrix permuted(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        permuted.col(j) = y.col(out.permutation[static_cast<std::size_t>(j)]);

    Eigen::HouseholderQR<Matrix> qr(permuted);
    out.r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    out.q = qr.householderQ() * Matrix::Identity(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        if (out.r(j, j) < 0.0) {
            out.r.row(j) *= -1.0;
            out.q.col(j) *= -1.0;
        }
        if (out.r(j, j) <= kRankTolerance * largest)
            return false;
    }
    return true;
}

} // namespace

NormOrderedQr qr_norm_ordered(const Matrix& y)
{
    NormOrderedQr out;
    if (!try_qr_norm_ordered(y, out))
        throw RankDeficient("qr_norm_ordered: columns are linearly dependent");
    return out;
}

double spectral_norm(const Matrix& b)
{
    if (b.size() == 0)
        throw InvalidInput("spectral_norm: empty matrix");
    require_finite(b, "spectral_norm");
    if (b.cwiseAbs().maxCoeff() == 0.0)
        return 0.0;
    return JacobiThin(b).singularValues()(0);
}

double rv_coefficient(const Matrix& x, const Matrix& y)
{
    if (x.rows() != y.rows())
        throw InvalidInput("rv_coefficient: row counts differ");
    require_finite(x, "rv_coefficient");
    require_finite(y, "rv_coefficient");
    const double xx = (x.transpose() * x).norm();
    const double yy = (y.transpose() * y).norm();
    if (xx == 0.0 || yy == 0.0)
        throw InvalidInput("rv_coefficient: zero-norm argument");
    return (x.transpose() * y).squaredNorm() / (xx * yy);
}

double orthogonality_volume(const Matrix& y)
{
    NormOrderedQr qr;
    if (!try_qr_norm_ordered(y, qr))
        return 0.0;
    double volume = 1.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j)
        volume *= qr.r(j, j) / y.col(qr.permutation[static_cast<std::size_t>(j)]).norm();
    // r_jj <= ||y_pi(j)|| holds exactly in exact arithmetic
    return std::min(volume, 1.0);
}

} // namespace gspca
