#include "gspca/variance.hpp"

#include "gspca/error.hpp"

#include <string>

namespace gspca {

namespace {

constexpr double kEigenFloor = 1e-14;

Vector to_vector(const nlohmann::json& j)
{
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

nlohmann::json to_array(const Vector& v)
{
    auto arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

Matrix components_of(const GroupedMatrix& a, const LoadingBlock& z)
{
    if (z.z().rows() != a.cols())
        throw InvalidInput("loadings have " + std::to_string(z.z().rows()) +
                           " rows but the data has " + std::to_string(a.cols()) + " columns");
    return a.data() * z.z();
}

Vector inverse_squared_norms(const Matrix& t)
{
    return t.colwise().squaredNorm().cwiseInverse().transpose();
}

} // namespace

void require_full_column_rank(const Matrix& m, const char* what)
{
    require_finite(m, what);
    if (m.cols() == 0 || m.rows() < m.cols())
        throw RankDeficient(std::string(what) + ": fewer rows than columns, rank condition fails");
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < m.cols())
        throw RankDeficient(std::string(what) + ": rank " + std::to_string(qr.rank()) +
                            " < " + std::to_string(m.cols()) +
                            " (components and loadings must be linearly independent)");
}

SymmetricRoots symmetric_roots(const Matrix& s)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    Vector lambda = eig.eigenvalues();
    const double floor = kEigenFloor * std::max(lambda.maxCoeff(), 0.0);
    lambda = lambda.cwiseMax(floor);
    const Matrix& w = eig.eigenvectors();
    SymmetricRoots out;
    out.sqrt = w * lambda.cwiseSqrt().asDiagonal() * w.transpose();
    out.inv_sqrt = w * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * w.transpose();
    return out;
}

double subspace_variance(const GroupedMatrix& a, const LoadingBlock& z)
{
    require_full_column_rank(z.z(), "subspace variance");
    components_of(a, z);
    return (a.data() * thin_q(z.z())).squaredNorm();
}

double generalized_rayleigh_quotient(const Matrix& a, const Matrix& z)
{
    require_full_column_rank(z, "generalized Rayleigh quotient");
    // Z^T Z = R^T R with R from a QR of Z, so Z^T Z is never formed and
    // tr{(AZ)^T AZ (R^T R)^{-1}} = ||AZ R^{-1}||_F^2.
    const Eigen::HouseholderQR<Matrix> qr(z);
    const Matrix r = qr.matrixQR().topRows(z.cols()).triangularView<Eigen::Upper>();
    const Matrix w = r.transpose().triangularView<Eigen::Lower>().solve((a * z).transpose());
    return w.squaredNorm();
}

double adjusted_variance(const Matrix& y)
{
    return qr_norm_ordered(y).r.diagonal().squaredNorm();
}

double optimal_variance(const Matrix& y)
{
    require_full_column_rank(y, "optimal variance");
    return symmetric_roots(y.transpose() * y).sqrt.diagonal().squaredNorm();
}

double qr_normalized_variance(const GroupedMatrix& a, const LoadingBlock& z)
{
    const Matrix y = components_of(a, z);
    const NormOrderedQr qr = qr_norm_ordered(y);
    Matrix zp(z.z().rows(), z.components());
    for (Eigen::Index j = 0; j < zp.cols(); ++j)
        zp.col(j) = z.z().col(qr.permutation[static_cast<std::size_t>(j)]);
    // T R = Z Pi
    const Matrix t = qr.r.transpose().triangularView<Eigen::Lower>().solve(zp.transpose()).transpose();
    return inverse_squared_norms(t).sum();
}

double up_normalized_variance(const GroupedMatrix& a, const LoadingBlock& z)
{
    const Matrix y = components_of(a, z);
    require_full_column_rank(y, "UP normalized variance");
    const Matrix t = z.z() * symmetric_roots(y.transpose() * y).inv_sqrt;
    return inverse_squared_norms(t).sum();
}

VarianceReport variance_report(const GroupedMatrix& a, const LoadingBlock& z)
{
    const Matrix y = components_of(a, z);
    require_full_column_rank(z.z(), "variance report (loadings)");
    require_full_column_rank(y, "variance report (components)");
    const Eigen::Index m = z.components();

    VarianceReport r;
    r.total_data_variance = a.data().squaredNorm();
    r.pca_bound = svd(a.data()).singular_values.head(m).squaredNorm();
    r.subspace = (a.data() * thin_q(z.z())).squaredNorm();

    const SymmetricRoots roots = symmetric_roots(y.transpose() * y);
    const Vector p_diag = roots.sqrt.diagonal();
    r.optimal = p_diag.squaredNorm();
    r.theta_optimal = p_diag.array().square() / r.total_data_variance;

    const Vector up = inverse_squared_norms(z.z() * roots.inv_sqrt);
    r.up_normalized = up.sum();
    r.theta_up_normalized = up / r.total_data_variance;

    const NormOrderedQr qr = qr_norm_ordered(y);
    Matrix zp(z.z().rows(), m);
    for (Eigen::Index j = 0; j < m; ++j)
        zp.col(j) = z.z().col(qr.permutation[static_cast<std::size_t>(j)]);
    const Matrix t = qr.r.transpose().triangularView<Eigen::Lower>().solve(zp.transpose()).transpose();
    const Vector qr_norm = inverse_squared_norms(t);
    r.adjusted = qr.r.diagonal().squaredNorm();
    r.qr_normalized = qr_norm.sum();

    r.theta_adjusted.resize(m);
    r.theta_qr_normalized.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index orig = qr.permutation[static_cast<std::size_t>(j)];
        r.theta_adjusted(orig) = qr.r(j, j) * qr.r(j, j) / r.total_data_variance;
        r.theta_qr_normalized(orig) = qr_norm(j) / r.total_data_variance;
    }
    return r;
}

ActiveVariance variance_of_active(const GroupedMatrix& a, const LoadingBlock& z, double zero_tol)
{
    ActiveVariance out;
    const SparsityPattern pattern = sparsity_pattern(z, zero_tol);
    for (Eigen::Index j = 0; j < z.components(); ++j)
        if (!pattern.col(j).all())
            out.active.push_back(j);
    out.theta_optimal = Vector::Zero(z.components());
    if (out.active.empty()) {
        out.error = "every loading is zero";
        return out;
    }
    Matrix za(z.z().rows(), static_cast<Eigen::Index>(out.active.size()));
    for (std::size_t k = 0; k < out.active.size(); ++k)
        za.col(static_cast<Eigen::Index>(k)) = z.z().col(out.active[k]);
    try {
        VarianceReport r = variance_report(a, LoadingBlock(std::move(za), z.groups()));
        for (std::size_t k = 0; k < out.active.size(); ++k)
            out.theta_optimal(out.active[k]) = r.theta_optimal(static_cast<Eigen::Index>(k));
        out.report = std::move(r);
    } catch (const RankDeficient& e) {
        out.error = e.what();
    }
    return out;
}

std::array<double, 5> pev_values(const VarianceReport& r)
{
    return {r.pev_subspace(), r.pev_optimal(), r.pev_adjusted(), r.pev_qr_normalized(),
            r.pev_up_normalized()};
}

nlohmann::json to_json(const VarianceReport& r)
{
    nlohmann::json j;
    j["subspVar"] = r.subspace;
    j["optVar"] = r.optimal;
    j["adjVar"] = r.adjusted;
    j["QRnormVar"] = r.qr_normalized;
    j["UPnormVar"] = r.up_normalized;
    j["pev_subspVar"] = r.pev_subspace();
    j["pev_optVar"] = r.pev_optimal();
    j["pev_adjVar"] = r.pev_adjusted();
    j["pev_QRnormVar"] = r.pev_qr_normalized();
    j["pev_UPnormVar"] = r.pev_up_normalized();
    j["total_data_variance"] = r.total_data_variance;
    j["pca_bound"] = r.pca_bound;
    j["pev_pca_bound"] = r.pca_bound / r.total_data_variance;
    j["theta_optVar"] = to_array(r.theta_optimal);
    j["theta_adjVar"] = to_array(r.theta_adjusted);
    j["theta_QRnormVar"] = to_array(r.theta_qr_normalized);
    j["theta_UPnormVar"] = to_array(r.theta_up_normalized);
    return j;
}

VarianceReport variance_report_from_json(const nlohmann::json& j)
{
    VarianceReport r;
    r.subspace = j.at("subspVar").get<double>();
    r.optimal = j.at("optVar").get<double>();
    r.adjusted = j.at("adjVar").get<double>();
    r.qr_normalized = j.at("QRnormVar").get<double>();
    r.up_normalized = j.at("UPnormVar").get<double>();
    r.total_data_variance = j.at("total_data_variance").get<double>();
    r.pca_bound = j.at("pca_bound").get<double>();
    r.theta_optimal = to_vector(j.at("theta_optVar"));
    r.theta_adjusted = to_vector(j.at("theta_adjVar"));
    r.theta_qr_normalized = to_vector(j.at("theta_QRnormVar"));
    r.theta_up_normalized = to_vector(j.at("theta_UPnormVar"));
    return r;
}

} // namespace gspca
