#include "gspca/solver.hpp"

#include "gspca/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gspca {

namespace {

constexpr double kObjectiveFloor = 1e-300;
constexpr double kStiefelTolerance = 1e-8;

void require_stiefel(const Matrix& x, Eigen::Index rows, Eigen::Index m, const char* what)
{
    if (x.rows() != rows || x.cols() != m)
        throw InvalidInput(std::string(what) + ": expected a " + std::to_string(rows) + " x " +
                           std::to_string(m) + " matrix");
    require_finite(x, what);
    if ((x.transpose() * x - Matrix::Identity(m, m)).norm() > kStiefelTolerance)
        throw InvalidInput(std::string(what) + ": columns are not orthonormal");
}

Eigen::Index checked_rank(const GroupedMatrix& a, Eigen::Index m, const SvdResult& s)
{
    if (m < 1)
        throw InvalidInput("number of components must be at least 1");
    if (m > s.rank())
        throw RankDeficient("requested " + std::to_string(m) + " components but rank(A) = " +
                            std::to_string(s.rank()));
    return a.rows();
}

// Loadings from the threshold vectors: z_j = t_j / ||t_j|| or 0.
Matrix loadings_from(const Matrix& t)
{
    Matrix z = Matrix::Zero(t.rows(), t.cols());
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
        const double norm = t.col(j).norm();
        if (norm > 0.0)
            z.col(j) = t.col(j) / norm;
    }
    return z;
}

Matrix weighted_gradient(const GroupedMatrix& a, const Matrix& t, const Vector& mu)
{
    return 2.0 * a.data() * t * mu.array().square().matrix().asDiagonal();
}

double objective_from(const ThresholdResult& thr, const Vector& mu)
{
    double f = 0.0;
    for (Eigen::Index j = 0; j < thr.t.cols(); ++j)
        f += mu(j) * mu(j) * thr.t.col(j).squaredNorm();
    return f;
}

// A Stiefel point with F > 0, built as in the positivity argument for
// min_j gamma_j < max_i ||a_i||_2: align x_l with the top left singular
// vector of the group block with the largest spectral norm.
Matrix positive_start(const GroupedMatrix& a, const Matrix& x0, const SparsityParams& gamma)
{
    Eigen::Index best_group = 0;
    double best_norm = -1.0;
    for (Eigen::Index i = 0; i < a.groups().count(); ++i) {
        const double norm = spectral_norm(a.group_slice(i));
        if (norm > best_norm) {
            best_norm = norm;
            best_group = i;
        }
    }
    Eigen::Index target = 0;
    gamma.gamma().minCoeff(&target);

    const Vector lead = svd(a.group_slice(best_group)).left_vectors.col(0);
    const Eigen::Index m = x0.cols();
    Matrix basis(x0.rows(), m + 1);
    basis.col(0) = lead;
    basis.rightCols(m) = x0;
    const Matrix q = thin_q(basis);

    Matrix x(x0.rows(), m);
    x.col(target) = q.col(0);
    for (Eigen::Index j = 0, k = 1; j < m; ++j)
        if (j != target)
            x.col(j) = q.col(k++);
    return x;
}

Matrix initial_point(const GroupedMatrix& a, Eigen::Index m, const SolverConfig& cfg,
                     const SvdResult& s)
{
    switch (cfg.init) {
    case InitKind::LeftSingularVectors:
        return s.left_vectors.leftCols(m);
    case InitKind::Provided:
        require_stiefel(*cfg.x0, a.rows(), m, "initial point");
        return *cfg.x0;
    case InitKind::Random:
        return random_orthonormal(a.rows(), m, cfg.seed);
    }
    throw InvalidInput("unknown initialization");
}

} // namespace

Weights::Weights(Vector mu) : mu_(std::move(mu))
{
    if (mu_.size() < 1)
        throw InvalidInput("weights: need at least one component");
    if (!mu_.allFinite() || (mu_.array() <= 0.0).any())
        throw InvalidInput("weights: every mu_j must be positive and finite");
}

Weights Weights::decreasing(Eigen::Index m)
{
    Vector mu(m);
    for (Eigen::Index j = 0; j < m; ++j)
        mu(j) = 1.0 / static_cast<double>(j + 1);
    return Weights(std::move(mu));
}

Weights Weights::equal(Eigen::Index m)
{
    return Weights(Vector::Ones(m));
}

bool Weights::strictly_decreasing() const
{
    for (Eigen::Index j = 1; j < mu_.size(); ++j)
        if (!(mu_(j) < mu_(j - 1)))
            return false;
    return true;
}

SparsityParams::SparsityParams(Vector gamma) : gamma_(std::move(gamma))
{
    if (gamma_.size() < 1)
        throw InvalidInput("sparsity: need at least one component");
    if (!gamma_.allFinite() || (gamma_.array() < 0.0).any())
        throw InvalidInput("sparsity: every gamma_j must be nonnegative and finite");
}

SparsityParams SparsityParams::from_lambda(const GroupedMatrix& a, Eigen::Index m, double lambda)
{
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw InvalidInput("reduced sparsity parameter lambda must lie in [0, 1]");
    return SparsityParams(lambda * nominal_gammas(a, m));
}

void SolverConfig::validate(Eigen::Index m) const
{
    if (weights.size() != m)
        throw InvalidInput("weights: expected " + std::to_string(m) + " entries");
    if (sparsity.size() != m)
        throw InvalidInput("sparsity: expected " + std::to_string(m) + " entries");
    if (max_iterations < 1)
        throw InvalidInput("max_iterations must be at least 1");
    if (!(rel_tol > 0.0))
        throw InvalidInput("rel_tol must be positive");
    if (init == InitKind::Provided && !x0)
        throw InvalidInput("initialization 'provided' requires an initial point");
}

double gamma_max(const GroupedMatrix& a)
{
    double best = 0.0;
    for (Eigen::Index i = 0; i < a.groups().count(); ++i)
        best = std::max(best, spectral_norm(a.group_slice(i)));
    return best;
}

Vector nominal_gammas(const GroupedMatrix& a, Eigen::Index m)
{
    const SvdResult s = svd(a.data());
    checked_rank(a, m, s);
    return (s.singular_values.head(m) / s.singular_values(0)) * gamma_max(a);
}

ThresholdResult threshold_map(const GroupedMatrix& a, const Matrix& x, const SparsityParams& gamma)
{
    if (x.rows() != a.rows())
        throw InvalidInput("threshold_map: X row count differs from A");
    const Eigen::Index m = x.cols();
    if (gamma.size() != m)
        throw InvalidInput("threshold_map: gamma size differs from the component count");

    const auto& groups = a.groups();
    const Matrix atx = a.data().transpose() * x;
    ThresholdResult out;
    out.t = Matrix::Zero(atx.rows(), m);
    out.alpha.resize(groups.count(), m);
    out.directions = Matrix::Zero(atx.rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double g = gamma.gamma()(j);
        for (Eigen::Index i = 0; i < groups.count(); ++i) {
            const auto block = atx.col(j).segment(groups.offset(i), groups.size(i));
            const double alpha = block.norm();
            out.alpha(i, j) = alpha;
            auto dir = out.directions.col(j).segment(groups.offset(i), groups.size(i));
            if (alpha > 0.0)
                dir = block / alpha;
            else
                dir(0) = 1.0;
            const double shrunk = alpha - g;
            if (shrunk > 0.0)
                out.t.col(j).segment(groups.offset(i), groups.size(i)) = dir * shrunk;
        }
    }
    return out;
}

double objective_F(const GroupedMatrix& a, const Matrix& x, const SolverConfig& cfg)
{
    return objective_from(threshold_map(a, x, cfg.sparsity), cfg.weights.mu());
}

Matrix gradient_F(const GroupedMatrix& a, const Matrix& x, const SolverConfig& cfg)
{
    return weighted_gradient(a, threshold_map(a, x, cfg.sparsity).t, cfg.weights.mu());
}

GspcaResult block_solve(const GroupedMatrix& a, Eigen::Index m, const SolverConfig& cfg)
{
    const SvdResult s = svd(a.data());
    checked_rank(a, m, s);
    cfg.validate(m);
    const Vector& mu = cfg.weights.mu();

    Matrix x = initial_point(a, m, cfg, s);
    ThresholdResult thr = threshold_map(a, x, cfg.sparsity);
    double f = objective_from(thr, mu);
    if (f == 0.0 && cfg.sparsity.gamma().minCoeff() < gamma_max(a)) {
        x = positive_start(a, x, cfg.sparsity);
        thr = threshold_map(a, x, cfg.sparsity);
        f = objective_from(thr, mu);
    }

    std::vector<double> trace{f};
    int iterations = 0;
    bool converged = false;
    while (iterations < cfg.max_iterations) {
        const Matrix g = weighted_gradient(a, thr.t, mu);
        if (g.cwiseAbs().maxCoeff() == 0.0) {
            // F vanishes on the whole manifold: every group stays thresholded
            converged = true;
            break;
        }
        Matrix next = polar(g).unitary;
        ThresholdResult next_thr = threshold_map(a, next, cfg.sparsity);
        const double next_f = objective_from(next_thr, mu);

        // columns with t_j = 0 do not enter F; their polar completion is arbitrary
        double step_sq = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            if (thr.t.col(j).squaredNorm() > 0.0 || next_thr.t.col(j).squaredNorm() > 0.0)
                step_sq += (next.col(j) - x.col(j)).squaredNorm();

        const bool stalled = next_f - f <= cfg.rel_tol * std::max(next_f, kObjectiveFloor);
        x = std::move(next);
        thr = std::move(next_thr);
        f = next_f;
        trace.push_back(f);
        ++iterations;
        if (stalled && std::sqrt(step_sq) <= cfg.rel_tol) {
            converged = true;
            break;
        }
    }

    Matrix z = loadings_from(thr.t);
    fix_column_signs(z, &x);
    Matrix y = a.data() * z;
    return GspcaResult{LoadingBlock(std::move(z), a.groups()), std::move(y), std::move(x),
                       std::move(trace), iterations, converged, {}};
}

GspcaResult deflation_solve(const GroupedMatrix& a, Eigen::Index m, const SolverConfig& cfg)
{
    const SvdResult s = svd(a.data());
    checked_rank(a, m, s);
    cfg.validate(m);
    if (cfg.init == InitKind::Provided)
        require_stiefel(*cfg.x0, a.rows(), m, "initial point");

    const Eigen::Index p = a.cols();
    Matrix deflated = a.data();
    Matrix z = Matrix::Zero(p, m);
    Matrix x = Matrix::Zero(a.rows(), m);
    GspcaResult out{LoadingBlock(Matrix::Zero(p, m), a.groups()), {}, {}, {}, 0, true, {}};

    double running = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        SolverConfig step{Weights(Vector::Constant(1, cfg.weights.mu()(j))),
                          SparsityParams(Vector::Constant(1, cfg.sparsity.gamma()(j))),
                          cfg.max_iterations,
                          cfg.rel_tol,
                          cfg.init,
                          std::nullopt,
                          cfg.seed + static_cast<std::uint64_t>(j)};
        if (cfg.init == InitKind::Provided)
            step.x0 = cfg.x0->col(j);

        const GspcaResult r = block_solve(GroupedMatrix(deflated, a.groups()), 1, step);
        z.col(j) = r.z.z().col(0);
        x.col(j) = r.x.col(0);
        out.iterations += r.iterations;
        out.converged = out.converged && r.converged;
        running += r.objective_trace.back();
        out.objective_trace.push_back(running);
        out.step_traces.push_back(r.objective_trace);

        // a zero loading projects nothing; A_{j+1} = A_j
        if (z.col(j).squaredNorm() > 0.0)
            deflated -= (deflated * z.col(j)) * z.col(j).transpose();
    }

    out.y = a.data() * z;
    out.z = LoadingBlock(std::move(z), a.groups());
    out.x = std::move(x);
    return out;
}

GspcaResult pca_baseline(const GroupedMatrix& a, Eigen::Index m)
{
    const SvdResult s = svd(a.data());
    checked_rank(a, m, s);
    Matrix z = s.right_vectors.leftCols(m);
    Matrix x = s.left_vectors.leftCols(m);
    fix_column_signs(z, &x);
    Matrix y = x * s.singular_values.head(m).asDiagonal();
    const double variance = s.singular_values.head(m).squaredNorm();
    return GspcaResult{LoadingBlock(std::move(z), a.groups()), std::move(y), std::move(x),
                       {variance}, 0, true, {}};
}

void fix_column_signs(Matrix& z, Matrix* companion)
{
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        Eigen::Index idx = 0;
        const double largest = z.col(j).cwiseAbs().maxCoeff(&idx);
        if (largest > 0.0 && z(idx, j) < 0.0) {
            z.col(j) *= -1.0;
            if (companion)
                companion->col(j) *= -1.0;
        }
    }
}

Matrix random_orthonormal(Eigen::Index n, Eigen::Index m, std::uint64_t seed)
{
    if (m < 1 || n < m)
        throw InvalidInput("random_orthonormal: need n >= m >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix g(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            g(i, j) = normal(rng);
    return thin_q(g);
}

} // namespace gspca
