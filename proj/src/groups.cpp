#include "gspca/groups.hpp"

#include "gspca/error.hpp"

#include <algorithm>
#include <string>

namespace gspca {

GroupStructure::GroupStructure(std::vector<Eigen::Index> sizes)
    : sizes_(std::move(sizes))
{
    if (sizes_.empty())
        throw InvalidInput("group structure must contain at least one group");
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] < 1)
            throw InvalidInput("group " + std::to_string(i) + " has non-positive size");
        offsets_.push_back(offsets_.back() + sizes_[i]);
    }
}

GroupStructure GroupStructure::singletons(Eigen::Index total)
{
    return GroupStructure(std::vector<Eigen::Index>(static_cast<std::size_t>(total), 1));
}

GroupStructure GroupStructure::single(Eigen::Index total)
{
    return GroupStructure({total});
}

GroupedMatrix::GroupedMatrix(Matrix data, GroupStructure groups)
    : data_(std::move(data)), groups_(std::move(groups))
{
    require_finite(data_, "grouped matrix");
    if (data_.cols() != groups_.total())
        throw InvalidInput("data matrix has " + std::to_string(data_.cols()) +
                           " columns but the groups cover " + std::to_string(groups_.total()));
}

GroupedMatrix GroupedMatrix::with_column_order(const Matrix& data, GroupStructure groups,
                                               const std::vector<Eigen::Index>& column_order)
{
    const auto p = static_cast<std::size_t>(data.cols());
    if (column_order.size() != p)
        throw InvalidInput("column order length differs from the column count");
    std::vector<bool> seen(p, false);
    Matrix reordered(data.rows(), data.cols());
    for (std::size_t k = 0; k < p; ++k) {
        const Eigen::Index c = column_order[k];
        if (c < 0 || static_cast<std::size_t>(c) >= p || seen[static_cast<std::size_t>(c)])
            throw InvalidInput("column order is not a permutation");
        seen[static_cast<std::size_t>(c)] = true;
        reordered.col(static_cast<Eigen::Index>(k)) = data.col(c);
    }
    return GroupedMatrix(std::move(reordered), std::move(groups));
}

Matrix GroupedMatrix::group_slice(Eigen::Index i) const
{
    if (i < 0 || i >= groups_.count())
        throw InvalidInput("group index " + std::to_string(i) + " out of range");
    return data_.middleCols(groups_.offset(i), groups_.size(i));
}

LoadingBlock::LoadingBlock(Matrix z, GroupStructure groups)
    : z_(std::move(z)), groups_(std::move(groups))
{
    require_finite(z_, "loading block");
    if (z_.rows() != groups_.total())
        throw InvalidInput("loading block has " + std::to_string(z_.rows()) +
                           " rows but the groups cover " + std::to_string(groups_.total()));
    if (z_.cols() < 1)
        throw InvalidInput("loading block needs at least one column");
}

double group_l1_norm(const Vector& z, const GroupStructure& groups)
{
    if (z.size() != groups.total())
        throw InvalidInput("group_l1_norm: vector length differs from the group total");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < groups.count(); ++i)
        sum += z.segment(groups.offset(i), groups.size(i)).norm();
    return sum;
}

SparsityPattern sparsity_pattern(const LoadingBlock& z, double tol)
{
    const auto& g = z.groups();
    SparsityPattern pattern(g.count(), z.components());
    for (Eigen::Index j = 0; j < z.components(); ++j)
        for (Eigen::Index i = 0; i < g.count(); ++i)
            pattern(i, j) = z.block(i, j).norm() <= tol;
    return pattern;
}

void center_columns(Matrix& a)
{
    if (a.rows() == 0)
        return;
    a.rowwise() -= a.colwise().mean();
}

} // namespace gspca
