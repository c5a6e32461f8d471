#pragma once

#include "gspca/linalg.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace gspca {

/// Partition of |p| scalar variables into contiguous group variables.
///
/// Group indices are 0-based. Offsets are cumulative, so group i occupies
/// columns [offset(i), offset(i) + size(i)).
class GroupStructure {
public:
    explicit GroupStructure(std::vector<Eigen::Index> sizes);

    /// Every variable in its own group (scalar-variable mode).
    static GroupStructure singletons(Eigen::Index total);
    /// One group holding all variables.
    static GroupStructure single(Eigen::Index total);

    Eigen::Index count() const { return static_cast<Eigen::Index>(sizes_.size()); }
    Eigen::Index total() const { return offsets_.back(); }
    Eigen::Index size(Eigen::Index i) const { return sizes_.at(static_cast<std::size_t>(i)); }
    Eigen::Index offset(Eigen::Index i) const { return offsets_.at(static_cast<std::size_t>(i)); }
    const std::vector<Eigen::Index>& sizes() const { return sizes_; }

    bool operator==(const GroupStructure&) const = default;

private:
    std::vector<Eigen::Index> sizes_;
    std::vector<Eigen::Index> offsets_;   // count() + 1 entries
};

/// Data matrix A = [a_1 ... a_p] with its column partition.
class GroupedMatrix {
public:
    GroupedMatrix(Matrix data, GroupStructure groups);

    /// Reorders columns so that `column_order[k]` becomes column k before
    /// attaching the groups. Use this when group members are scattered.
    static GroupedMatrix with_column_order(const Matrix& data, GroupStructure groups,
                                           const std::vector<Eigen::Index>& column_order);

    const Matrix& data() const { return data_; }
    const GroupStructure& groups() const { return groups_; }
    Eigen::Index rows() const { return data_.rows(); }
    Eigen::Index cols() const { return data_.cols(); }

    /// The n x p_i block a_i. Throws InvalidInput when i is out of range.
    Matrix group_slice(Eigen::Index i) const;

private:
    Matrix data_;
    GroupStructure groups_;
};

/// Loadings Z (|p| x m) with the group structure of their rows.
class LoadingBlock {
public:
    LoadingBlock(Matrix z, GroupStructure groups);

    const Matrix& z() const { return z_; }
    const GroupStructure& groups() const { return groups_; }
    Eigen::Index components() const { return z_.cols(); }

    /// z_{i,j}: the part of loading j belonging to group i.
    auto block(Eigen::Index group, Eigen::Index component) const
    {
        return z_.col(component).segment(groups_.offset(group), groups_.size(group));
    }

private:
    Matrix z_;
    GroupStructure groups_;
};

/// Sum over groups of the Euclidean norms of the group sub-vectors.
double group_l1_norm(const Vector& z, const GroupStructure& groups);

/// Group x component flags: (i, j) is true when ||z_{i,j}|| <= tol.
using SparsityPattern = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

SparsityPattern sparsity_pattern(const LoadingBlock& z, double tol = 0.0);

/// Subtracts the column means in place.
void center_columns(Matrix& a);

} // namespace gspca
