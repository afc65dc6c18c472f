#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polywidth/kron.hpp"
#include "polywidth/weight.hpp"

namespace polywidth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Weight = InnerProductWeight<double>;

/// K states in R^N stored as columns, with the inner-product weight of the
/// discretization and optional parameter labels per column.
class SnapshotSet {
public:
    SnapshotSet() = default;
    SnapshotSet(Matrix states, Weight weight, std::vector<double> labels = {});

    Index ambient_dim() const { return states_.rows(); }
    Index count() const { return states_.cols(); }

    const Matrix &states() const { return states_; }
    auto state(Index j) const { return states_.col(j); }
    const Weight &weight() const { return weight_; }
    const std::vector<double> &labels() const { return labels_; }

    /// W^{1/2} S: columns live in plain Euclidean R^N with the same norms.
    Matrix scaled_states() const { return weight_.scale(states_); }

    double norm(Index j) const { return weight_.norm(states_.col(j)); }
    double max_norm() const;
    Vector mean() const { return states_.rowwise().mean(); }

private:
    Matrix states_;
    Weight weight_;
    std::vector<double> labels_;
};

inline constexpr std::uint32_t kSnapshotFormatVersion = 1;

/// Binary layout, little-endian:
///   "PWSS" | version u32 | N u64 | K u64 | weight-kind u8 (0 uniform, 1 diagonal)
///   | weight entries (1 for uniform, N for diagonal) as f64 | states column-major f64
void write_snapshots(std::ostream &out, const SnapshotSet &s);
SnapshotSet read_snapshots(std::istream &in);
void save_snapshots(const std::filesystem::path &path, const SnapshotSet &s);
SnapshotSet load_snapshots(const std::filesystem::path &path);

/// One snapshot per column; the header row holds the parameter labels.
SnapshotSet read_snapshots_csv(std::istream &in, const Weight &weight = Weight::uniform(1.0));
SnapshotSet load_snapshots_csv(const std::filesystem::path &path, const Weight &weight = Weight::uniform(1.0));

} // namespace polywidth
