#pragma once

#include <optional>

#include "polywidth/decoder.hpp"
#include "polywidth/snapshots.hpp"

namespace polywidth {

/// Weighted-orthonormal basis with the singular values it came from.
struct LinearBasis {
    Matrix basis;                 ///< N x r, B^T W B = I
    Vector singular_values;       ///< all singular values, non-increasing (empty for greedy)
    Vector shift;                 ///< subtracted mean, zero when not centered
    bool degenerate_rank = false; ///< fewer than the requested columns were available
};

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-12;

/// Leading left singular vectors of W^{1/2}(S - shift), mapped back by W^{-1/2}.
LinearBasis pod_basis(const SnapshotSet &s, Index n, bool center = false);

/// Strong greedy: repeatedly add the snapshot farthest from the current span.
/// Ties go to the lowest column index.
LinearBasis greedy_linear_basis(const SnapshotSet &s, Index n);

Index numerical_rank(const SnapshotSet &s, bool center = false);

struct FitConfig {
    Index n = 1;
    Index p = 2;
    /// Tikhonov weight on the higher-degree blocks. Unset means
    /// 1e-8 times the largest squared singular value of the regressor.
    std::optional<double> ridge;
    bool center = true;
};

/// Polynomial manifold through the snapshots: T_0 = mean (or 0), T_1 = POD basis,
/// and [T_p .. T_2] from ridge regression of the linear residuals on the
/// lifted linear-encoder coordinates.
PolynomialDecoder<double> fit_polynomial_manifold(const SnapshotSet &s, const FitConfig &cfg);

/// Linear encoder coordinates T_1^T W (s_j - T_0), one column per snapshot.
Matrix linear_encoder_coordinates(const PolynomialDecoder<double> &d, const SnapshotSet &s);

} // namespace polywidth
