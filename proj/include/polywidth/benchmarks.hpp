#pragma once

#include <cstdint>
#include <utility>

#include "polywidth/decoder.hpp"
#include "polywidth/snapshots.hpp"

namespace polywidth {

/// Uniform cell-centered grid on [0, L]; the weight h = L / cells makes
/// ||.||_W^2 = h * sum(.)^2 a discrete L2 norm.
struct GridSpec {
    double length = 1.0;
    Index cells = 512;

    double spacing() const { return length / static_cast<double>(cells); }
    double center(Index i) const { return (static_cast<double>(i) + 0.5) * spacing(); }
    void validate() const;
};

/// indicator{x <= mu} on the grid.
Vector advection_profile(const GridSpec &grid, double mu);

/// indicator{mu <= x <= mu + width} on the grid.
Vector pulse_profile(const GridSpec &grid, double mu, double width);

/// sum_{k=1}^{min(cells,40)} e^{-a k} sin(k pi x / L) mu^k on the grid.
Vector smooth_profile(const GridSpec &grid, double mu, double rate);

/// Shifted steps with mu_j = j L / (K+1), j = 1..K.
SnapshotSet advection_snapshots(const GridSpec &grid, Index params);

/// Pulses of width L/8 with mu_j = j (L - L/8) / (K+1), j = 1..K.
SnapshotSet wave_snapshots(const GridSpec &grid, Index params);

/// Smooth family with mu_j = j / (K-1), j = 0..K-1.
SnapshotSet smooth_snapshots(const GridSpec &grid, Index params, double rate);

struct QuadraticTruth {
    SnapshotSet snapshots;
    PolynomialDecoder<double> decoder;
    Matrix coordinates; ///< n x K generating coordinates
};

/// Snapshots lying exactly on a random quadratic manifold x -> B x + Q x^{(2)}:
/// B orthonormal, Q orthogonal to B with ||Q||_F = 0.5 ||B||_F, coordinates
/// uniform in [-1, 1]^n and drawn in antipodal pairs (K must be even).
QuadraticTruth quadratic_truth_snapshots(Index ambient_dim, Index n, Index params, std::uint64_t seed);

} // namespace polywidth
