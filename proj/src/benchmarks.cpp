#include "polywidth/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "polywidth/kron.hpp"

namespace polywidth {

void GridSpec::validate() const
{
    if (cells < 2)
        throw ContractViolation("GridSpec: need at least 2 cells");
    if (!(length > 0.0) || !std::isfinite(length))
        throw ContractViolation("GridSpec: domain length must be positive");
}

Vector advection_profile(const GridSpec &grid, double mu)
{
    grid.validate();
    Vector out(grid.cells);
    for (Index i = 0; i < grid.cells; ++i)
        out[i] = grid.center(i) <= mu ? 1.0 : 0.0;
    return out;
}

Vector pulse_profile(const GridSpec &grid, double mu, double width)
{
    grid.validate();
    Vector out(grid.cells);
    for (Index i = 0; i < grid.cells; ++i) {
        const double x = grid.center(i);
        out[i] = (mu <= x && x <= mu + width) ? 1.0 : 0.0;
    }
    return out;
}

Vector smooth_profile(const GridSpec &grid, double mu, double rate)
{
    grid.validate();
    const Index modes = std::min<Index>(grid.cells, 40);
    Vector out = Vector::Zero(grid.cells);
    double power = 1.0;
    for (Index k = 1; k <= modes; ++k) {
        power *= mu;
        const double coeff = std::exp(-rate * static_cast<double>(k)) * power;
        for (Index i = 0; i < grid.cells; ++i)
            out[i] += coeff * std::sin(static_cast<double>(k) * std::numbers::pi * grid.center(i) / grid.length);
    }
    return out;
}

namespace {

void require_params(Index params)
{
    if (params < 2)
        throw ContractViolation("benchmark needs at least 2 parameter values");
}

} // namespace

SnapshotSet advection_snapshots(const GridSpec &grid, Index params)
{
    grid.validate();
    require_params(params);
    Matrix states(grid.cells, params);
    std::vector<double> labels;
    for (Index j = 0; j < params; ++j) {
        const double mu = static_cast<double>(j + 1) * grid.length / static_cast<double>(params + 1);
        states.col(j) = advection_profile(grid, mu);
        labels.push_back(mu);
    }
    return {std::move(states), Weight::uniform(grid.spacing()), std::move(labels)};
}

SnapshotSet wave_snapshots(const GridSpec &grid, Index params)
{
    grid.validate();
    require_params(params);
    const double width = grid.length / 8.0;
    Matrix states(grid.cells, params);
    std::vector<double> labels;
    for (Index j = 0; j < params; ++j) {
        const double mu = static_cast<double>(j + 1) * (grid.length - width) / static_cast<double>(params + 1);
        states.col(j) = pulse_profile(grid, mu, width);
        labels.push_back(mu);
    }
    return {std::move(states), Weight::uniform(grid.spacing()), std::move(labels)};
}

SnapshotSet smooth_snapshots(const GridSpec &grid, Index params, double rate)
{
    grid.validate();
    require_params(params);
    if (!(rate > 0.0))
        throw ContractViolation("smooth_snapshots: rate must be positive");
    Matrix states(grid.cells, params);
    std::vector<double> labels;
    for (Index j = 0; j < params; ++j) {
        const double mu = static_cast<double>(j) / static_cast<double>(params - 1);
        states.col(j) = smooth_profile(grid, mu, rate);
        labels.push_back(mu);
    }
    return {std::move(states), Weight::uniform(grid.spacing()), std::move(labels)};
}

QuadraticTruth quadratic_truth_snapshots(Index ambient_dim, Index n, Index params, std::uint64_t seed)
{
    if (n < 1)
        throw ContractViolation("quadratic_truth_snapshots: n must be at least 1");
    const auto lifted = static_cast<Index>(total_dimension(static_cast<std::uint64_t>(n), 2));
    const auto quad = static_cast<Index>(multi_index_count(static_cast<std::uint64_t>(n), 2));
    if (ambient_dim < lifted)
        throw ContractViolation("quadratic_truth_snapshots: need N >= total_dimension(n, 2)");
    if (params < 2 * quad || params % 2 != 0)
        throw ContractViolation("quadratic_truth_snapshots: need an even K >= 2 * m(n, 2)");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    Matrix raw(ambient_dim, n + quad);
    for (Index i = 0; i < raw.size(); ++i)
        raw.data()[i] = gauss(rng);
    // One orthonormal frame: the first n columns span B, Q is drawn in the complement.
    Eigen::HouseholderQR<Matrix> qr(raw);
    const Matrix frame = qr.householderQ() * Matrix::Identity(ambient_dim, n + quad);
    const Matrix linear = frame.leftCols(n);

    Matrix mixing(quad, quad);
    for (Index i = 0; i < mixing.size(); ++i)
        mixing.data()[i] = gauss(rng);
    Matrix quadratic = frame.rightCols(quad) * mixing;
    quadratic *= 0.5 * linear.norm() / quadratic.norm();

    Matrix coords(n, params);
    for (Index j = 0; j < params; j += 2) {
        for (Index i = 0; i < n; ++i) {
            const double v = uniform(rng);
            coords(i, j) = v;
            coords(i, j + 1) = -v;
        }
    }

    std::vector<Matrix> blocks{Matrix::Zero(ambient_dim, 1), linear, quadratic};
    PolynomialDecoder<double> decoder(n, 2, ambient_dim, blocks);
    Matrix states(ambient_dim, params);
    for (Index j = 0; j < params; ++j)
        states.col(j) = evaluate(decoder, coords.col(j));

    return {SnapshotSet(std::move(states), Weight::uniform(1.0)), std::move(decoder), std::move(coords)};
}

} // namespace polywidth
