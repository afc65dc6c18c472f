#include "polywidth/projection.hpp"

#include <random>

#include "polywidth/parallel.hpp"

namespace polywidth {

namespace {

// W-orthonormal basis of the column space of `columns`, in scaled coordinates.
Matrix scaled_range_basis(const Matrix &columns, const Weight &weight)
{
    if (columns.cols() == 0)
        return Matrix(columns.rows(), 0);
    const Matrix scaled = weight.scale(columns);
    Eigen::BDCSVD<Matrix> svd(scaled, Eigen::ComputeThinU);
    const Vector &sv = svd.singularValues();
    Index rank = 0;
    if (sv.size() > 0 && sv[0] > 0.0)
        while (rank < sv.size() && sv[rank] > 1e-12 * sv[0])
            ++rank;
    return svd.matrixU().leftCols(rank);
}

std::vector<double> residual_norms(const Matrix &scaled_targets, const Matrix &range)
{
    const Matrix residual = scaled_targets - range * (range.transpose() * scaled_targets);
    std::vector<double> out(static_cast<std::size_t>(residual.cols()));
    for (Index j = 0; j < residual.cols(); ++j)
        out[static_cast<std::size_t>(j)] = residual.col(j).norm();
    return out;
}

} // namespace

SetDistance set_distance(const PolynomialDecoder<double> &d, const SnapshotSet &s, const ProjectionStrategy &strategy)
{
    if (d.ambient_dim() != s.ambient_dim())
        throw ContractViolation("set_distance: decoder and snapshots live in different spaces");
    if (strategy.restarts < 0)
        throw ContractViolation("set_distance: restarts must be non-negative");

    const Index n = d.reduced_dim();
    const Index count = s.count();
    Matrix inits = Matrix::Zero(n, count);
    if (strategy.encoder_init) {
        // Same kernel as encoder_residuals, so each start is bit-identical to e(s).
        const Encoder encoder = linear_encoder(d, s.weight());
        for (Index j = 0; j < count; ++j)
            inits.col(j) = encoder(s.state(j));
    }
    const double rms = std::max(1e-3, std::sqrt(inits.squaredNorm() / static_cast<double>(inits.size())));
    const double spread = strategy.restart_scale * rms;

    SetDistance out;
    out.per_snapshot.resize(static_cast<std::size_t>(count));
    std::vector<char> failed(static_cast<std::size_t>(count), 0);

    parallel_for(static_cast<std::size_t>(count), strategy.threads, [&](std::size_t j) {
        const Index col = static_cast<Index>(j);
        const Vector target = s.state(col);
        const Vector init = inits.col(col);

        ProjectionResult<double> best;
        try {
            best = nonlinear_project(d, target, init, s.weight(), strategy.lm);
        } catch (const NumericalFailure &) {
            // Keep the start: its residual is still an upper estimate.
            best.coordinates = init;
            best.residual = best.init_residual = s.weight().norm(target - evaluate(d, init));
            failed[j] = 1;
        }

        // One stream per snapshot, so adding restarts only appends candidates.
        const auto seed = strategy.seed;
        const auto index = static_cast<std::uint64_t>(j);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int r = 0; r < strategy.restarts; ++r) {
            Vector start(n);
            for (Index i = 0; i < n; ++i)
                start[i] = init[i] + spread * gauss(rng);
            try {
                auto candidate = nonlinear_project(d, target, start, s.weight(), strategy.lm);
                if (candidate.residual < best.residual) {
                    candidate.init_residual = best.init_residual;
                    best = std::move(candidate);
                }
            } catch (const NumericalFailure &) {
                // A failed restart contributes nothing.
            }
        }
        out.per_snapshot[j] = std::move(best);
    });

    out.failed.assign(failed.begin(), failed.end());
    for (const auto &r : out.per_snapshot)
        out.value = std::max(out.value, r.residual);
    return out;
}

Encoder linear_encoder(const PolynomialDecoder<double> &d, const Weight &weight)
{
    Matrix projector = d.mapping_matrix(1).transpose();
    Vector shift = d.constant_term();
    return [projector = std::move(projector), shift = std::move(shift), weight](const Vector &s) -> Vector {
        return projector * weight.apply(s - shift);
    };
}

std::vector<double> encoder_residuals(const PolynomialDecoder<double> &d, const SnapshotSet &s, const Encoder &encoder)
{
    const Encoder enc = encoder ? encoder : linear_encoder(d, s.weight());
    std::vector<double> out(static_cast<std::size_t>(s.count()));
    for (Index j = 0; j < s.count(); ++j) {
        const Vector target = s.state(j);
        const Vector code = enc(target);
        if (code.size() != d.reduced_dim())
            throw ContractViolation("encoder_residuals: encoder output has the wrong length");
        out[static_cast<std::size_t>(j)] = s.weight().norm(target - evaluate(d, code));
    }
    return out;
}

double encoder_distortion(const PolynomialDecoder<double> &d, const SnapshotSet &s, const Encoder &encoder)
{
    double worst = 0;
    for (double r : encoder_residuals(d, s, encoder))
        worst = std::max(worst, r);
    return worst;
}

std::vector<double> span_distances(const Matrix &columns, const SnapshotSet &s)
{
    if (columns.rows() != s.ambient_dim())
        throw ContractViolation("span_distances: dimension mismatch");
    return residual_norms(s.scaled_states(), scaled_range_basis(columns, s.weight()));
}

double span_distance(const Matrix &columns, const SnapshotSet &s)
{
    double worst = 0;
    for (double r : span_distances(columns, s))
        worst = std::max(worst, r);
    return worst;
}

std::vector<double> affine_distances(const Matrix &columns, const Vector &shift, const SnapshotSet &s)
{
    if (columns.rows() != s.ambient_dim() || shift.size() != s.ambient_dim())
        throw ContractViolation("affine_distances: dimension mismatch");
    const Matrix targets = s.weight().scale(s.states().colwise() - shift);
    return residual_norms(targets, scaled_range_basis(columns, s.weight()));
}

} // namespace polywidth
