#include "polywidth/fitting.hpp"

#include <cmath>
#include <string>

namespace polywidth {

namespace {

Index rank_from_singular_values(const Vector &sv)
{
    if (sv.size() == 0 || !(sv[0] > 0.0))
        return 0;
    const double cutoff = kRankTolerance * sv[0];
    Index rank = 0;
    while (rank < sv.size() && sv[rank] > cutoff)
        ++rank;
    return rank;
}

Matrix centered_scaled(const SnapshotSet &s, const Vector &shift)
{
    return s.weight().scale(s.states().colwise() - shift);
}

} // namespace

LinearBasis pod_basis(const SnapshotSet &s, Index n, bool center)
{
    if (n < 0)
        throw ContractViolation("pod_basis: n must be non-negative");
    LinearBasis out;
    out.shift = center ? s.mean() : Vector::Zero(s.ambient_dim());
    const Matrix scaled = centered_scaled(s, out.shift);

    Eigen::BDCSVD<Matrix> svd(scaled, Eigen::ComputeThinU);
    out.singular_values = svd.singularValues();
    const Index rank = rank_from_singular_values(out.singular_values);
    const Index used = std::min(n, rank);
    out.degenerate_rank = used < n;
    out.basis = s.weight().unscale(svd.matrixU().leftCols(used));
    return out;
}

LinearBasis greedy_linear_basis(const SnapshotSet &s, Index n)
{
    if (n < 0)
        throw ContractViolation("greedy_linear_basis: n must be non-negative");
    LinearBasis out;
    out.shift = Vector::Zero(s.ambient_dim());

    Matrix residual = s.scaled_states();
    const double reference = residual.colwise().norm().maxCoeff();
    Matrix frame(s.ambient_dim(), 0);

    for (Index step = 0; step < n; ++step) {
        const Eigen::RowVectorXd norms = residual.colwise().norm();
        Index pick = 0;
        for (Index j = 1; j < norms.size(); ++j)
            if (norms[j] > norms[pick])
                pick = j;
        if (!(norms[pick] > kRankTolerance * reference))
            break;

        Vector q = residual.col(pick) / norms[pick];
        // Twice is enough for Gram-Schmidt.
        for (int pass = 0; pass < 2; ++pass)
            q -= frame * (frame.transpose() * q);
        q.normalize();

        frame.conservativeResize(Eigen::NoChange, frame.cols() + 1);
        frame.col(frame.cols() - 1) = q;
        residual -= q * (q.transpose() * residual);
    }

    out.degenerate_rank = frame.cols() < n;
    out.basis = s.weight().unscale(frame);
    return out;
}

Index numerical_rank(const SnapshotSet &s, bool center)
{
    const Vector shift = center ? s.mean() : Vector::Zero(s.ambient_dim());
    Eigen::BDCSVD<Matrix> svd(centered_scaled(s, shift));
    return rank_from_singular_values(svd.singularValues());
}

Matrix linear_encoder_coordinates(const PolynomialDecoder<double> &d, const SnapshotSet &s)
{
    if (d.ambient_dim() != s.ambient_dim())
        throw ContractViolation("linear_encoder_coordinates: dimension mismatch");
    const Matrix centered = s.states().colwise() - d.constant_term();
    return d.mapping_matrix(1).transpose() * s.weight().apply(centered);
}

PolynomialDecoder<double> fit_polynomial_manifold(const SnapshotSet &s, const FitConfig &cfg)
{
    if (cfg.n < 1 || cfg.p < 1)
        throw ContractViolation("fit_polynomial_manifold: need n >= 1 and p >= 1");
    if (cfg.ridge && !(*cfg.ridge >= 0.0))
        throw ContractViolation("fit_polynomial_manifold: ridge must be non-negative");

    const LinearBasis pod = pod_basis(s, cfg.n, cfg.center);
    if (pod.degenerate_rank)
        throw ContractViolation("fit_polynomial_manifold: n = " + std::to_string(cfg.n) +
                                " exceeds the numerical rank of the snapshots");

    const LiftLayout layout(cfg.n, cfg.p);
    Matrix stacked = Matrix::Zero(s.ambient_dim(), layout.total());
    stacked.middleCols(layout.block_offset(1), cfg.n) = pod.basis;
    stacked.col(layout.block_offset(0)) = pod.shift;
    if (cfg.p == 1)
        return PolynomialDecoder<double>::from_stacked(cfg.n, cfg.p, std::move(stacked));

    const Matrix centered = s.states().colwise() - pod.shift;
    const Matrix coords = pod.basis.transpose() * s.weight().apply(centered);
    const Matrix residual = centered - pod.basis * coords;

    // Higher-degree blocks sit in front of the linear and constant blocks.
    const Index higher = layout.block_offset(1);
    const Index count = s.count();
    Matrix regressor(count, higher);
    for (Index j = 0; j < count; ++j)
        regressor.row(j) = lift(coords.col(j), layout).head(higher).transpose();

    double ridge = 0.0;
    if (cfg.ridge) {
        ridge = *cfg.ridge;
    } else {
        Eigen::BDCSVD<Matrix> svd(regressor);
        const double top = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
        ridge = 1e-8 * top * top;
    }

    Matrix coefficients; // higher x N, transpose of [T_p .. T_2]
    if (ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(regressor);
        qr.setThreshold(kRankTolerance);
        if (qr.rank() < higher)
            throw IllPosedFit("fit_polynomial_manifold: regressor has rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(higher) + " unknowns; use ridge > 0");
        coefficients = qr.solve(Matrix(residual.transpose()));
    } else {
        Matrix augmented(count + higher, higher);
        augmented.topRows(count) = regressor;
        augmented.bottomRows(higher) = std::sqrt(ridge) * Matrix::Identity(higher, higher);
        Matrix rhs = Matrix::Zero(count + higher, s.ambient_dim());
        rhs.topRows(count) = residual.transpose();
        Eigen::HouseholderQR<Matrix> qr(augmented);
        coefficients = qr.solve(rhs);
    }

    stacked.leftCols(higher) = coefficients.transpose();
    return PolynomialDecoder<double>::from_stacked(cfg.n, cfg.p, std::move(stacked));
}

} // namespace polywidth
