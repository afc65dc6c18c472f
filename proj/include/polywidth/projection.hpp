#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "polywidth/decoder.hpp"
#include "polywidth/snapshots.hpp"
#include "polywidth/weight.hpp"

namespace polywidth {

template <typename Scalar>
struct ProjectionResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coordinates;
    Scalar residual = 0;      ///< weighted norm of s - dec(coordinates)
    Scalar init_residual = 0; ///< same at the starting point
    int iterations = 0;
    bool converged = false;
};

/// Levenberg-Marquardt settings. Damping starts at initial_damping * trace(J^T J) / n.
struct LMOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-10;
    double initial_damping = 1e-3;
    double damping_decrease = 0.5;
    double damping_increase = 2.0;
};

/// Weighted distance of s to the affine space shift + span(basis).
/// The basis must be W-orthonormal to within 1e-8.
template <typename DerivedB, typename DerivedS, typename DerivedX>
typename DerivedB::Scalar affine_distance(const Eigen::MatrixBase<DerivedB> &basis,
                                          const Eigen::MatrixBase<DerivedS> &shift,
                                          const Eigen::MatrixBase<DerivedX> &s,
                                          const InnerProductWeight<typename DerivedB::Scalar> &weight)
{
    using Scalar = typename DerivedB::Scalar;
    if (basis.rows() != s.size() || shift.size() != s.size())
        throw ContractViolation("affine_distance: dimension mismatch");
    if (weight.gram_deviation(basis) > Scalar(1e-8))
        throw ContractViolation("affine_distance: basis is not orthonormal in the weighted inner product");
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> centered = s - shift;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeff = basis.transpose() * weight.apply(centered);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residual = centered - basis * coeff;
    return weight.norm(residual);
}

/// Minimizes 1/2 ||s - dec(x)||_W^2 over x, starting at x0.
///
/// Returns the best iterate seen. `converged` means the relative gradient
/// ||J^T r|| / (||J||_F ||r||) dropped below the tolerance. Throws
/// NumericalFailure if the residual or Jacobian stops being finite.
template <typename Scalar, typename DerivedS, typename DerivedX>
ProjectionResult<Scalar> nonlinear_project(const PolynomialDecoder<Scalar> &d, const Eigen::MatrixBase<DerivedS> &s,
                                           const Eigen::MatrixBase<DerivedX> &x0,
                                           const InnerProductWeight<Scalar> &weight, const LMOptions &opts = {})
{
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Index n = d.reduced_dim();
    if (s.size() != d.ambient_dim() || x0.size() != n)
        throw ContractViolation("nonlinear_project: dimension mismatch");

    const auto to_vector = [](const Vec &x) { return std::vector<double>(x.data(), x.data() + x.size()); };

    Vec x = x0;
    Vec r = weight.scale(s - evaluate(d, x));
    if (!r.allFinite())
        throw NumericalFailure("nonlinear_project: residual is not finite at the initial guess", to_vector(x));

    ProjectionResult<Scalar> result;
    result.init_residual = r.norm();
    Scalar cost = r.squaredNorm();

    Mat jac = weight.scale(decoder_jacobian(d, x));
    if (!jac.allFinite())
        throw NumericalFailure("nonlinear_project: Jacobian is not finite", to_vector(x));
    Mat normal = jac.transpose() * jac;
    Vec gradient = jac.transpose() * r;

    const auto relative_gradient = [&]() {
        const Scalar scale = jac.norm() * std::sqrt(cost);
        if (!(scale > std::numeric_limits<Scalar>::min()))
            return Scalar(0);
        return gradient.norm() / scale;
    };

    Scalar trace = normal.trace();
    Scalar damping = Scalar(opts.initial_damping) * (trace > Scalar(0) ? trace / Scalar(n) : Scalar(1));
    const Scalar damping_ceiling = Scalar(1e32) * (trace > Scalar(0) ? trace : Scalar(1));

    int iterations = 0;
    bool converged = relative_gradient() <= Scalar(opts.gradient_tolerance);
    while (!converged && iterations < opts.max_iterations) {
        ++iterations;
        Mat system = normal;
        system.diagonal().array() += damping;
        const Vec step = system.ldlt().solve(gradient);
        const Vec trial = x + step;
        const Vec trial_r = weight.scale(s - evaluate(d, trial));
        if (!trial_r.allFinite() || !step.allFinite())
            throw NumericalFailure("nonlinear_project: residual became non-finite", to_vector(x));
        const Scalar trial_cost = trial_r.squaredNorm();

        if (trial_cost < cost) {
            x = trial;
            r = trial_r;
            cost = trial_cost;
            jac = weight.scale(decoder_jacobian(d, x));
            if (!jac.allFinite())
                throw NumericalFailure("nonlinear_project: Jacobian is not finite", to_vector(x));
            normal.noalias() = jac.transpose() * jac;
            gradient.noalias() = jac.transpose() * r;
            damping *= Scalar(opts.damping_decrease);
            converged = relative_gradient() <= Scalar(opts.gradient_tolerance);
        } else {
            damping *= Scalar(opts.damping_increase);
            // No descent is representable any more.
            if (damping > damping_ceiling || step.norm() <= std::numeric_limits<Scalar>::epsilon() * (x.norm() + Scalar(1)))
                break;
        }
    }

    result.coordinates = x;
    result.residual = std::sqrt(cost);
    result.iterations = iterations;
    result.converged = converged;
    return result;
}

/// How set_distance starts each per-snapshot minimization.
struct ProjectionStrategy {
    /// Start at the linear encoder T_1^T W (s - T_0); otherwise at zero.
    bool encoder_init = true;
    /// Extra starts drawn from N(init, (scale * rms)^2), where rms is the root
    /// mean square of the initial coordinates over the whole set (floored at 1e-3).
    int restarts = 4;
    double restart_scale = 0.5;
    std::uint64_t seed = 0;
    LMOptions lm;
    /// Worker threads for the per-snapshot map; 0 picks the hardware concurrency.
    unsigned threads = 1;
};

struct SetDistance {
    double value = 0; ///< max over snapshots of the per-snapshot residual
    std::vector<ProjectionResult<double>> per_snapshot;
    std::vector<bool> failed; ///< snapshot fell back to its initial residual
};

SetDistance set_distance(const PolynomialDecoder<double> &d, const SnapshotSet &s, const ProjectionStrategy &strategy = {});

using Encoder = std::function<Vector(const Vector &)>;

/// e(s) = T_1^T W (s - T_0)
Encoder linear_encoder(const PolynomialDecoder<double> &d, const Weight &weight);

/// Per-snapshot ||s - dec(e(s))||_W.
std::vector<double> encoder_residuals(const PolynomialDecoder<double> &d, const SnapshotSet &s, const Encoder &encoder);

/// sup_s ||s - dec(e(s))||_W, with the linear encoder when `encoder` is empty.
double encoder_distortion(const PolynomialDecoder<double> &d, const SnapshotSet &s, const Encoder &encoder = {});

/// Per-snapshot weighted distance to the column space of `columns`.
/// Rank is decided at 1e-12 * sigma_max of W^{1/2} columns.
std::vector<double> span_distances(const Matrix &columns, const SnapshotSet &s);

/// max_j of span_distances.
double span_distance(const Matrix &columns, const SnapshotSet &s);

/// Per-snapshot weighted distance to the affine space shift + span(columns);
/// the columns need not be orthonormal.
std::vector<double> affine_distances(const Matrix &columns, const Vector &shift, const SnapshotSet &s);

} // namespace polywidth
