#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "polywidth/errors.hpp"
#include "polywidth/kron.hpp"

namespace polywidth {

template <typename Scalar>
struct LinearFactor {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    /// [T_p, ..., T_1, T_0], one column per lifted coordinate.
    Matrix matrix;
    LiftLayout layout;
};

/// Polynomial map x -> sum_k T_k x^{(k)} from R^n into R^N.
///
/// T_k has shape N x binom(n+k-1, k); T_0 is the constant term as an N x 1 matrix.
/// The mapping matrices are stored as one lifted matrix in layout order, so
/// the degree-k block is a column range of `stacked()`.
template <typename Scalar>
class PolynomialDecoder {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    PolynomialDecoder() = default;

    /// `mapping_matrices[k]` is T_k, for k = 0..p.
    PolynomialDecoder(Index n, Index p, Index ambient_dim, const std::vector<Matrix> &mapping_matrices)
        : layout_(n, p), ambient_(ambient_dim)
    {
        if (ambient_dim < 1)
            throw ContractViolation("PolynomialDecoder: ambient dimension must be positive");
        if (static_cast<Index>(mapping_matrices.size()) != p + 1)
            throw ContractViolation("PolynomialDecoder: expected p+1 mapping matrices");
        stacked_.resize(ambient_dim, layout_.total());
        for (Index k = 0; k <= p; ++k) {
            const Matrix &t = mapping_matrices[static_cast<std::size_t>(k)];
            if (t.rows() != ambient_dim || t.cols() != layout_.block_size(k))
                throw ContractViolation("PolynomialDecoder: mapping matrix T_" + std::to_string(k) +
                                        " has the wrong shape");
            stacked_.middleCols(layout_.block_offset(k), layout_.block_size(k)) = t;
        }
        check_finite();
    }

    /// All-zero decoder of the given shape.
    static PolynomialDecoder zero(Index n, Index p, Index ambient_dim)
    {
        PolynomialDecoder d;
        d.layout_ = LiftLayout(n, p);
        d.ambient_ = ambient_dim;
        d.stacked_ = Matrix::Zero(ambient_dim, d.layout_.total());
        return d;
    }

    /// Build directly from [T_p, ..., T_0].
    static PolynomialDecoder from_stacked(Index n, Index p, Matrix stacked)
    {
        PolynomialDecoder d;
        d.layout_ = LiftLayout(n, p);
        if (stacked.cols() != d.layout_.total() || stacked.rows() < 1)
            throw ContractViolation("PolynomialDecoder: stacked matrix has the wrong shape");
        d.ambient_ = stacked.rows();
        d.stacked_ = std::move(stacked);
        d.check_finite();
        return d;
    }

    Index reduced_dim() const { return layout_.variables(); }
    Index degree() const { return layout_.degree(); }
    Index ambient_dim() const { return ambient_; }
    const LiftLayout &layout() const { return layout_; }

    /// T_k as a column block.
    auto mapping_matrix(Index k) const
    {
        return stacked_.middleCols(layout_.block_offset(k), layout_.block_size(k));
    }

    Vector constant_term() const { return stacked_.col(layout_.block_offset(0)); }

    const Matrix &stacked() const { return stacked_; }

private:
    void check_finite() const
    {
        if (!stacked_.allFinite())
            throw ContractViolation("PolynomialDecoder: mapping matrices must be finite");
    }

    LiftLayout layout_;
    Index ambient_ = 0;
    Matrix stacked_;
};

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate(const PolynomialDecoder<Scalar> &d,
                                                  const Eigen::MatrixBase<Derived> &x)
{
    if (x.size() != d.reduced_dim())
        throw ContractViolation("evaluate: coordinate length does not match the decoder");
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lifted = lift(x, d.layout());
    return d.stacked() * lifted;
}

template <typename Scalar>
LinearFactor<Scalar> assemble_linear_factor(const PolynomialDecoder<Scalar> &d)
{
    return {d.stacked(), d.layout()};
}

/// N x n Jacobian of `evaluate` at x.
///
/// Accumulates T_k columns against the sparse lift Jacobian instead of
/// forming the dense product with A.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> decoder_jacobian(const PolynomialDecoder<Scalar> &d,
                                                                       const Eigen::MatrixBase<Derived> &x)
{
    if (x.size() != d.reduced_dim())
        throw ContractViolation("decoder_jacobian: coordinate length does not match the decoder");
    const LiftLayout &layout = d.layout();
    const Index n = d.reduced_dim();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> jac =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(d.ambient_dim(), n);

    for (Index k = layout.degree(); k >= 1; --k) {
        const MultiIndexTable &table = layout.table(k);
        const Index offset = layout.block_offset(k);
        for (Index row = 0; row < table.size(); ++row) {
            for (Index slot = 0; slot < k; ++slot) {
                const Index var = table(row, slot);
                if (slot > 0 && table(row, slot - 1) == var)
                    continue;
                Index multiplicity = 0;
                Scalar rest(1);
                bool dropped = false;
                for (Index other = 0; other < k; ++other) {
                    const Index v = table(row, other);
                    if (v == var) {
                        ++multiplicity;
                        if (!dropped) {
                            dropped = true;
                            continue;
                        }
                    }
                    rest *= x[v];
                }
                const Scalar coeff = Scalar(multiplicity) * rest;
                if (coeff != Scalar(0))
                    jac.col(var).noalias() += coeff * d.stacked().col(offset + row);
            }
        }
    }
    return jac;
}

/// Affine decoder basis * x + shift, padded with zero blocks up to degree p_target.
template <typename DerivedB, typename DerivedS>
PolynomialDecoder<typename DerivedB::Scalar> from_linear(const Eigen::MatrixBase<DerivedB> &basis,
                                                         const Eigen::MatrixBase<DerivedS> &shift, Index p_target)
{
    using Scalar = typename DerivedB::Scalar;
    if (p_target < 1)
        throw ContractViolation("from_linear: target degree must be at least 1");
    if (shift.size() != basis.rows())
        throw ContractViolation("from_linear: shift length does not match basis rows");
    auto d = PolynomialDecoder<Scalar>::zero(basis.cols(), p_target, basis.rows());
    typename PolynomialDecoder<Scalar>::Matrix stacked = d.stacked();
    const LiftLayout &layout = d.layout();
    stacked.middleCols(layout.block_offset(1), layout.block_size(1)) = basis;
    stacked.col(layout.block_offset(0)) = shift;
    return PolynomialDecoder<Scalar>::from_stacked(basis.cols(), p_target, std::move(stacked));
}

} // namespace polywidth
