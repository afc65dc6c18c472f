#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "polywidth/errors.hpp"

namespace polywidth {

/// Diagonal inner-product weight on R^N: <u, v>_W = sum_i w_i u_i v_i.
/// Either one positive value for every entry or a positive vector.
template <typename Scalar>
class InnerProductWeight {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    InnerProductWeight() = default;

    static InnerProductWeight uniform(Scalar value)
    {
        if (!(value > Scalar(0)) || !std::isfinite(static_cast<double>(value)))
            throw ContractViolation("inner-product weight must be positive and finite");
        InnerProductWeight w;
        w.uniform_ = true;
        w.value_ = value;
        w.sqrt_value_ = std::sqrt(value);
        return w;
    }

    static InnerProductWeight diagonal(Vector entries)
    {
        if (entries.size() == 0)
            throw ContractViolation("diagonal weight must not be empty");
        for (Eigen::Index i = 0; i < entries.size(); ++i) {
            if (!(entries[i] > Scalar(0)) || !std::isfinite(static_cast<double>(entries[i])))
                throw ContractViolation("diagonal weight entries must be positive and finite");
        }
        InnerProductWeight w;
        w.uniform_ = false;
        w.sqrt_diag_ = entries.cwiseSqrt();
        w.diag_ = std::move(entries);
        return w;
    }

    bool is_uniform() const { return uniform_; }
    Scalar uniform_value() const { return value_; }
    const Vector &diagonal_entries() const { return diag_; }

    /// Entry i of the diagonal.
    Scalar at(Eigen::Index i) const { return uniform_ ? value_ : diag_[i]; }

    /// Weight expanded to a length-N vector.
    Vector expanded(Eigen::Index n) const
    {
        if (uniform_)
            return Vector::Constant(n, value_);
        check_size(n);
        return diag_;
    }

    /// W^{1/2} v, maps the weighted space isometrically onto plain Euclidean space.
    template <typename Derived>
    auto scale(const Eigen::MatrixBase<Derived> &v) const
    {
        using Plain = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
        Plain out = v;
        if (uniform_) {
            out *= sqrt_value_;
        } else {
            check_size(v.rows());
            out = sqrt_diag_.asDiagonal() * out;
        }
        return out;
    }

    /// W^{-1/2} v
    template <typename Derived>
    auto unscale(const Eigen::MatrixBase<Derived> &v) const
    {
        using Plain = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
        Plain out = v;
        if (uniform_) {
            out /= sqrt_value_;
        } else {
            check_size(v.rows());
            out = sqrt_diag_.cwiseInverse().asDiagonal() * out;
        }
        return out;
    }

    /// W v
    template <typename Derived>
    auto apply(const Eigen::MatrixBase<Derived> &v) const
    {
        using Plain = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
        Plain out = v;
        if (uniform_) {
            out *= value_;
        } else {
            check_size(v.rows());
            out = diag_.asDiagonal() * out;
        }
        return out;
    }

    template <typename Derived>
    Scalar norm(const Eigen::MatrixBase<Derived> &v) const
    {
        return scale(v).norm();
    }

    template <typename DerivedA, typename DerivedB>
    Scalar dot(const Eigen::MatrixBase<DerivedA> &a, const Eigen::MatrixBase<DerivedB> &b) const
    {
        return a.dot(apply(b));
    }

    /// Largest deviation of B^T W B from the identity.
    template <typename Derived>
    Scalar gram_deviation(const Eigen::MatrixBase<Derived> &basis) const
    {
        auto scaled = scale(basis);
        using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        Mat gram = scaled.transpose() * scaled;
        gram -= Mat::Identity(gram.rows(), gram.cols());
        return gram.size() == 0 ? Scalar(0) : gram.cwiseAbs().maxCoeff();
    }

private:
    void check_size(Eigen::Index n) const
    {
        if (n != diag_.size())
            throw ContractViolation("weight length does not match state dimension");
    }

    bool uniform_ = true;
    Scalar value_ = Scalar(1);
    Scalar sqrt_value_ = Scalar(1);
    Vector diag_;
    Vector sqrt_diag_;
};

} // namespace polywidth
