#pragma once

// Symmetric Kronecker powers of a reduced coordinate vector.
//
// The degree-k symmetric power of x in R^n keeps one copy of every degree-k
// monomial x_{i1} x_{i2} ... x_{ik} with i1 <= i2 <= ... <= ik. Entries are
// plain monomial products (no multinomial weights), ordered lexicographically
// by their index tuple. The lift stacks those powers from degree p down to 0:
//
//     lift(x) = (x^{(p)}, x^{(p-1)}, ..., x, 1),
//
// so that a polynomial decoder becomes a linear map applied to lift(x).

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "polywidth/errors.hpp"

namespace polywidth {

using Index = Eigen::Index;

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out))
        throw ArithmeticOverflow("64-bit overflow in monomial count");
    return out;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a, b, &out))
        throw ArithmeticOverflow("64-bit overflow in monomial count");
    return out;
}

inline std::uint64_t checked_pow(std::uint64_t base, unsigned exponent)
{
    std::uint64_t out = 1;
    for (unsigned i = 0; i < exponent; ++i)
        out = checked_mul(out, base);
    return out;
}

} // namespace detail

/// Number of degree-k monomials in n variables, binom(n+k-1, k).
inline std::uint64_t multi_index_count(std::uint64_t n, std::uint64_t k)
{
    if (n < 1)
        throw ContractViolation("multi_index_count: n must be at least 1");
    // binom(n-1+i+1, i+1) = binom(n-1+i, i) * (n+i) / (i+1), exact at every step.
    unsigned __int128 result = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        result = result * (n + i);
        result /= (i + 1);
        if (result > static_cast<unsigned __int128>(UINT64_MAX))
            throw ArithmeticOverflow("multi_index_count exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(result);
}

/// Length of the lifted vector, sum_{k=0}^{p} binom(n+k-1, k).
inline std::uint64_t total_dimension(std::uint64_t n, std::uint64_t p)
{
    std::uint64_t total = 0;
    for (std::uint64_t k = 0; k <= p; ++k)
        total = detail::checked_add(total, multi_index_count(n, k));
    return total;
}

/// Whether total_dimension(n, p) <= n^p. Always true for p >= 2, n >= 4.
inline bool appendix_bound_holds(std::uint64_t n, std::uint64_t p)
{
    if (n < 1 || p < 1)
        throw ContractViolation("appendix_bound_holds: n and p must be at least 1");
    return total_dimension(n, p) <= detail::checked_pow(n, static_cast<unsigned>(p));
}

/// Ordered list of non-decreasing k-tuples over {0, ..., n-1}.
/// Indices are stored zero-based; row j is the j-th monomial of the degree-k power.
class MultiIndexTable {
public:
    MultiIndexTable() = default;

    MultiIndexTable(Index n, Index k) : n_(n), k_(k)
    {
        if (n < 1 || k < 0)
            throw ContractViolation("MultiIndexTable: need n >= 1 and k >= 0");
        const auto count = multi_index_count(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
        rows_ = static_cast<Index>(count);
        entries_.reserve(static_cast<std::size_t>(count * static_cast<std::uint64_t>(k)));

        std::vector<Index> tuple(static_cast<std::size_t>(k), 0);
        for (Index row = 0; row < rows_; ++row) {
            entries_.insert(entries_.end(), tuple.begin(), tuple.end());
            // Next tuple in lexicographic order: bump the rightmost slot that can
            // still grow and reset everything after it to the same value.
            Index slot = k - 1;
            while (slot >= 0 && tuple[static_cast<std::size_t>(slot)] == n - 1)
                --slot;
            if (slot < 0)
                break;
            const Index value = tuple[static_cast<std::size_t>(slot)] + 1;
            for (Index s = slot; s < k; ++s)
                tuple[static_cast<std::size_t>(s)] = value;
        }
    }

    Index variables() const { return n_; }
    Index degree() const { return k_; }
    Index size() const { return rows_; }

    /// Variable index (zero-based) at position `slot` of monomial `row`.
    Index operator()(Index row, Index slot) const
    {
        return entries_[static_cast<std::size_t>(row * k_ + slot)];
    }

    std::vector<Index> tuple(Index row) const
    {
        auto first = entries_.begin() + row * k_;
        return {first, first + k_};
    }

private:
    Index n_ = 0;
    Index k_ = 0;
    Index rows_ = 0;
    std::vector<Index> entries_;
};

/// Block structure of the lifted vector: degree p first, constant last.
class LiftLayout {
public:
    LiftLayout() = default;

    LiftLayout(Index n, Index p) : n_(n), p_(p)
    {
        if (n < 1 || p < 0)
            throw ContractViolation("LiftLayout: need n >= 1 and p >= 0");
        Index offset = 0;
        for (Index k = p; k >= 0; --k) {
            tables_.emplace_back(n, k);
            offsets_.push_back(offset);
            offset += tables_.back().size();
        }
        total_ = offset;
    }

    Index variables() const { return n_; }
    Index degree() const { return p_; }
    Index total() const { return total_; }

    /// Table and offset of the degree-k block.
    const MultiIndexTable &table(Index k) const { return tables_[static_cast<std::size_t>(p_ - k)]; }
    Index block_offset(Index k) const { return offsets_[static_cast<std::size_t>(p_ - k)]; }
    Index block_size(Index k) const { return table(k).size(); }

    /// Offsets in storage order (k = p, p-1, ..., 0).
    const std::vector<Index> &block_offsets() const { return offsets_; }

private:
    Index n_ = 0;
    Index p_ = 0;
    Index total_ = 0;
    std::vector<MultiIndexTable> tables_;
    std::vector<Index> offsets_;
};

inline MultiIndexTable enumerate_multi_indices(Index n, Index k) { return MultiIndexTable(n, k); }

namespace detail {

template <typename Derived, typename Out>
void fill_monomials(const Eigen::MatrixBase<Derived> &x, const MultiIndexTable &table, Out &&out)
{
    using Scalar = typename Derived::Scalar;
    for (Index row = 0; row < table.size(); ++row) {
        Scalar value(1);
        for (Index slot = 0; slot < table.degree(); ++slot)
            value *= x[table(row, slot)];
        out[row] = value;
    }
}

// d/dx_i of every monomial in `table`, written into rows of `out` (size rows x n).
template <typename Derived, typename Out>
void fill_monomial_gradients(const Eigen::MatrixBase<Derived> &x, const MultiIndexTable &table, Out &&out)
{
    using Scalar = typename Derived::Scalar;
    const Index k = table.degree();
    for (Index row = 0; row < table.size(); ++row) {
        for (Index slot = 0; slot < k; ++slot) {
            const Index var = table(row, slot);
            // Handle each distinct variable once, at its first occurrence.
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
            out(row, var) = Scalar(multiplicity) * rest;
        }
    }
}

} // namespace detail

/// Degree-k symmetric Kronecker power of x.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sym_kron(const Eigen::MatrixBase<Derived> &x, Index k)
{
    const MultiIndexTable table(x.size(), k);
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(table.size());
    detail::fill_monomials(x, table, out);
    return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> lift(const Eigen::MatrixBase<Derived> &x, const LiftLayout &layout)
{
    if (x.size() != layout.variables())
        throw ContractViolation("lift: coordinate length does not match layout");
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(layout.total());
    for (Index k = layout.degree(); k >= 0; --k) {
        auto block = out.segment(layout.block_offset(k), layout.block_size(k));
        detail::fill_monomials(x, layout.table(k), block);
    }
    return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> lift(const Eigen::MatrixBase<Derived> &x, Index p)
{
    return lift(x, LiftLayout(x.size(), p));
}

/// Jacobian of lift, shape total_dimension(n, p) x n.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
lift_jacobian(const Eigen::MatrixBase<Derived> &x, const LiftLayout &layout)
{
    using Scalar = typename Derived::Scalar;
    if (x.size() != layout.variables())
        throw ContractViolation("lift_jacobian: coordinate length does not match layout");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(layout.total(), x.size());
    for (Index k = layout.degree(); k >= 1; --k) {
        auto block = out.middleRows(layout.block_offset(k), layout.block_size(k));
        detail::fill_monomial_gradients(x, layout.table(k), block);
    }
    return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
lift_jacobian(const Eigen::MatrixBase<Derived> &x, Index p)
{
    return lift_jacobian(x, LiftLayout(x.size(), p));
}

} // namespace polywidth
