#include <doctest.h>

#include <random>
#include <vector>

#include "polywidth/kron.hpp"

using namespace polywidth;

namespace {

// All non-decreasing k-tuples over {0..n-1}, found by filtering every n^k tuple.
std::vector<std::vector<Index>> brute_force_tuples(Index n, Index k)
{
    std::vector<std::vector<Index>> out;
    std::vector<Index> t(static_cast<std::size_t>(k), 0);
    while (true) {
        bool sorted = true;
        for (Index i = 1; i < k; ++i)
            sorted = sorted && t[i - 1] <= t[i];
        if (sorted)
            out.push_back(t);
        Index pos = k - 1;
        while (pos >= 0 && t[pos] == n - 1)
            t[pos--] = 0;
        if (pos < 0)
            break;
        ++t[pos];
    }
    return out;
}

// Pascal's triangle, a second route to binom(n+k-1, k).
std::uint64_t pascal(std::uint64_t top, std::uint64_t choose)
{
    std::vector<std::uint64_t> row(top + 1, 0);
    row[0] = 1;
    for (std::uint64_t r = 1; r <= top; ++r)
        for (std::uint64_t c = r; c >= 1; --c)
            row[c] += row[c - 1];
    return row[choose];
}

Eigen::VectorXd random_point(std::mt19937_64 &rng, Index n)
{
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Eigen::VectorXd x(n);
    for (Index i = 0; i < n; ++i)
        x[i] = u(rng);
    return x;
}

} // namespace

TEST_CASE("multi_index_count small values")
{
    CHECK(multi_index_count(5, 0) == 1);
    CHECK(multi_index_count(5, 1) == 5);
    CHECK(multi_index_count(2, 2) == 3);
    CHECK_THROWS_AS(multi_index_count(0, 2), ContractViolation);
}

TEST_CASE("total_dimension values")
{
    CHECK(total_dimension(39, 2) == 820);
    CHECK(total_dimension(1, 2) == 3);
    CHECK(total_dimension(3, 2) == 10);
    CHECK(total_dimension(4, 2) == 15);
    CHECK(total_dimension(4, 3) == 35);
}

TEST_CASE("counts match enumeration and Pascal's triangle")
{
    for (Index n = 1; n <= 12; ++n) {
        for (Index k = 0; k <= 6; ++k) {
            const auto table = enumerate_multi_indices(n, k);
            const auto expected = static_cast<std::uint64_t>(brute_force_tuples(n, k).size());
            CHECK(multi_index_count(n, k) == expected);
            CHECK(static_cast<std::uint64_t>(table.size()) == expected);
            CHECK(multi_index_count(n, k) == pascal(n + k - 1, k));
        }
    }
}

TEST_CASE("Pascal recurrence")
{
    for (std::uint64_t n = 2; n <= 30; ++n)
        for (std::uint64_t k = 1; k <= 10; ++k)
            CHECK(multi_index_count(n, k) == multi_index_count(n - 1, k) + multi_index_count(n, k - 1));
}

TEST_CASE("m(n,k) <= n^k")
{
    for (std::uint64_t n = 1; n <= 10; ++n) {
        std::uint64_t power = 1;
        for (std::uint64_t k = 1; k <= 8; ++k) {
            power *= n;
            CHECK(multi_index_count(n, k) <= power);
        }
    }
}

TEST_CASE("appendix bound")
{
    CHECK(appendix_bound_holds(4, 2));
    CHECK_FALSE(appendix_bound_holds(3, 2));
    CHECK_FALSE(appendix_bound_holds(2, 2));
    CHECK(appendix_bound_holds(4, 3));
    for (std::uint64_t n = 4; n <= 64; ++n)
        for (std::uint64_t p = 2; p <= 6; ++p)
            CHECK(appendix_bound_holds(n, p));
}

TEST_CASE("overflow is reported, not wrapped")
{
    CHECK_THROWS_AS(multi_index_count(1'000'000, 40), ArithmeticOverflow);
    CHECK_THROWS_AS(total_dimension(100'000, 30), ArithmeticOverflow);
    CHECK_THROWS_AS(appendix_bound_holds(1u << 20, 6), ArithmeticOverflow);
}

TEST_CASE("enumeration order")
{
    const auto t22 = enumerate_multi_indices(2, 2);
    REQUIRE(t22.size() == 3);
    CHECK(t22.tuple(0) == std::vector<Index>{0, 0});
    CHECK(t22.tuple(1) == std::vector<Index>{0, 1});
    CHECK(t22.tuple(2) == std::vector<Index>{1, 1});

    const auto t31 = enumerate_multi_indices(3, 1);
    REQUIRE(t31.size() == 3);
    for (Index i = 0; i < 3; ++i)
        CHECK(t31(i, 0) == i);

    const auto t13 = enumerate_multi_indices(1, 3);
    REQUIRE(t13.size() == 1);
    CHECK(t13.tuple(0) == std::vector<Index>{0, 0, 0});

    const auto t0 = enumerate_multi_indices(4, 0);
    REQUIRE(t0.size() == 1);
    CHECK(t0.tuple(0).empty());

    // Lexicographic order matches the brute-force list, which is generated in that order.
    for (Index n = 1; n <= 5; ++n)
        for (Index k = 0; k <= 4; ++k) {
            const auto table = enumerate_multi_indices(n, k);
            const auto expected = brute_force_tuples(n, k);
            for (Index r = 0; r < table.size(); ++r)
                CHECK(table.tuple(r) == expected[static_cast<std::size_t>(r)]);
        }
}

TEST_CASE("sym_kron examples")
{
    const Eigen::Vector2d x(2, 3);
    const Eigen::VectorXd k2 = sym_kron(x, 2);
    CHECK(k2 == Eigen::Vector3d(4, 6, 9));
    const Eigen::VectorXd k0 = sym_kron(x, 0);
    REQUIRE(k0.size() == 1);
    CHECK(k0[0] == 1.0);
    CHECK(sym_kron(Eigen::VectorXd::Zero(4), 3).isZero(0));
}

TEST_CASE("sym_kron is homogeneous of degree k")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 1 + trial % 5;
        const Index k = trial % 5;
        const Eigen::VectorXd x = random_point(rng, n);
        const double lambda = u(rng);
        const Eigen::VectorXd lhs = sym_kron((lambda * x).eval(), k);
        const Eigen::VectorXd rhs = std::pow(lambda, static_cast<double>(k)) * sym_kron(x, k);
        CHECK((lhs - rhs).norm() <= 1e-12 * (1 + rhs.norm()));
    }
}

TEST_CASE("lift examples")
{
    const Eigen::VectorXd a = lift(Eigen::VectorXd::Constant(1, 2.0), 2);
    CHECK(a == Eigen::Vector3d(4, 2, 1));

    Eigen::VectorXd zero_lift(6);
    zero_lift << 0, 0, 0, 0, 0, 1;
    CHECK(lift(Eigen::VectorXd::Zero(2), 2) == zero_lift);
    CHECK(lift(Eigen::VectorXd::Ones(2), 2) == Eigen::VectorXd::Ones(6));

    const LiftLayout layout(3, 3);
    CHECK(layout.total() == 20);
    CHECK(layout.block_offsets() == std::vector<Index>{0, 10, 16, 19});
    CHECK(layout.block_offset(0) == 19);
    CHECK(layout.block_size(2) == 6);
}

TEST_CASE("lift_jacobian examples")
{
    const Eigen::MatrixXd j = lift_jacobian(Eigen::VectorXd::Constant(1, 2.0), 2);
    CHECK(j == Eigen::Vector3d(4, 1, 0));

    const LiftLayout layout(3, 2);
    const Eigen::MatrixXd j0 = lift_jacobian(Eigen::VectorXd::Zero(3), layout);
    CHECK(j0.middleRows(layout.block_offset(1), 3) == Eigen::Matrix3d::Identity());
    CHECK(j0.middleRows(layout.block_offset(2), 6).isZero(0));
    CHECK(j0.row(layout.block_offset(0)).isZero(0));
}

TEST_CASE("lift_jacobian matches central differences")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 1 + trial % 5;
        const Index p = trial % 5;
        const LiftLayout layout(n, p);
        const Eigen::VectorXd x = random_point(rng, n);
        const Eigen::MatrixXd analytic = lift_jacobian(x, layout);
        Eigen::MatrixXd numeric(layout.total(), n);
        for (Index i = 0; i < n; ++i) {
            const double h = 1e-6 * (1 + std::abs(x[i]));
            Eigen::VectorXd up = x, down = x;
            up[i] += h;
            down[i] -= h;
            numeric.col(i) = (lift(up, layout) - lift(down, layout)) / (2 * h);
        }
        CHECK((analytic - numeric).norm() <= 1e-6 * (1 + analytic.norm()));
    }
}

TEST_CASE("Euler identity on homogeneous blocks")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = 1 + trial % 4;
        const Index p = 1 + trial % 4;
        const LiftLayout layout(n, p);
        const Eigen::VectorXd x = random_point(rng, n);
        const Eigen::MatrixXd jac = lift_jacobian(x, layout);
        for (Index k = 1; k <= p; ++k) {
            const Eigen::VectorXd lhs = jac.middleRows(layout.block_offset(k), layout.block_size(k)) * x;
            const Eigen::VectorXd rhs = static_cast<double>(k) * sym_kron(x, k);
            CHECK((lhs - rhs).norm() <= 1e-12 * (1 + rhs.norm()));
        }
    }
}

TEST_CASE("lift rejects mismatched layouts")
{
    CHECK_THROWS_AS(lift(Eigen::VectorXd::Zero(2), LiftLayout(3, 2)), ContractViolation);
    CHECK_THROWS_AS(lift_jacobian(Eigen::VectorXd::Zero(2), LiftLayout(3, 2)), ContractViolation);
}

TEST_CASE("templated on scalar")
{
    const Eigen::Vector2f x(2, 3);
    const Eigen::VectorXf k2 = sym_kron(x, 2);
    CHECK(k2 == Eigen::Vector3f(4, 6, 9));
    const Eigen::VectorXf l = lift(x, 1);
    CHECK(l == Eigen::Vector3f(2, 3, 1));
}
