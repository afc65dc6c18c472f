#include <doctest.h>

#include <random>

#include "polywidth/fitting.hpp"
#include "polywidth/projection.hpp"

using namespace polywidth;

namespace {

Matrix gaussian(std::mt19937_64 &rng, Index rows, Index cols)
{
    std::normal_distribution<double> g;
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i)
        m.data()[i] = g(rng);
    return m;
}

Matrix orthonormal(std::mt19937_64 &rng, Index rows, Index cols)
{
    const Eigen::HouseholderQR<Matrix> qr(gaussian(rng, rows, cols));
    return Matrix(qr.householderQ()).leftCols(cols);
}

// Worst residual of the columns after projection onto span(basis), basis orthonormal.
double max_residual(const Matrix &states, const Matrix &basis)
{
    return (states - basis * (basis.transpose() * states)).colwise().norm().maxCoeff();
}

double sum_sq_residual(const Matrix &states, const Matrix &basis)
{
    return (states - basis * (basis.transpose() * states)).squaredNorm();
}

} // namespace

TEST_CASE("pod_basis on a repeated column")
{
    const Vector s(Eigen::Vector3d(1, 2, 2));
    const SnapshotSet set(s.replicate(1, 4), Weight::uniform(1.0));
    const auto b = pod_basis(set, 1);
    CHECK(std::abs(std::abs(b.basis.col(0).dot(s / 3.0)) - 1.0) <= 1e-12);
    CHECK(b.singular_values[0] == doctest::Approx(6.0)); // ||s|| * sqrt(4)
    CHECK(b.singular_values.tail(b.singular_values.size() - 1).norm() <= 1e-12);

    const auto two = pod_basis(set, 2);
    CHECK(two.degenerate_rank);
    CHECK(two.basis.cols() == 1);
}

TEST_CASE("pod_basis on identity columns")
{
    const SnapshotSet set(Matrix::Identity(3, 3), Weight::uniform(1.0));
    const auto b = pod_basis(set, 3);
    CHECK(max_residual(set.states(), b.basis) <= 1e-12);
    CHECK((b.basis.transpose() * b.basis - Matrix::Identity(3, 3)).norm() <= 1e-12);
}

TEST_CASE("pod_basis recovers low-rank data and is weighted-orthonormal")
{
    std::mt19937_64 rng(1);
    const Matrix data = gaussian(rng, 20, 2) * gaussian(rng, 2, 15);
    const SnapshotSet set(data, Weight::uniform(1.0));
    CHECK(max_residual(data, pod_basis(set, 2).basis) <= 1e-10);
    CHECK(numerical_rank(set) == 2);

    Vector w(20);
    for (Index i = 0; i < 20; ++i)
        w[i] = 0.5 + 0.1 * i;
    const SnapshotSet weighted(data, Weight::diagonal(w));
    const auto b = pod_basis(weighted, 2);
    CHECK(weighted.weight().gram_deviation(b.basis) <= 1e-12);
    for (Index j = 0; j < data.cols(); ++j)
        CHECK(affine_distance(b.basis, Vector::Zero(20), data.col(j), weighted.weight()) <= 1e-10);
}

TEST_CASE("pod mean-square optimality identity")
{
    std::mt19937_64 rng(2);
    const Matrix data = gaussian(rng, 12, 9);
    const SnapshotSet set(data, Weight::uniform(1.0));
    const Eigen::JacobiSVD<Matrix> svd(data); // independent SVD routine
    const Vector sv = svd.singularValues();
    for (Index n = 1; n <= 8; ++n) {
        const double tail = sv.tail(sv.size() - n).squaredNorm();
        CHECK(std::abs(sum_sq_residual(data, pod_basis(set, n).basis) - tail) <= 1e-10 * sv.squaredNorm());
    }
}

TEST_CASE("residuals are non-increasing in n for pod and greedy")
{
    std::mt19937_64 rng(3);
    const SnapshotSet set(gaussian(rng, 15, 10), Weight::uniform(1.0));
    double prev_pod_max = 1e300, prev_pod_ms = 1e300, prev_gr_max = 1e300, prev_gr_ms = 1e300;
    for (Index n = 1; n <= 10; ++n) {
        const Matrix pod = pod_basis(set, n).basis;
        const Matrix gr = greedy_linear_basis(set, n).basis;
        CHECK(max_residual(set.states(), pod) <= prev_pod_max + 1e-12);
        CHECK(sum_sq_residual(set.states(), pod) <= prev_pod_ms + 1e-12);
        CHECK(max_residual(set.states(), gr) <= prev_gr_max + 1e-12);
        CHECK(sum_sq_residual(set.states(), gr) <= prev_gr_ms + 1e-12);
        prev_pod_max = max_residual(set.states(), pod);
        prev_pod_ms = sum_sq_residual(set.states(), pod);
        prev_gr_max = max_residual(set.states(), gr);
        prev_gr_ms = sum_sq_residual(set.states(), gr);
    }
}

TEST_CASE("greedy basis examples")
{
    const Vector s(Eigen::Vector3d(0, 3, 4));
    const SnapshotSet rank1(s.replicate(1, 3), Weight::uniform(1.0));
    CHECK(max_residual(rank1.states(), greedy_linear_basis(rank1, 1).basis) <= 1e-14);

    const SnapshotSet id(Matrix::Identity(3, 3), Weight::uniform(1.0));
    const auto g = greedy_linear_basis(id, 2);
    CHECK(max_residual(id.states(), g.basis) == doctest::Approx(1.0));
    // Ties resolve to the lowest column index: e1 first, then e2.
    CHECK(std::abs(g.basis(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(g.basis(1, 1)) == doctest::Approx(1.0));

    CHECK(greedy_linear_basis(rank1, 2).degenerate_rank);
}

TEST_CASE("fit on linear data leaves the quadratic block negligible")
{
    std::mt19937_64 rng(4);
    const Matrix b = orthonormal(rng, 30, 2);
    const Matrix y = gaussian(rng, 2, 40);
    const SnapshotSet set(b * y, Weight::uniform(1.0));
    const auto d = fit_polynomial_manifold(set, {2, 2, 1e-10, false});
    CHECK(d.mapping_matrix(2).norm() <= 1e-8 * d.mapping_matrix(1).norm());
    CHECK(d.constant_term().isZero(0));
}

TEST_CASE("fit recovers a quadratic manifold")
{
    std::mt19937_64 rng(5);
    const Index N = 40, n = 3, K = 60;
    const Matrix b = orthonormal(rng, N, n);
    // Quadratic part orthogonal to span(b) so the POD encoder returns the true coordinates.
    Matrix q = gaussian(rng, N, multi_index_count(n, 2));
    q -= b * (b.transpose() * q);
    q *= 0.5 * b.norm() / q.norm(); // small enough that POD ranks span(b) first
    Matrix y(n, K);
    std::uniform_real_distribution<double> u(-1, 1);
    for (Index j = 0; j < K; j += 2)
        for (Index i = 0; i < n; ++i) {
            y(i, j) = u(rng);
            y(i, j + 1) = -y(i, j);
        }
    Matrix states(N, K);
    for (Index j = 0; j < K; ++j)
        states.col(j) = b * y.col(j) + q * sym_kron(Vector(y.col(j)), 2);
    const SnapshotSet set(states, Weight::uniform(1.0));

    const auto d = fit_polynomial_manifold(set, {n, 2, 0.0, false});
    double worst = 0;
    for (Index j = 0; j < K; ++j) {
        const auto r = nonlinear_project(d, set.state(j), Vector(d.mapping_matrix(1).transpose() * set.state(j)),
                                         set.weight());
        worst = std::max(worst, r.residual);
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("centering puts the mean in T_0")
{
    std::mt19937_64 rng(6);
    const SnapshotSet set(gaussian(rng, 10, 20), Weight::uniform(1.0));
    const auto d = fit_polynomial_manifold(set, {3, 2, std::nullopt, true});
    CHECK((d.constant_term() - set.mean()).norm() <= 1e-14);
    CHECK(d.layout().total() == 10);
}

TEST_CASE("ill-posed fit without ridge")
{
    std::mt19937_64 rng(7);
    // m(4,2) = 10 quadratic unknowns per row but only 6 snapshots.
    const SnapshotSet set(gaussian(rng, 12, 6), Weight::uniform(1.0));
    CHECK_THROWS_AS(fit_polynomial_manifold(set, {4, 2, 0.0, false}), IllPosedFit);
    CHECK_NOTHROW(fit_polynomial_manifold(set, {4, 2, std::nullopt, false}));
}

TEST_CASE("fit contracts")
{
    std::mt19937_64 rng(8);
    const SnapshotSet set(gaussian(rng, 6, 2) * gaussian(rng, 2, 8), Weight::uniform(1.0));
    CHECK_THROWS_AS(fit_polynomial_manifold(set, {3, 2, std::nullopt, false}), ContractViolation);
    CHECK_THROWS_AS(fit_polynomial_manifold(set, {0, 2, std::nullopt, false}), ContractViolation);
    CHECK_THROWS_AS(fit_polynomial_manifold(set, {1, 0, std::nullopt, false}), ContractViolation);
    CHECK_THROWS_AS(fit_polynomial_manifold(set, {1, 2, -1.0, false}), ContractViolation);
}

TEST_CASE("ridge continuity")
{
    std::mt19937_64 rng(9);
    const Matrix b = orthonormal(rng, 20, 2);
    Matrix states(20, 30);
    const Matrix y = gaussian(rng, 2, 30);
    const Matrix q = gaussian(rng, 20, 3);
    for (Index j = 0; j < 30; ++j)
        states.col(j) = b * y.col(j) + 0.2 * q * sym_kron(Vector(y.col(j)), 2) + 0.01 * gaussian(rng, 20, 1);
    const SnapshotSet set(states, Weight::uniform(1.0));
    std::vector<Matrix> t2;
    for (double ridge : {1e-4, 1e-8, 1e-12})
        t2.push_back(fit_polynomial_manifold(set, {2, 2, ridge, true}).mapping_matrix(2));
    const double d01 = (t2[0] - t2[1]).norm();
    const double d12 = (t2[1] - t2[2]).norm();
    CHECK(d12 < d01);
}

TEST_CASE("fitted manifold never does worse than its affine part")
{
    std::mt19937_64 rng(10);
    Matrix states(25, 40);
    std::uniform_real_distribution<double> u(0, 1);
    for (Index j = 0; j < 40; ++j) {
        const double mu = u(rng);
        for (Index i = 0; i < 25; ++i)
            states(i, j) = std::exp(-20 * std::pow(i / 24.0 - mu, 2));
    }
    const SnapshotSet set(states, Weight::uniform(1.0 / 25));
    for (Index p : {2, 3}) {
        const auto d = fit_polynomial_manifold(set, {3, p, std::nullopt, true});
        const auto affine = affine_distances(Matrix(d.mapping_matrix(1)), d.constant_term(), set);
        const double upper = *std::max_element(affine.begin(), affine.end());
        CHECK(set_distance(d, set).value <= upper + 1e-10);
    }
}
