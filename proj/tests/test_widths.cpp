#include <doctest.h>

#include <cmath>
#include <random>

#include "polywidth/benchmarks.hpp"
#include "polywidth/fitting.hpp"
#include "polywidth/widths.hpp"

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

SnapshotSet identity_set(Index n) { return SnapshotSet(Matrix::Identity(n, n), Weight::uniform(1.0)); }

} // namespace

TEST_CASE("width_lower examples")
{
    CHECK(width_lower(identity_set(3), {1}).front() == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    const SnapshotSet single(Matrix(Eigen::Vector3d(1, 2, 2)), Weight::uniform(1.0));
    CHECK(width_lower(single, {0}).front() == doctest::Approx(3.0));
    CHECK(width_lower(single, {1}).front() == 0.0);
    CHECK(width_lower(identity_set(3), {3}).front() == 0.0);
}

TEST_CASE("width_upper examples")
{
    std::mt19937_64 rng(1);
    const SnapshotSet s(gaussian(rng, 6, 4), Weight::uniform(2.0));
    for (BasisKind kind : {BasisKind::pod, BasisKind::greedy})
        CHECK(width_upper(s, {4}, kind).front() <= 1e-10 * s.max_norm());

    // Identity columns of R^3 at dim 2: the residuals are |u_i| for the unit normal u
    // of the chosen plane, computed here from a cross product.
    const SnapshotSet id = identity_set(3);
    const Matrix b = pod_basis(id, 2).basis;
    const Eigen::Vector3d u = Eigen::Vector3d(b.col(0)).cross(Eigen::Vector3d(b.col(1))).normalized();
    CHECK(width_upper(id, {2}, BasisKind::pod).front() == doctest::Approx(u.cwiseAbs().maxCoeff()).epsilon(1e-12));
    CHECK(width_upper(id, {2}, BasisKind::greedy).front() == doctest::Approx(1.0));
}

TEST_CASE("bracket and monotonicity on random sets")
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        Vector w(8);
        for (Index i = 0; i < 8; ++i)
            w[i] = 0.1 + 0.2 * i;
        const SnapshotSet s(gaussian(rng, 8, 12), trial % 2 ? Weight::diagonal(w) : Weight::uniform(0.3));
        const std::vector<Index> dims{0, 1, 2, 3, 4, 5, 6, 7, 8};
        const auto lower = width_lower(s, dims);
        for (BasisKind kind : {BasisKind::pod, BasisKind::greedy}) {
            const auto curve = width_curve(s, dims, kind);
            CHECK(curve.lower == lower);
            CHECK(curve.upper_method == to_string(kind));
            for (std::size_t i = 0; i < dims.size(); ++i) {
                CHECK(curve.lower[i] <= curve.upper[i] + 1e-12);
                if (i > 0) {
                    CHECK(curve.lower[i] <= curve.lower[i - 1]);
                    CHECK(curve.upper[i] <= curve.upper[i - 1] + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("exact_width_tiny examples")
{
    const SnapshotSet antipodal(Matrix((Eigen::Matrix2d() << 1, -1, 0, 0).finished()), Weight::uniform(1.0));
    CHECK(exact_width_tiny(antipodal, 1).value <= 1e-9);

    const auto diag = exact_width_tiny(identity_set(2), 1);
    CHECK(std::abs(diag.value - std::sqrt(2.0) / 2) <= 1e-3);
    CHECK(diag.stabilized);

    const SnapshotSet id3 = identity_set(3);
    const double tiny = exact_width_tiny(id3, 2).value;
    CHECK(tiny >= width_lower(id3, {2}).front() - 1e-9);
    CHECK(tiny <= width_upper(id3, {2}, BasisKind::pod).front() + 1e-9);
    // Known optimum: the plane normal to (1,1,1)/sqrt(3).
    CHECK(std::abs(tiny - 1 / std::sqrt(3.0)) <= 1e-3);

    CHECK_THROWS_AS(exact_width_tiny(SnapshotSet(Matrix::Identity(5, 5), Weight::uniform(1.0)), 1), ContractViolation);
}

TEST_CASE("sandwich on an embedded linear decoder collapses to the affine width")
{
    std::mt19937_64 rng(3);
    const SnapshotSet s(gaussian(rng, 10, 14), Weight::uniform(1.0));
    const auto b = pod_basis(s, 3, true);
    const auto report = sandwich_check(s, from_linear(b.basis, b.shift, 2), 3, 2);
    CHECK(std::abs(report.delta_estimate - report.upper_at_n) <= 1e-10);
    CHECK(report.all_passed());
    CHECK(report.lifted_dim == 10);
}

TEST_CASE("sandwich on quadratic truth: manifold beats the linear width")
{
    const auto truth = quadratic_truth_snapshots(40, 2, 30, 5);
    const auto report = sandwich_check(truth.snapshots, truth.decoder, 2, 2);
    CHECK(report.delta_estimate <= 1e-8);
    CHECK(width_lower(truth.snapshots, {2}).front() > 1e-2);
    CHECK(report.provable_passed());
}

TEST_CASE("sandwich on advection, n = 4, p = 2")
{
    const auto s = advection_snapshots({1.0, 128}, 64);
    const auto d = fit_polynomial_manifold(s, {4, 2, std::nullopt, true});
    const auto report = sandwich_check(s, d, 4, 2);
    REQUIRE(report.checks.size() == 5);
    for (const auto &c : report.checks)
        CHECK_MESSAGE(c.passed, c.name);
    CHECK(report.delta_estimate >= report.span_distance - report.tolerance);
    CHECK(report.span_distance >= report.lower_at_lifted_dim - report.tolerance);
    CHECK(report.delta_estimate < report.upper_at_n);
}

TEST_CASE("sandwich contracts")
{
    const auto s = advection_snapshots({1.0, 32}, 16);
    const auto d = fit_polynomial_manifold(s, {3, 2, std::nullopt, true});
    CHECK_THROWS_AS(sandwich_check(s, d, 2, 2), ContractViolation);
    CHECK_THROWS_AS(sandwich_check(s, d, 3, 3), ContractViolation);
    CHECK_NOTHROW(sandwich_check(s, d, 4, 2));
}

TEST_CASE("decay_fit on exact models")
{
    std::vector<Index> dims;
    std::vector<double> alg, expo;
    for (Index n = 1; n <= 20; ++n) {
        dims.push_back(n);
        alg.push_back(std::pow(static_cast<double>(n), -0.5));
        expo.push_back(2 * std::exp(-static_cast<double>(n)));
    }
    const auto a = decay_fit(dims, alg, DecayModel::algebraic);
    CHECK(std::abs(a.exponent - 0.5) <= 1e-6);
    CHECK(std::abs(a.scale - 1.0) <= 1e-6);
    CHECK(a.r_squared == doctest::Approx(1.0));
    CHECK(decay_fit(dims, alg, DecayModel::automatic).model == DecayModel::algebraic);

    const auto e = decay_fit(dims, expo, DecayModel::automatic);
    CHECK(e.model == DecayModel::exponential);
    CHECK(std::abs(e.rate - 1.0) <= 1e-3);
    CHECK(std::abs(e.exponent - 1.0) <= 1e-9);
    CHECK(std::abs(e.scale - 2.0) <= 1e-3);
}

TEST_CASE("decay_fit truncation and insufficient data")
{
    const std::vector<Index> dims{1, 2, 3, 4, 5, 6};
    const std::vector<double> w{1, 0.5, 0.25, 0.125, 1e-16, 0.01};
    const auto fit = decay_fit(dims, w, DecayModel::automatic);
    CHECK(fit.points == 4);
    CHECK_THROWS_AS(decay_fit({1, 2, 3, 4}, {1, 0.5, 0.0, 0.1}, DecayModel::algebraic), InsufficientData);
    CHECK_THROWS_AS(decay_fit({1, 2, 3}, {1, 0.5, 0.2}, DecayModel::algebraic), InsufficientData);
    CHECK_THROWS_AS(decay_fit({1, 2}, {1, 0.5, 0.2}, DecayModel::algebraic), ContractViolation);
}

TEST_CASE("exponential alpha grid")
{
    const auto grid = exponential_alpha_grid();
    REQUIRE(grid.size() == 36);
    CHECK(grid.front() == 0.25);
    CHECK(grid.back() == doctest::Approx(2.0));
}

TEST_CASE("rate transfer")
{
    DecayFit adv;
    adv.model = DecayModel::algebraic;
    adv.scale = 0.5;
    adv.exponent = 0.5;
    const auto t = corollary_rate_transfer(adv, 2);
    CHECK(t.scale == 0.5);
    CHECK(t.exponent == 1.0);
    adv.scale = 0.25;
    CHECK(corollary_rate_transfer(adv, 2).scale == 0.25);
    CHECK(corollary_rate_transfer(adv, 2).exponent == 1.0);

    const auto same = corollary_rate_transfer(adv, 1);
    CHECK(same.exponent == adv.exponent);
    CHECK(same.scale == adv.scale);

    DecayFit ex;
    ex.model = DecayModel::exponential;
    ex.scale = 3;
    ex.rate = 0.7;
    ex.exponent = 0.4;
    const auto te = corollary_rate_transfer(ex, 3);
    CHECK(te.model == DecayModel::exponential);
    CHECK(te.rate == 0.7);
    CHECK(te.scale == 3);
    CHECK(te.exponent == doctest::Approx(1.2));

    CHECK_THROWS_AS(corollary_rate_transfer(ex, 0), ContractViolation);
}
