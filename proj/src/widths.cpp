#include "polywidth/widths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "polywidth/fitting.hpp"
#include "polywidth/kron.hpp"

namespace polywidth {

std::string to_string(BasisKind kind) { return kind == BasisKind::pod ? "pod" : "greedy"; }

BasisKind basis_kind_from_string(const std::string &name)
{
    if (name == "pod")
        return BasisKind::pod;
    if (name == "greedy")
        return BasisKind::greedy;
    throw ContractViolation("unknown basis kind '" + name + "' (expected pod or greedy)");
}

std::string to_string(DecayModel model)
{
    switch (model) {
    case DecayModel::algebraic: return "algebraic";
    case DecayModel::exponential: return "exponential";
    case DecayModel::automatic: return "automatic";
    }
    return "unknown";
}

namespace {

double max_column_norm(const Matrix &m)
{
    return m.cols() == 0 ? 0.0 : m.colwise().norm().maxCoeff();
}

// max_j ||x_j - Q Q^T x_j|| for an orthonormal Q.
double worst_residual(const Matrix &scaled, const Matrix &orthonormal)
{
    if (orthonormal.cols() == 0)
        return max_column_norm(scaled);
    return max_column_norm(scaled - orthonormal * (orthonormal.transpose() * scaled));
}

Index max_dim(const std::vector<Index> &dims)
{
    Index top = 0;
    for (Index d : dims) {
        if (d < 0)
            throw ContractViolation("width dimensions must be non-negative");
        top = std::max(top, d);
    }
    return top;
}

} // namespace

std::vector<double> width_upper(const SnapshotSet &s, const std::vector<Index> &dims, BasisKind kind)
{
    const Index top = max_dim(dims);
    const LinearBasis basis = kind == BasisKind::pod ? pod_basis(s, top, false) : greedy_linear_basis(s, top);
    const Matrix frame = s.weight().scale(basis.basis);
    const Matrix scaled = s.scaled_states();

    std::vector<double> out;
    out.reserve(dims.size());
    for (Index d : dims)
        out.push_back(worst_residual(scaled, frame.leftCols(std::min(d, frame.cols()))));
    return out;
}

std::vector<double> width_lower(const SnapshotSet &s, const std::vector<Index> &dims)
{
    max_dim(dims);
    Eigen::BDCSVD<Matrix> svd(s.scaled_states());
    const Vector &sv = svd.singularValues();
    const double count = static_cast<double>(s.count());

    std::vector<double> out;
    out.reserve(dims.size());
    for (Index d : dims) {
        double tail = 0;
        for (Index j = sv.size() - 1; j >= d; --j)
            tail += sv[j] * sv[j];
        out.push_back(std::sqrt(tail / count));
    }
    return out;
}

WidthCurve width_curve(const SnapshotSet &s, const std::vector<Index> &dims, BasisKind kind)
{
    WidthCurve curve;
    curve.dims = dims;
    curve.upper = width_upper(s, dims, kind);
    curve.lower = width_lower(s, dims);
    curve.upper_method = to_string(kind);
    return curve;
}

TinyWidth exact_width_tiny(const SnapshotSet &s, Index n, const TinyWidthOptions &opts)
{
    const Index dim = s.ambient_dim();
    if (dim > 4 || s.count() > 8 || n > 2 || n < 0)
        throw ContractViolation("exact_width_tiny: only for N <= 4, K <= 8, 0 <= n <= 2");

    const Matrix scaled = s.scaled_states();
    TinyWidth best;
    if (n == 0) {
        best.value = max_column_norm(scaled);
        best.stabilized = true;
        best.subspace = Matrix(dim, 0);
        return best;
    }
    if (n >= dim) {
        best.value = 0;
        best.stabilized = true;
        best.subspace = s.weight().unscale(Matrix(Matrix::Identity(dim, n)));
        return best;
    }

    const auto orthonormalize = [&](const Matrix &frame) -> Matrix {
        Eigen::HouseholderQR<Matrix> qr(frame);
        return qr.householderQ() * Matrix::Identity(dim, n);
    };
    const auto objective = [&](const Matrix &frame) { return worst_residual(scaled, orthonormalize(frame)); };

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto random_frame = [&]() {
        Matrix f(dim, n);
        for (Index i = 0; i < f.size(); ++i)
            f.data()[i] = gauss(rng);
        return f;
    };

    std::vector<Matrix> starts;
    for (const LinearBasis &b : {pod_basis(s, n, false), greedy_linear_basis(s, n)}) {
        if (b.basis.cols() == n)
            starts.push_back(s.weight().scale(b.basis));
    }
    for (int r = 0; r < opts.restarts; ++r)
        starts.push_back(random_frame());

    std::vector<double> finals;
    best.value = std::numeric_limits<double>::infinity();
    Matrix best_frame;
    for (const Matrix &start : starts) {
        Matrix frame = orthonormalize(start);
        double value = objective(frame);
        double step = 0.5;
        int failures = 0;
        const int patience = static_cast<int>(4 * dim * n);
        for (int eval = 0; eval < opts.evaluations_per_restart && step > 1e-12; ++eval) {
            Matrix trial = frame + step * random_frame();
            const double trial_value = objective(trial);
            if (trial_value < value) {
                frame = orthonormalize(trial);
                value = trial_value;
                failures = 0;
                step *= 1.5;
            } else if (++failures >= patience) {
                step *= 0.5;
                failures = 0;
            }
        }
        finals.push_back(value);
        if (value < best.value) {
            best.value = value;
            best_frame = frame;
        }
    }

    const auto agreeing = std::count_if(finals.begin(), finals.end(),
                                        [&](double v) { return std::abs(v - best.value) <= 1e-6; });
    best.stabilized = agreeing >= 2;
    best.subspace = s.weight().unscale(best_frame);
    return best;
}

bool SandwichReport::provable_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const SandwichCheck &c) { return !c.provable || c.passed; });
}

bool SandwichReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const SandwichCheck &c) { return c.passed; });
}

SandwichReport sandwich_check(const SnapshotSet &s, const PolynomialDecoder<double> &decoder, Index n, Index p,
                              const ProjectionStrategy &strategy)
{
    if (decoder.reduced_dim() > n || decoder.degree() != p)
        throw ContractViolation("sandwich_check: decoder shape does not match the (n, p) cell");
    if (decoder.ambient_dim() != s.ambient_dim())
        throw ContractViolation("sandwich_check: decoder and snapshots live in different spaces");

    SandwichReport report;
    report.n = n;
    report.p = p;
    report.lifted_dim = static_cast<Index>(total_dimension(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p)));
    report.tolerance = 1e-10 * std::max(s.max_norm(), std::numeric_limits<double>::min());

    report.lower_at_lifted_dim = width_lower(s, {report.lifted_dim}).front();
    report.span_distance = span_distance(assemble_linear_factor(decoder).matrix, s);
    report.delta_estimate = set_distance(decoder, s, strategy).value;
    const auto affine = affine_distances(Matrix(decoder.mapping_matrix(1)), decoder.constant_term(), s);
    report.upper_at_n = *std::max_element(affine.begin(), affine.end());
    report.encoder_distortion = encoder_distortion(decoder, s);

    const double tol = report.tolerance;
    report.checks = {
        {"A_delta_ge_span", true, report.delta_estimate >= report.span_distance - tol, report.delta_estimate,
         report.span_distance},
        {"B_span_ge_lower", true, report.span_distance >= report.lower_at_lifted_dim - tol, report.span_distance,
         report.lower_at_lifted_dim},
        {"C_delta_ge_lower", true, report.delta_estimate >= report.lower_at_lifted_dim - tol, report.delta_estimate,
         report.lower_at_lifted_dim},
        {"D_delta_le_upper", false, report.delta_estimate <= report.upper_at_n + 1e-10, report.delta_estimate,
         report.upper_at_n},
        {"E_distortion_ge_delta", false, report.encoder_distortion >= report.delta_estimate - tol,
         report.encoder_distortion, report.delta_estimate},
    };

    if (!report.provable_passed()) {
        std::string failed;
        for (const auto &c : report.checks)
            if (c.provable && !c.passed)
                failed += (failed.empty() ? "" : ", ") + c.name;
        throw ProvableCheckFailure("sandwich_check: provable inequality violated (" + failed + ") at n=" +
                                       std::to_string(n) + ", p=" + std::to_string(p),
                                   report);
    }
    return report;
}

namespace {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};

LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y)
{
    const auto count = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    if (syy <= 0) {
        fit.r_squared = 1.0;
    } else {
        double ssr = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (fit.intercept + fit.slope * x[i]);
            ssr += e * e;
        }
        fit.r_squared = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
    }
    return fit;
}

DecayFit fit_algebraic(const std::vector<double> &dims, const std::vector<double> &logs)
{
    std::vector<double> x;
    x.reserve(dims.size());
    for (double d : dims)
        x.push_back(std::log(d));
    const LineFit line = fit_line(x, logs);
    if (!(line.slope < 0))
        throw InsufficientData("decay_fit: widths do not decay algebraically");
    DecayFit fit;
    fit.model = DecayModel::algebraic;
    fit.exponent = -line.slope;
    fit.scale = std::exp(line.intercept);
    fit.r_squared = line.r_squared;
    fit.points = static_cast<Index>(dims.size());
    return fit;
}

DecayFit fit_exponential(const std::vector<double> &dims, const std::vector<double> &logs)
{
    DecayFit best;
    best.model = DecayModel::exponential;
    best.r_squared = -1;
    for (double alpha : exponential_alpha_grid()) {
        std::vector<double> x;
        x.reserve(dims.size());
        for (double d : dims)
            x.push_back(std::pow(d, alpha));
        const LineFit line = fit_line(x, logs);
        if (!(line.slope < 0))
            continue;
        if (line.r_squared > best.r_squared) {
            best.r_squared = line.r_squared;
            best.exponent = alpha;
            best.rate = -line.slope;
            best.scale = std::exp(line.intercept);
        }
    }
    if (best.r_squared < 0)
        throw InsufficientData("decay_fit: widths do not decay exponentially");
    best.points = static_cast<Index>(dims.size());
    return best;
}

} // namespace

std::vector<double> exponential_alpha_grid()
{
    std::vector<double> grid;
    for (int i = 0; i <= 35; ++i)
        grid.push_back(0.25 + 0.05 * i);
    return grid;
}

DecayFit decay_fit(const std::vector<Index> &dims, const std::vector<double> &widths, DecayModel model)
{
    if (dims.size() != widths.size())
        throw ContractViolation("decay_fit: dims and widths differ in length");
    std::vector<double> x, logs;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 1)
            continue;
        if (!(widths[i] >= 1e-14))
            break;
        x.push_back(static_cast<double>(dims[i]));
        logs.push_back(std::log(widths[i]));
    }
    if (x.size() < 4)
        throw InsufficientData("decay_fit: need at least 4 positive widths, have " + std::to_string(x.size()));

    switch (model) {
    case DecayModel::algebraic: return fit_algebraic(x, logs);
    case DecayModel::exponential: return fit_exponential(x, logs);
    case DecayModel::automatic: break;
    }

    std::optional<DecayFit> alg, exp;
    try {
        alg = fit_algebraic(x, logs);
    } catch (const InsufficientData &) {
    }
    try {
        exp = fit_exponential(x, logs);
    } catch (const InsufficientData &) {
    }
    if (!alg && !exp)
        throw InsufficientData("decay_fit: widths do not decay");
    if (!exp)
        return *alg;
    if (!alg)
        return *exp;
    // An exponential fit pinned to the smallest grid exponent has no interior
    // optimum: the data decays slower than any law in that family.
    const bool interior = exp->exponent > exponential_alpha_grid().front() + 1e-12;
    return interior && exp->r_squared > alg->r_squared ? *exp : *alg;
}

DecayFit corollary_rate_transfer(const DecayFit &fit, Index p)
{
    if (p < 1)
        throw ContractViolation("corollary_rate_transfer: p must be at least 1");
    if (fit.model == DecayModel::automatic)
        throw ContractViolation("corollary_rate_transfer: fit must name a concrete model");
    DecayFit out = fit;
    out.exponent = fit.exponent * static_cast<double>(p);
    return out;
}

} // namespace polywidth
