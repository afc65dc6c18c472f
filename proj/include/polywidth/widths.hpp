#pragma once

#include <string>
#include <vector>

#include "polywidth/decoder.hpp"
#include "polywidth/projection.hpp"
#include "polywidth/snapshots.hpp"

namespace polywidth {

enum class BasisKind { pod, greedy };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string &name);

/// Worst-case distance of the snapshots to the dim-dimensional POD or greedy
/// subspace, for every entry of `dims`. Each is an upper bound on d_dim(S).
std::vector<double> width_upper(const SnapshotSet &s, const std::vector<Index> &dims, BasisKind kind);

/// sqrt((1/K) sum_{j > dim} sigma_j^2) of W^{1/2} S. Each is a lower bound on d_dim(S).
std::vector<double> width_lower(const SnapshotSet &s, const std::vector<Index> &dims);

struct WidthCurve {
    std::vector<Index> dims;
    std::vector<double> upper;
    std::vector<double> lower;
    std::string upper_method; ///< "pod" or "greedy"
    std::string lower_method = "svd_tail";
};

WidthCurve width_curve(const SnapshotSet &s, const std::vector<Index> &dims, BasisKind kind);

struct TinyWidthOptions {
    int restarts = 48;
    int evaluations_per_restart = 3000;
    std::uint64_t seed = 7;
};

struct TinyWidth {
    double value = 0;
    /// At least two independent restarts agreed with the best value to 1e-6.
    bool stabilized = false;
    Matrix subspace; ///< W-orthonormal basis of the best subspace found
};

/// Direct minimax search for d_n(S) on tiny sets (N <= 4, K <= 8, n <= 2):
/// random orthonormal frames refined by shrinking-step random descent, seeded
/// with the POD and greedy subspaces.
TinyWidth exact_width_tiny(const SnapshotSet &s, Index n, const TinyWidthOptions &opts = {});

struct SandwichCheck {
    std::string name;
    bool provable = true;
    bool passed = false;
    double lhs = 0; ///< the side that must be >= (or <= for the heuristic check)
    double rhs = 0;
};

struct SandwichReport {
    Index n = 0;
    Index p = 0;
    Index lifted_dim = 0;            ///< total_dimension(n, p)
    double lower_at_lifted_dim = 0;  ///< width_lower(S, N(n,p))
    double span_distance = 0;        ///< dist(S, span A)
    double delta_estimate = 0;       ///< set_distance(decoder, S)
    double upper_at_n = 0;           ///< dist(S, T_0 + span T_1)
    double encoder_distortion = 0;
    double tolerance = 0;            ///< round-off slack applied to the provable checks
    std::vector<SandwichCheck> checks;

    bool provable_passed() const;
    bool all_passed() const;
};

/// Raised when a provable inequality fails on computed quantities.
class ProvableCheckFailure : public std::runtime_error {
public:
    ProvableCheckFailure(const std::string &what, SandwichReport r) : std::runtime_error(what), report(std::move(r)) {}
    SandwichReport report;
};

/// Evaluates both halves of the sandwich on computed quantities:
///   A  delta >= dist(S, span A)
///   B  dist(S, span A) >= width_lower(N(n,p))
///   C  delta >= width_lower(N(n,p))
///   D  delta <= dist(S, T_0 + span T_1) + 1e-10   (heuristic)
/// `n` and `p` are the nominal grid values, the decoder may have a smaller
/// reduced dimension. Throws ProvableCheckFailure when A, B or C fail.
SandwichReport sandwich_check(const SnapshotSet &s, const PolynomialDecoder<double> &decoder, Index n, Index p,
                              const ProjectionStrategy &strategy = {});

enum class DecayModel { algebraic, exponential, automatic };

std::string to_string(DecayModel model);

struct DecayFit {
    DecayModel model = DecayModel::algebraic;
    double scale = 0;    ///< M
    double exponent = 0; ///< alpha
    double rate = 0;     ///< a, exponential model only
    double r_squared = 0;
    Index points = 0;    ///< number of (dim, width) pairs used
};

/// Fits width ~ M dim^-alpha or width ~ M exp(-a dim^alpha).
/// Dimensions below 1 are ignored; the curve is cut at its first value below 1e-14.
/// The exponential exponent is chosen from a fixed grid of alphas. `automatic`
/// takes the better r^2, except that an exponential fit stuck at the smallest
/// grid exponent never wins.
DecayFit decay_fit(const std::vector<Index> &dims, const std::vector<double> &widths, DecayModel model);

/// Exponents scanned by the exponential fit: 0.25, 0.30, ..., 2.00.
std::vector<double> exponential_alpha_grid();

/// Decay law implied for the degree-p manifold width: alpha -> alpha * p.
DecayFit corollary_rate_transfer(const DecayFit &fit, Index p);

} // namespace polywidth
