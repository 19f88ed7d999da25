#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtrunc/classical_group.hpp"
#include "qtrunc/group_algebra.hpp"
#include "qtrunc/linalg.hpp"

namespace qtrunc {

enum class LipFamily { DiracWordLength, DiracCircle, WeightedL1, Sobolev, ClassicalLipschitz };

const char* to_string(LipFamily f);
/// Accepts the names printed by to_string (case-sensitive).
LipFamily parse_lip_family(const std::string& name);

/**
 * A Lip-norm on a group algebra (or on C(G) for ClassicalLipschitz).
 *
 * `window` is the compression radius for DiracWordLength (-1 picks support
 * radius + kDefaultMargin), the trigonometric degree window for DiracCircle
 * epsilon programs, and the search window for Sobolev. `s` is the Sobolev
 * exponent.
 */
struct LipNormSpec
{
    static constexpr int kDefaultMargin = 6;

    LipFamily family = LipFamily::WeightedL1;
    GroupPtr group;
    FiniteGroupPtr finite;
    int window = -1;
    double s = 1.0;
    int grid = 1 << 14;
    double tolerance = 1e-8;
    NormOptions norm;

    std::string id() const;

    static LipNormSpec weighted_l1(GroupPtr g);
    static LipNormSpec sobolev(GroupPtr g, double s, int window = -1);
    static LipNormSpec dirac_word_length(GroupPtr g, int window = -1);
    static LipNormSpec dirac_circle(GroupPtr z, int degree_window = -1);
    static LipNormSpec classical_lipschitz(FiniteGroupPtr g);
};

/// Evaluates L(a). `window` overrides the compression radius of the Dirac families.
NormEstimate lip_eval(const LipNormSpec& lip, const AlgebraElement& a, int window = -1);
NormEstimate lip_eval(const LipNormSpec& lip, const FunctionOnG& f);

/// Sobolev weight (1 + l(x))^s
double sobolev_weight(const LipNormSpec& lip, const GroupElement& x);

/// [D, lambda(a)] on l^2(ball): entries a(z y^{-1}) (l(z) - l(y)).
SparseC dirac_commutator(const AlgebraElement& a, const BallIndex& ball);

/// (phi . a)(x) = phi(x) a(x)
AlgebraElement schur_multiply(const PositiveDefiniteKernel& phi, const AlgebraElement& a);

struct InvarianceCheck
{
    bool holds = true;
    double slack = 0.0;  // L(a) - L(phi . a)
    double before = 0.0;
    double after = 0.0;
};

/// L(phi . a) <= L(a) + tol, compared on the same window. Non-self-adjoint a is symmetrized.
InvarianceCheck verify_invariance(const LipNormSpec& lip, const PositiveDefiniteKernel& phi, const AlgebraElement& a,
                                  double tol = 1e-9);

/// max over the kernels and phi == 1 of L(phi . a).
double invariantize_lower(const LipNormSpec& lip, const AlgebraElement& a,
                          const std::vector<PositiveDefiniteKernel>& kernels);

struct RadiusEstimate
{
    double lower = 0.0;
    double upper = 0.0;
    int level = 0;  // -1 for the full algebra
    std::optional<Rational> exact;
    std::string method;
    bool converged = true;
};

struct RadiusOptions
{
    int samples = 64;
    std::uint64_t seed = 1;
    /// Support radius of sampled elements when the level is the full algebra.
    int reference_window = 6;
};

/// Radius of (state space, d^L) for the truncation ball(level), or the full
/// algebra when level < 0.
RadiusEstimate radius_estimate(const LipNormSpec& lip, int level, const RadiusOptions& opt = {});

// --- dual programs --------------------------------------------------------

struct TrigSup
{
    double lower = 0.0;
    double upper = 0.0;
    double argmax = 0.0;
    std::size_t evaluations = 0;
};

/// Certified sup over theta of |sum_k c_k e^{i k theta}| by grid evaluation and
/// interval refinement with a Bernstein curvature bound on |g|^2.
TrigSup trig_sup_abs(const std::vector<std::pair<long, Complex>>& terms, int grid, double rel_tol);

struct DualNormOptions
{
    std::size_t max_iterations = 400;
    double tolerance = 1e-7;
    /// Extra radius of the compression used to generate cuts (DiracWordLength).
    int margin = LipNormSpec::kDefaultMargin;
};

struct DualNormResult
{
    double upper = 0.0;
    double lower = 0.0;
    bool lower_certified = false;
    std::size_t iterations = 0;
    bool converged = true;
    std::string method;
    std::optional<AlgebraElement> maximizer;
};

/**
 * sup { sum_x c(x) a(x) : a = a*, supp a in ball(window), L(a) <= 1 } for a
 * hermitian functional c (c(x^{-1}) = conj c(x), c(e) = 0). Closed forms for
 * WeightedL1 and Sobolev; cutting planes with certified dual bounds for the
 * Dirac families.
 */
DualNormResult lip_dual_norm(const LipNormSpec& lip, const std::map<GroupElement, Complex>& c, int window,
                             const DualNormOptions& opt = {});

}  // namespace qtrunc
