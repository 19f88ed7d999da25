#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtrunc/classical_group.hpp"
#include "qtrunc/group_algebra.hpp"
#include "qtrunc/lipnorms.hpp"

namespace qtrunc {

/**
 * Fourier truncation of a group algebra (span of delta_x, l(x) <= level) or of
 * C(G) for a finite group (isotypic components in S^level). level < 0 is the
 * whole algebra.
 */
struct TruncationSystem
{
    GroupPtr group;
    FiniteGroupPtr classical;
    IsotypicLabelSet generating;
    int level = -1;

    static TruncationSystem group_algebra(GroupPtr g, int level);
    static TruncationSystem classical_system(FiniteGroupPtr g, IsotypicLabelSet s, int level);

    bool is_classical() const { return static_cast<bool>(classical); }
    /// True for level < 0, or when the truncation already exhausts a finite group.
    bool is_full() const;
    /// Basis group elements (group algebras) or the label set S^level (classical).
    std::vector<GroupElement> basis() const;
    std::set<std::string> labels() const;
    bool contains(const AlgebraElement& a) const;
    bool contains(const FunctionOnG& f) const;
    std::string id() const;
};

/// Drops coefficients outside ball(n).
AlgebraElement truncate(const AlgebraElement& a, int n);

/// phi(x) = |F cap xF| / |F| with witness xi = 1_F / sqrt|F|.
PositiveDefiniteKernel folner_kernel(const GroupPtr& g, const std::vector<GroupElement>& f, std::string name = {});
/// Fejer kernel on Z: F = {0, ..., n-1}, phi(k) = (1 - |k|/n)_+.
PositiveDefiniteKernel fejer_kernel(const GroupPtr& z, int n);
/// Folner kernel of F = ball(r).
PositiveDefiniteKernel folner_ball_kernel(const GroupPtr& g, int r);

/// P_nu(a) = phi . a
AlgebraElement fejer_operator(const PositiveDefiniteKernel& phi, const AlgebraElement& a);

struct EpsilonCertificate
{
    double epsilon = 0.0;
    std::optional<Rational> exact;
    double lower = 0.0;   // certified or estimated lower bound on the same supremum
    double gap = 0.0;
    std::string method;   // closed-form | transport+LP | cutting-plane
    std::string lipnorm;
    std::string kernel;
    std::vector<GroupElement> support;
    int level_N = 0;      // -1 when the kernel has infinite support
    int window = 0;
    /// Supremum taken over elements supported in ball(window) only.
    bool window_relative = false;
    bool converged = true;

    nlohmann::json to_json(const Group& g) const;
};

/**
 * sup { |eps(a) - nu(a)| : a = a*, L(a) <= 1 } for the state nu with kernel phi,
 * eps the counit. search_window < 0 picks support radius + 1.
 */
EpsilonCertificate epsilon_of_kernel(const PositiveDefiniteKernel& phi, const LipNormSpec& lip,
                                     int search_window = -1, const DualNormOptions& opt = {});

/// Closed form of the transport distance between the point mass at 0 and the
/// measure with Fourier coefficients phi on the circle: pi/2 + sum_{k != 0} Re phi(k) ((-1)^k - 1)/(pi k^2).
double circle_transport_from_origin(const PositiveDefiniteKernel& phi);

/// supp(a) supp(a)^{-1}
std::vector<GroupElement> support_propagation(const AlgebraElement& a);

/// mu_a(b) = h(a* b a) / ||a||_2^2
Complex vector_state_value(const AlgebraElement& a, const AlgebraElement& b);

/// Smallest N with F inside ball(N).
int min_level(const Group& g, const std::vector<GroupElement>& f);
/// Smallest N with F inside S^N.
int min_level(const FiniteGroupData& g, const IsotypicLabelSet& s, const std::set<std::string>& f);

}  // namespace qtrunc
