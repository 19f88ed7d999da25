#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtrunc/truncation_fejer.hpp"

namespace qtrunc {

/**
 * A state on a finite-dimensional truncation: a normalized positive-definite
 * kernel on the group (group algebra side, mu(a) = sum_x a(x) phi(x)) or a
 * probability vector on a finite group (classical side).
 */
class StateModel
{
public:
    static StateModel from_kernel(PositiveDefiniteKernel phi, std::string tag = "kernel");
    /// Vector state of a unit vector xi (normalized internally).
    static StateModel from_vector(const AlgebraElement& xi, std::string tag = "vector");
    static StateModel point_mass(FiniteGroupPtr g, std::size_t index);
    static StateModel probability(FiniteGroupPtr g, std::vector<Rational> p, std::string tag = "convex");

    bool is_classical() const { return static_cast<bool>(classical_); }
    const std::string& tag() const { return tag_; }
    const PositiveDefiniteKernel& kernel() const;
    const std::vector<Rational>& probabilities() const { return p_; }
    const FiniteGroupPtr& classical() const { return classical_; }

    Complex evaluate(const AlgebraElement& a) const;
    Rational evaluate_exact(const FunctionOnG& f) const;
    std::string describe() const;

private:
    StateModel() = default;
    std::optional<PositiveDefiniteKernel> kernel_;
    FiniteGroupPtr classical_;
    std::vector<Rational> p_;
    std::string tag_;
};

struct MetricValue
{
    double value = 0.0;   // certified upper bound (exact when `exact` is set)
    double lower = 0.0;
    double gap = 0.0;
    std::optional<Rational> exact;
    std::string method;
};

/// d^L(mu, nu) = sup { |mu(a) - nu(a)| : a = a* in the system, L(a) <= 1 }.
MetricValue state_metric(const StateModel& mu, const StateModel& nu, const LipNormSpec& lip,
                         const TruncationSystem& system, const DualNormOptions& opt = {});

/// max of the two directed sup-inf deviations (using the certified upper values).
double hausdorff_state_distance(const std::vector<StateModel>& a, const std::vector<StateModel>& b,
                                const LipNormSpec& lip, const TruncationSystem& system);

struct HypothesisCheck
{
    std::size_t samples = 0;
    int sample_radius = 0;
    double max_violation = 0.0;       // max over both hypotheses
    double invariance_violation = 0.0; // max L(P a) - L(a)
    double norm_violation = 0.0;       // max ||a - P a||_upper - eps L_upper(a)
};

struct DistqOptions
{
    std::size_t samples = 16;  // random re-checks of the two hypotheses
    std::uint64_t seed = 1;
    RadiusOptions radius;
    DualNormOptions dual;
};

struct DistqCertificate
{
    std::string system;
    int level = 0;
    std::string lipnorm;
    std::string kernel;
    double upper = 0.0;
    double lower = 0.0;
    double gap = 0.0;
    std::optional<Rational> upper_exact;
    std::optional<Rational> lower_exact;
    EpsilonCertificate epsilon;
    RadiusEstimate radius_level;
    RadiusEstimate radius_full;
    HypothesisCheck hypothesis;

    nlohmann::json to_json(const Group& g) const;
};

/**
 * Upper bound eps from the averaging kernel (P = phi . with range in the
 * level-N truncation), re-checked by sampling, and the lower bound
 * |r_N - r_full| from radius estimates.
 */
DistqCertificate distq_certificate(const TruncationSystem& system, const PositiveDefiniteKernel& phi,
                                   const LipNormSpec& lip, const DistqOptions& opt = {});

struct ApproximationResult
{
    StateModel state;
    double deviation = 0.0;
    bool success = false;
    std::size_t net_size = 0;
    std::vector<std::string> candidates;
    std::vector<double> weights;
};

struct ApproximationOptions
{
    std::size_t random_directions = 32;
    std::uint64_t seed = 1;
    std::vector<AlgebraElement> extra_vectors;
};

/**
 * Best convex combination of candidate vector states against a finite net of
 * the Lip ball of the system (coordinate directions plus random self-adjoint
 * elements, each scaled to L = 1). Candidates are Folner vectors with at most
 * `budget` points: intervals {0..m-1} on Z, balls elsewhere, plus
 * opt.extra_vectors. Success iff the achieved deviation is at most eps_target / 2.
 */
ApproximationResult approximate_state(const StateModel& mu, double eps_target, const LipNormSpec& lip,
                                      const TruncationSystem& system, int budget,
                                      const ApproximationOptions& opt = {});

}  // namespace qtrunc
