#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtrunc/group_core.hpp"
#include "qtrunc/lp.hpp"

namespace qtrunc {

using Complex = std::complex<double>;

/**
 * Finitely supported function on a group, i.e. an element of the dense
 * subalgebra C_f(G) of the group C*-algebra. Zero coefficients are never
 * stored, so `terms()` is exactly the support.
 */
class AlgebraElement
{
public:
    explicit AlgebraElement(GroupPtr group);

    static AlgebraElement delta(GroupPtr group, const GroupElement& x, Complex c = 1.0);
    static AlgebraElement unit(GroupPtr group);

    const GroupPtr& group() const { return group_; }
    const std::map<GroupElement, Complex>& terms() const { return terms_; }

    Complex coefficient(const GroupElement& x) const;
    /// Adds c to the coefficient of x, dropping it if the result is exactly zero.
    void add(const GroupElement& x, Complex c);

    std::vector<GroupElement> support() const;
    /// Largest word length in the support (0 for the zero element).
    int support_radius() const;
    bool is_zero() const { return terms_.empty(); }

    double l1_norm() const;
    double l2_norm() const;
    /// sum |a(x)| * word_length(x)
    double weighted_l1() const;

    AlgebraElement operator+(const AlgebraElement& o) const;
    AlgebraElement operator-(const AlgebraElement& o) const;
    AlgebraElement operator*(Complex s) const;
    bool operator==(const AlgebraElement& o) const;

    /// JSON: {"group": id, "terms": [[normal-form, re, im], ...]} in lexicographic order.
    nlohmann::json to_json() const;
    static AlgebraElement from_json(const nlohmann::json& j, GroupPtr group);

private:
    void check_same_group(const AlgebraElement& o) const;
    AlgebraElement combine(const AlgebraElement& o, double sign) const;

    GroupPtr group_;
    std::map<GroupElement, Complex> terms_;
};

/// Two-sided estimate of an operator norm.
struct NormEstimate
{
    double lower = 0.0;
    double upper = 0.0;
    int window = 0;
    std::size_t iterations = 0;
    bool converged = true;
    std::string method;
    /// Exact value when it is rational and known in closed form.
    std::optional<Rational> exact;
};

struct NormOptions
{
    double tolerance = 1e-10;
    std::size_t max_iterations = 10000;
    /// Matrices up to this dimension are handled by a dense eigen/singular-value solver.
    std::size_t dense_limit = 300;
};

/// Witness for a positive-definite kernel: weight w_i and unit vector xi_i.
struct KernelWitness
{
    Rational weight;
    AlgebraElement vector;
};

/**
 * Normalized positive-definite function phi on a group, phi(e) = 1, together
 * with an explicit factorization phi = sum_i w_i <xi_i, lambda_x xi_i>.
 * `constant_one` marks the counit kernel phi == 1, which has no finite support
 * on an infinite group.
 */
class PositiveDefiniteKernel
{
public:
    PositiveDefiniteKernel(GroupPtr group, std::string name);

    const GroupPtr& group() const { return group_; }
    const std::string& name() const { return name_; }

    Complex value(const GroupElement& x) const;
    /// Exact value when the kernel was built from rational data.
    std::optional<Rational> exact_value(const GroupElement& x) const;
    bool has_exact_values() const { return exact_; }

    bool is_constant_one() const { return constant_one_; }
    bool finitely_supported() const;
    /// Support (throws PreconditionError for the counit on an infinite group).
    std::vector<GroupElement> support() const;
    bool is_real() const;

    const std::map<GroupElement, Complex>& values() const { return values_; }
    const std::vector<KernelWitness>& witnesses() const { return witnesses_; }

    void set_value(const GroupElement& x, Complex v);
    void set_exact_value(const GroupElement& x, const Rational& v);
    void add_witness(KernelWitness w) { witnesses_.push_back(std::move(w)); }
    void mark_constant_one() { constant_one_ = true; }

private:
    GroupPtr group_;
    std::string name_;
    std::map<GroupElement, Complex> values_;
    std::map<GroupElement, Rational> exact_values_;
    bool exact_ = true;
    bool constant_one_ = false;
    std::vector<KernelWitness> witnesses_;
};

/// The counit kernel phi == 1.
PositiveDefiniteKernel counit_kernel(const GroupPtr& group);

/// sum_i w_i phi_i; weights must be nonnegative and sum to one.
PositiveDefiniteKernel convex_combination(const std::vector<std::pair<Rational, PositiveDefiniteKernel>>& parts,
                                          std::string name);

// --- algebra operations ---------------------------------------------------

/// (a * b)(z) = sum_{xy = z} a(x) b(y)
AlgebraElement convolve(const AlgebraElement& a, const AlgebraElement& b);
/// a*(x) = conj(a(x^{-1}))
AlgebraElement involution(const AlgebraElement& a);
/// Haar (tracial) state: a(e).
Complex haar_state(const AlgebraElement& a);
/// Counit (trivial representation): sum_x a(x).
Complex counit(const AlgebraElement& a);

bool is_self_adjoint(const AlgebraElement& a, double tol = 0.0);
/// (a + a*) / 2
AlgebraElement symmetrize(const AlgebraElement& a);

/**
 * Norm of left convolution by `a` compressed to l^2(ball(window)).
 * `lower` is the largest singular value of the compression (a lower bound on
 * the reduced norm, nondecreasing in the window); `upper` is the l^1 norm or a
 * tighter registered closed form (monomials, characters of abelian groups, the
 * full regular representation of a finite group).
 */
NormEstimate operator_norm_window(const AlgebraElement& a, int window, const NormOptions& opt = {});

/// Certified upper bound on the norm of `a` from its Fourier transform, available
/// for cyclic groups (exact) and Z, Z^2 (grid plus a Lipschitz correction).
std::optional<double> abelian_norm_upper(const AlgebraElement& a);

/// Certified upper bound on the norm without building a matrix: exact for
/// monomials, the Fourier bound on abelian groups, the full regular
/// representation on finite groups, and the l^1 norm otherwise.
double operator_norm_upper(const AlgebraElement& a);

/// Spectral spread (max - min)/2 of a self-adjoint element: a lower bound on
/// its distance to the scalars. Exact for cyclic groups; grid values for Z, Z^2;
/// eigenvalues of the compression to ball(window) otherwise.
double quotient_norm_lower(const AlgebraElement& a, int window);

/// phi(x) = <xi, lambda_x xi> for a finitely supported unit vector xi.
PositiveDefiniteKernel vector_state_kernel(const AlgebraElement& xi, std::string name = "vector-state");

}  // namespace qtrunc
