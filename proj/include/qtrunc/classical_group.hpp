#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtrunc/cyclotomic.hpp"
#include "qtrunc/group_algebra.hpp"
#include "qtrunc/group_core.hpp"

namespace qtrunc {

using CycMatrix = std::vector<std::vector<Cyclotomic>>;

struct Irrep
{
    std::string label;
    int dim = 1;
    std::vector<CycMatrix> matrices;   // indexed like FiniteGroupData::elements()
    std::vector<Cyclotomic> character;
};

/**
 * Cayley table, exact irreducible unitary representations and character
 * table of a small finite group, read from the bundled data file and checked
 * on load (homomorphism, unitarity, orthogonality, sum of squared dimensions).
 * Elements follow the lexicographic normal-form order of the underlying Group.
 */
class FiniteGroupData
{
public:
    /// Catalog ids "S3", "D4", "Q8", "Z/m" (m <= 12). `generators` picks the word metric.
    static std::shared_ptr<const FiniteGroupData> load(std::string_view name, std::string_view generators = {});
    static std::shared_ptr<const FiniteGroupData> from_json(const nlohmann::json& entry, GroupPtr group);
    /// Location of groups.json (env QTRUNC_DATA_DIR overrides the build-time path).
    static std::string data_file();

    const GroupPtr& group() const { return group_; }
    std::size_t order() const { return elements_.size(); }
    const std::vector<GroupElement>& elements() const { return elements_; }
    std::size_t index_of(const GroupElement& x) const;
    std::size_t mul(std::size_t a, std::size_t b) const { return table_[a][b]; }
    std::size_t inv(std::size_t a) const { return inverse_[a]; }
    int distance(std::size_t a, std::size_t b) const;

    const std::vector<Irrep>& irreps() const { return irreps_; }
    /// Throws PreconditionError for an unknown label.
    const Irrep& irrep(std::string_view label) const;
    std::vector<std::string> labels() const;
    const std::string& trivial_label() const { return trivial_; }
    std::string conjugate_label(std::string_view label) const;

    /// <chi, psi> = (1/|G|) sum_g conj(chi(g)) psi(g)
    Cyclotomic character_inner(const std::vector<Cyclotomic>& chi, const std::vector<Cyclotomic>& psi) const;

private:
    void validate() const;

    GroupPtr group_;
    std::vector<GroupElement> elements_;
    std::map<GroupElement, std::size_t> index_;
    std::vector<std::vector<std::size_t>> table_;
    std::vector<std::size_t> inverse_;
    std::vector<Irrep> irreps_;
    std::string trivial_;
};

using FiniteGroupPtr = std::shared_ptr<const FiniteGroupData>;

/// Function on a finite group. Exact values live in a cyclotomic field;
/// numeric ones are complex doubles.
class FunctionOnG
{
public:
    FunctionOnG(FiniteGroupPtr g, std::vector<Cyclotomic> values);
    FunctionOnG(FiniteGroupPtr g, std::vector<Complex> values);

    static FunctionOnG delta(FiniteGroupPtr g, const GroupElement& x);
    static FunctionOnG constant(FiniteGroupPtr g, const Rational& c);

    const FiniteGroupPtr& group_data() const { return g_; }
    bool is_exact() const { return exact_; }
    std::size_t size() const { return exact_ ? exact_values_.size() : values_.size(); }

    /// Throws PreconditionError when the function is numeric.
    const std::vector<Cyclotomic>& exact_values() const;
    std::vector<Complex> values() const;
    /// Real values; throws PreconditionError if some value is not real.
    std::vector<double> real_values() const;
    /// Exact rational values; throws PreconditionError if some value is not rational.
    std::vector<Rational> rational_values() const;

    bool is_real() const;

    /// y -> f(z y)
    FunctionOnG translate(std::size_t z) const;

    FunctionOnG operator+(const FunctionOnG& o) const;
    FunctionOnG operator-(const FunctionOnG& o) const;
    FunctionOnG scaled(const Cyclotomic& c) const;
    bool operator==(const FunctionOnG& o) const;

private:
    FiniteGroupPtr g_;
    bool exact_;
    std::vector<Cyclotomic> exact_values_;
    std::vector<Complex> values_;
};

/// E^gamma f(x) = (d_gamma / |G|) sum_g chi_gamma(g) f(g^{-1} x)
FunctionOnG isotypic_project(const FunctionOnG& f, std::string_view label);

/// Multiplicities <chi_gamma chi_beta, chi_delta>, in the order of irreps().
std::vector<std::pair<std::string, int>> fusion_decompose(const FiniteGroupData& g, std::string_view gamma,
                                                          std::string_view beta);

struct IsotypicLabelSet
{
    std::set<std::string> labels;
    bool conjugate_closed = false;
    bool contains_trivial = false;
};

IsotypicLabelSet make_label_set(const FiniteGroupData& g, std::set<std::string> labels);

struct FiltrationResult
{
    IsotypicLabelSet set;       // S^n
    int stabilization_level = 0; // smallest k with S^k = S^{k+1}
};

/// S^0 = {trivial}, S^n = labels occurring in S^{n-1} (x) S. Requires S conjugate
/// closed, containing the trivial label, and faithful.
FiltrationResult filtration_sets(const FiniteGroupData& g, const IsotypicLabelSet& s, int n);

/// Smallest N with every label of `f` inside S^N.
int min_level_labels(const FiniteGroupData& g, const IsotypicLabelSet& s, const std::set<std::string>& f);

/// max_{x != y} |f(x) - f(y)| / d(x, y) for the word metric; exact for rational-valued f.
Rational lipschitz_constant_exact(const FunctionOnG& f);
double lipschitz_constant(const FunctionOnG& f);

struct LipNormSpec;

/// sup_z L(y -> f(z y)): the induced Lip-norm for the translation action,
/// evaluated at point-mass states.
double induced_lipnorm_translation(const LipNormSpec& lip, const FunctionOnG& f);
Rational induced_lipnorm_translation_exact(const FunctionOnG& f);

enum class CosetOrientation { LeftInvariant, RightInvariant };

struct HomogeneousReport
{
    std::size_t basis_size = 0;
    std::size_t samples = 0;
    Rational max_discrepancy = 0;
    std::vector<std::pair<Rational, Rational>> values;  // (induced, restricted) per tested function
};

/// Checks that the induced Lip-norm on B = {H-invariant functions} equals the
/// restriction of the word-metric Lipschitz norm, over a basis of B and
/// `samples` seeded random rational combinations.
HomogeneousReport homogeneous_restriction_check(const FiniteGroupData& g, const std::vector<GroupElement>& subgroup,
                                                std::size_t samples = 32, std::uint64_t seed = 1,
                                                CosetOrientation orientation = CosetOrientation::LeftInvariant);

}  // namespace qtrunc
