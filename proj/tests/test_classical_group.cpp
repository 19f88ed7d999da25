#include <doctest.h>

#include <algorithm>
#include <array>
#include <random>

#include "qtrunc/classical_group.hpp"
#include "qtrunc/errors.hpp"
#include "qtrunc/lipnorms.hpp"

using namespace qtrunc;

namespace {

// S3 as permutations of {0,1,2}; composition (p*q)(i) = p(q(i)).
using Perm = std::array<int, 3>;

Perm compose(const Perm& p, const Perm& q) { return {p[q[0]], p[q[1]], p[q[2]]}; }

int fixed_points(const Perm& p) { return (p[0] == 0) + (p[1] == 1) + (p[2] == 2); }

// Standard character from fixed points: chi_std = fix - 1.
int chi_std(const Perm& p) { return fixed_points(p) - 1; }

// Elements are numbered by the lexicographic order of one-line notation.
Perm perm_of(const FiniteGroupData& g, std::size_t i)
{
    std::vector<Perm> lex;
    Perm p{0, 1, 2};
    do {
        lex.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return lex[static_cast<std::size_t>(g.elements()[i].nf[0])];
}

FunctionOnG random_rational(const FiniteGroupPtr& g, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> num(-9, 9), den(1, 5);
    std::vector<Cyclotomic> v;
    for (std::size_t i = 0; i < g->order(); ++i)
        v.emplace_back(Rational(num(rng), den(rng)));
    return FunctionOnG(g, v);
}

}  // namespace

TEST_CASE("catalog data loads and validates")
{
    for (auto name : {"S3", "D4", "Q8", "Z/1", "Z/5", "Z/12"}) {
        auto g = FiniteGroupData::load(name);
        std::size_t sum = 0;
        for (const auto& r : g->irreps())
            sum += static_cast<std::size_t>(r.dim * r.dim);
        CHECK(sum == g->order());
    }
    CHECK_THROWS_AS(FiniteGroupData::load("Z/13"), PreconditionError);
    CHECK_THROWS_AS(FiniteGroupData::load("S3")->irrep("nope"), PreconditionError);
}

TEST_CASE("S3 table matches permutation composition")
{
    auto g = FiniteGroupData::load("S3");
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b)
            CHECK(perm_of(*g, g->mul(a, b)) == compose(perm_of(*g, a), perm_of(*g, b)));
}

TEST_CASE("isotypic projections on S3 are exact")
{
    auto g = FiniteGroupData::load("S3");
    const auto e = g->group()->identity();
    auto de = FunctionOnG::delta(g, e);

    auto triv = isotypic_project(de, "triv");
    for (const auto& v : triv.rational_values())
        CHECK(v == Rational(1, 6));

    // (d/|G|) chi(x) = (1/3) chi_std(x), from fixed points
    auto std_part = isotypic_project(de, "std");
    auto vals = std_part.rational_values();
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(vals[i] == Rational(chi_std(perm_of(*g, i)), 3));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_rational(g, rng);
        FunctionOnG sum = FunctionOnG::constant(g, 0);
        for (const auto& a : g->labels()) {
            auto pa = isotypic_project(f, a);
            CHECK(isotypic_project(pa, a) == pa);
            for (const auto& b : g->labels())
                if (a != b)
                    CHECK(isotypic_project(pa, b) == FunctionOnG::constant(g, 0));
            sum = sum + pa;
        }
        CHECK(sum == f);
    }
    CHECK_THROWS_AS(isotypic_project(de, "bogus"), PreconditionError);
}

TEST_CASE("fusion rules")
{
    auto g = FiniteGroupData::load("S3");
    auto std_std = fusion_decompose(*g, "std", "std");
    std::map<std::string, int> m(std_std.begin(), std_std.end());
    CHECK(m["triv"] == 1);
    CHECK(m["sgn"] == 1);
    CHECK(m["std"] == 1);
    for (const auto& l : g->labels()) {
        auto r = fusion_decompose(*g, l, "triv");
        for (const auto& [k, mult] : r)
            CHECK(mult == (k == l ? 1 : 0));
    }
    for (auto name : {"D4", "Q8", "S3"}) {
        auto h = FiniteGroupData::load(name);
        for (const auto& a : h->labels())
            for (const auto& b : h->labels()) {
                auto ab = fusion_decompose(*h, a, b), ba = fusion_decompose(*h, b, a);
                CHECK(ab == ba);
                int dim = 0;
                for (const auto& [k, mult] : ab)
                    dim += mult * h->irrep(k).dim;
                CHECK(dim == h->irrep(a).dim * h->irrep(b).dim);
            }
    }
    auto z = FiniteGroupData::load("Z/7");
    auto r = fusion_decompose(*z, "3", "6");
    for (const auto& [k, mult] : r)
        CHECK(mult == (k == "2" ? 1 : 0));
}

TEST_CASE("filtration of S3 and Z/m")
{
    auto g = FiniteGroupData::load("S3");
    auto s = make_label_set(*g, {"triv", "std"});
    CHECK(s.conjugate_closed);
    CHECK(s.contains_trivial);
    CHECK(filtration_sets(*g, s, 0).set.labels == std::set<std::string>{"triv"});
    CHECK(filtration_sets(*g, s, 1).set.labels == std::set<std::string>{"triv", "std"});
    auto full = filtration_sets(*g, s, 2);
    CHECK(full.set.labels == std::set<std::string>{"triv", "sgn", "std"});
    CHECK(full.stabilization_level == 2);
    CHECK(min_level_labels(*g, s, {"triv", "sgn", "std"}) == 2);

    CHECK_THROWS_AS(filtration_sets(*g, make_label_set(*g, {"triv", "sgn"}), 1), PreconditionError);

    auto z = FiniteGroupData::load("Z/9");
    auto zs = make_label_set(*z, {"0", "1", "8"});
    for (int n = 0; n <= 4; ++n) {
        std::set<std::string> expect;
        for (int k = -n; k <= n; ++k)
            expect.insert(std::to_string(((k % 9) + 9) % 9));
        CHECK(filtration_sets(*z, zs, n).set.labels == expect);
    }
}

TEST_CASE("Lipschitz constants and translation invariance on S3")
{
    auto g = FiniteGroupData::load("S3");
    auto de = FunctionOnG::delta(g, g->group()->identity());
    CHECK(lipschitz_constant_exact(de) == 1);
    CHECK(lipschitz_constant_exact(FunctionOnG::constant(g, 3)) == 0);

    auto lip = LipNormSpec::classical_lipschitz(g);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        auto f = random_rational(g, rng);
        CHECK(induced_lipnorm_translation_exact(f) == lipschitz_constant_exact(f));
        CHECK(induced_lipnorm_translation(lip, f) == doctest::Approx(lip_eval(lip, f).upper));
    }
}

TEST_CASE("homogeneous restriction on S3 / <(12)>")
{
    auto g = FiniteGroupData::load("S3");
    const auto& grp = *g->group();
    std::vector<GroupElement> h{grp.identity(), grp.parse("(12)")};
    auto rep = homogeneous_restriction_check(*g, h, 32, 5);
    CHECK(rep.basis_size == 3);
    CHECK(rep.max_discrepancy == 0);

    auto trivial = homogeneous_restriction_check(*g, {grp.identity()}, 4, 5);
    CHECK(trivial.basis_size == 6);
    CHECK(trivial.max_discrepancy == 0);

    auto whole = homogeneous_restriction_check(*g, g->elements(), 4, 5);
    CHECK(whole.basis_size == 1);
    for (const auto& [a, b] : whole.values) {
        CHECK(a == 0);
        CHECK(b == 0);
    }
    CHECK_THROWS_AS(homogeneous_restriction_check(*g, h, 4, 5, CosetOrientation::RightInvariant),
                    PreconditionError);
}
