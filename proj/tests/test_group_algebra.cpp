#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qtrunc/errors.hpp"
#include "qtrunc/group_algebra.hpp"

using namespace qtrunc;

namespace {

AlgebraElement random_element(const GroupPtr& g, int radius, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    AlgebraElement a(g);
    for (const auto& x : g->enumerate_ball(radius))
        a.add(x, Complex(u(rng), u(rng)));
    return a;
}

bool close(const AlgebraElement& a, const AlgebraElement& b, double tol)
{
    AlgebraElement d = a - b;
    for (const auto& [x, c] : d.terms())
        if (std::abs(c) > tol)
            return false;
    return true;
}

// (a*b)(z) by a plain double loop over the coefficient vectors.
AlgebraElement convolve_oracle(const AlgebraElement& a, const AlgebraElement& b)
{
    std::vector<std::pair<GroupElement, Complex>> ta(a.terms().begin(), a.terms().end());
    std::vector<std::pair<GroupElement, Complex>> tb(b.terms().begin(), b.terms().end());
    std::map<GroupElement, Complex> out;
    for (const auto& [x, cx] : ta)
        for (const auto& [y, cy] : tb)
            out[a.group()->multiply(x, y)] += cx * cy;
    AlgebraElement r(a.group());
    for (const auto& [z, c] : out)
        r.add(z, c);
    return r;
}

}  // namespace

TEST_CASE("convolution")
{
    auto z = make_group("Z");
    auto d1 = AlgebraElement::delta(z, {1}), d2 = AlgebraElement::delta(z, {2});
    CHECK(convolve(d1, d2) == AlgebraElement::delta(z, {3}));

    for (const auto& name : {"Z", "Z^2", "Z/6"}) {
        auto g = make_group(name);
        GroupElement x = g->enumerate_ball(1).back();
        auto e = AlgebraElement::unit(g), dx = AlgebraElement::delta(g, x);
        auto lhs = convolve(e + dx, e - dx);
        auto rhs = e - AlgebraElement::delta(g, g->multiply(x, x));
        CHECK(close(lhs, rhs, 0.0));
    }

    auto z2 = make_group("Z^2");
    std::mt19937_64 rng(7);
    for (int t = 0; t < 5; ++t) {
        auto a = random_element(z2, 2, rng), b = random_element(z2, 2, rng), c = random_element(z2, 2, rng);
        CHECK(close(convolve(convolve(a, b), c), convolve(a, convolve(b, c)), 1e-12));
        CHECK(close(convolve(a, b), convolve_oracle(a, b), 1e-14));
    }
    CHECK_THROWS_AS(convolve(d1, AlgebraElement::unit(z2)), StructuralError);
}

TEST_CASE("involution")
{
    auto z = make_group("Z");
    auto a = AlgebraElement::delta(z, {1}, 2.0);
    CHECK(involution(a) == AlgebraElement::delta(z, {-1}, 2.0));
    std::mt19937_64 rng(11);
    for (const auto& name : {"H3", "S3", "Z^2"}) {
        auto g = make_group(name);
        auto x = random_element(g, 2, rng), y = random_element(g, 2, rng);
        CHECK(close(involution(convolve(x, y)), convolve(involution(y), involution(x)), 1e-12));
        CHECK(involution(involution(x)) == x);
        CHECK(is_self_adjoint(symmetrize(x), 1e-15));
    }
}

TEST_CASE("Haar state and counit")
{
    auto h3 = make_group("H3");
    CHECK(haar_state(AlgebraElement::unit(h3)) == Complex(1.0));
    CHECK(haar_state(AlgebraElement::delta(h3, {1, 0, 0})) == Complex(0.0));
    auto z = make_group("Z");
    CHECK(counit(AlgebraElement::delta(z, {1}) - AlgebraElement::delta(z, {0})) == Complex(0.0));
    std::mt19937_64 rng(3);
    for (const auto& name : {"H3", "D4", "Z^2"}) {
        auto g = make_group(name);
        auto a = random_element(g, 2, rng), b = random_element(g, 2, rng);
        CHECK(counit(AlgebraElement::delta(g, g->enumerate_ball(1).back())) == Complex(1.0));
        CHECK(std::abs(counit(convolve(a, b)) - counit(a) * counit(b)) < 1e-11);
        Complex hs = haar_state(convolve(involution(a), a));
        CHECK(std::abs(hs.imag()) < 1e-12);
        CHECK(hs.real() == doctest::Approx(a.l2_norm() * a.l2_norm()).epsilon(1e-12));
        CHECK(std::abs(haar_state(convolve(a, b)) - haar_state(convolve(b, a))) < 1e-12);
    }
}

TEST_CASE("path-graph norm against a dense eigensolver")
{
    auto z = make_group("Z");
    auto a = AlgebraElement::delta(z, {1}) + AlgebraElement::delta(z, {-1});
    double prev = 0.0;
    for (int n = 1; n <= 12; ++n) {
        auto est = operator_norm_window(a, n);
        double ref = oracle::path_graph_top_eigenvalue(2 * n + 1);
        CHECK(est.lower == doctest::Approx(ref).epsilon(1e-12));
        CHECK(est.lower == doctest::Approx(2.0 * std::cos(std::numbers::pi / (2 * n + 2))).epsilon(1e-12));
        CHECK(est.upper == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(est.upper >= 2.0);
        CHECK(est.lower >= prev - 1e-14);
        prev = est.lower;
    }
    CHECK_THROWS_AS(operator_norm_window(a * Complex(1.0) + AlgebraElement::delta(z, {3}), 2), PreconditionError);
}

TEST_CASE("monomials and scalars")
{
    for (const auto& name : {"Z^2", "H3", "S3"}) {
        auto g = make_group(name);
        for (const auto& x : g->enumerate_ball(2)) {
            auto est = operator_norm_window(AlgebraElement::delta(g, x), 3);
            CHECK(est.lower == 1.0);
            CHECK(est.upper == 1.0);
        }
        auto est = operator_norm_window(AlgebraElement::unit(g) * Complex(3.0), 0);
        CHECK(est.lower == 3.0);
        CHECK(est.upper == 3.0);
    }
}

TEST_CASE("window estimates: monotone, bracketed, C*-identity")
{
    std::mt19937_64 rng(5);
    for (const auto& name : {"Z^2", "H3", "D4", "Z/6"}) {
        auto g = make_group(name);
        auto a = random_element(g, 1, rng);
        double prev = 0.0;
        for (int w = 1; w <= 5; ++w) {
            auto est = operator_norm_window(a, w);
            CHECK(est.lower <= est.upper);
            CHECK(est.upper <= a.l1_norm());
            CHECK(est.lower >= prev - 1e-9);
            prev = est.lower;
        }
        auto sa = convolve(involution(a), a);
        for (int w = 2; w <= 4; ++w)
            CHECK(operator_norm_window(sa, w).lower >= std::pow(operator_norm_window(a, w).lower, 2) - 1e-6);
    }
}

TEST_CASE("power iteration agrees with the dense solver")
{
    std::mt19937_64 rng(9);
    auto g = make_group("Z^2");
    auto a = random_element(g, 2, rng);
    NormOptions dense;
    NormOptions sparse;
    sparse.dense_limit = 0;
    auto d = operator_norm_window(a, 8, dense);
    auto s = operator_norm_window(a, 8, sparse);
    CHECK(d.method == "dense");
    CHECK(s.method == "power-iteration");
    CHECK(s.lower == doctest::Approx(d.lower).epsilon(1e-6));
    CHECK(s.lower <= d.lower + 1e-12);
}

TEST_CASE("Fourier upper bound on abelian groups")
{
    auto c6 = make_group("Z/6");
    auto a = AlgebraElement::delta(c6, {1}) + AlgebraElement::delta(c6, {5});
    CHECK(*abelian_norm_upper(a) == doctest::Approx(2.0).epsilon(1e-12));
    auto b = AlgebraElement::delta(c6, {0}) - AlgebraElement::delta(c6, {3});
    CHECK(*abelian_norm_upper(b) == doctest::Approx(2.0).epsilon(1e-12));
    // full regular representation on a finite group is exact
    auto est = operator_norm_window(a, 3);
    CHECK(est.upper - est.lower < 1e-12);
    CHECK_FALSE(abelian_norm_upper(AlgebraElement::unit(make_group("H3"))).has_value());
}

TEST_CASE("Fourier bound on Z and Z^2 against a fine direct grid")
{
    std::mt19937_64 rng(17);
    // sup |sum_k a(k) e^{i k.theta}| sampled directly on a much finer grid (a lower bound)
    auto fine_sup = [](const AlgebraElement& a, int d, int m) {
        double best = 0.0;
        const double h = 2.0 * std::numbers::pi / m;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < (d == 1 ? 1 : m); ++j) {
                Complex f = 0.0;
                for (const auto& [x, c] : a.terms())
                    f += c * std::polar(1.0, h * (i * static_cast<double>(x.nf[0]) +
                                                  (d == 1 ? 0.0 : j * static_cast<double>(x.nf[1]))));
                best = std::max(best, std::abs(f));
            }
        return best;
    };
    auto z = make_group("Z");
    for (int radius : {1, 2, 20, 60}) {
        auto a = random_element(z, radius, rng);
        for (const auto& b : {a, symmetrize(a)}) {
            const double oracle = fine_sup(b, 1, 1 << 15);
            const double upper = *abelian_norm_upper(b);
            CHECK(oracle <= upper + 1e-12);
            CHECK(upper <= oracle * 1.02 + 1e-12);
            CHECK(operator_norm_upper(b) == upper);
        }
    }
    auto z2 = make_group("Z^2");
    for (int radius : {1, 3}) {
        auto a = random_element(z2, radius, rng);
        for (const auto& b : {a, symmetrize(a)}) {
            const double oracle = fine_sup(b, 2, 512);
            const double upper = *abelian_norm_upper(b);
            CHECK(oracle <= upper + 1e-12);
            CHECK(upper <= oracle * 1.02 + 1e-12);
        }
    }
}

TEST_CASE("matrix-free norm upper bound")
{
    auto h3 = make_group("H3");
    CHECK(operator_norm_upper(AlgebraElement(h3)) == 0.0);
    CHECK(operator_norm_upper(AlgebraElement::unit(h3) * Complex(0.0, -3.0)) == 3.0);
    std::mt19937_64 rng(4);
    auto a = random_element(h3, 2, rng);
    CHECK(operator_norm_upper(a) == doctest::Approx(a.l1_norm()));
    CHECK(operator_norm_upper(a) >= operator_norm_window(a, 4).lower);
    auto d4 = make_group("D4");
    auto b = random_element(d4, 2, rng);
    CHECK(operator_norm_upper(b) == operator_norm_window(b, d4->diameter()).upper);
}

TEST_CASE("quotient norm lower bound")
{
    auto z = make_group("Z");
    auto a = AlgebraElement::delta(z, {1}) + AlgebraElement::delta(z, {-1});
    // spectrum [-2, 2]
    CHECK(quotient_norm_lower(a, 1) == doctest::Approx(2.0).epsilon(1e-9));
    auto c2 = make_group("Z/2");
    CHECK(quotient_norm_lower(AlgebraElement::delta(c2, {1}), 1) == doctest::Approx(1.0));
}

TEST_CASE("vector state kernels")
{
    auto z = make_group("Z");
    auto k0 = vector_state_kernel(AlgebraElement::unit(z));
    CHECK(k0.support() == std::vector<GroupElement>{{0}});
    CHECK(k0.value({0}) == Complex(1.0));

    for (int n = 1; n <= 6; ++n) {
        AlgebraElement xi(z);
        for (int x = 0; x < n; ++x)
            xi.add({x}, 1.0 / std::sqrt(static_cast<double>(n)));
        auto k = vector_state_kernel(xi);
        for (long t = -n - 1; t <= n + 1; ++t)
            CHECK(k.value({t}).real() == doctest::Approx(oracle::fejer_overlap(n, t)).epsilon(1e-14));
    }

    auto c2 = make_group("Z/2");
    AlgebraElement xi(c2);
    xi.add({0}, 1.0 / std::sqrt(2.0));
    xi.add({1}, 1.0 / std::sqrt(2.0));
    auto k = vector_state_kernel(xi);
    CHECK(k.value({0}).real() == doctest::Approx(1.0));
    CHECK(k.value({1}).real() == doctest::Approx(1.0));

    CHECK_THROWS_AS(vector_state_kernel(AlgebraElement::delta(z, {0}, 2.0)), PreconditionError);
}

TEST_CASE("vector state kernels are positive definite")
{
    std::mt19937_64 rng(13);
    for (const auto& name : {"Z^2", "H3", "D4"}) {
        auto g = make_group(name);
        auto xi = random_element(g, 1, rng);
        xi = xi * Complex(1.0 / xi.l2_norm());
        auto k = vector_state_kernel(xi);
        CHECK(std::abs(k.value(g->identity()) - 1.0) < 1e-12);
        auto ball = g->enumerate_ball(3);
        Eigen::MatrixXcd gram(ball.size(), ball.size());
        for (std::size_t i = 0; i < ball.size(); ++i)
            for (std::size_t j = 0; j < ball.size(); ++j) {
                gram(i, j) = k.value(g->multiply(g->inverse(ball[i]), ball[j]));
                CHECK(std::abs(gram(i, j)) <= 1.0 + 1e-12);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("JSON round trip")
{
    auto h = make_group("H3");
    std::mt19937_64 rng(1);
    auto a = random_element(h, 2, rng);
    auto j = a.to_json();
    CHECK(AlgebraElement::from_json(j, h) == a);
    CHECK_THROWS_AS(AlgebraElement::from_json(j, make_group("Z^3")), StructuralError);
}
