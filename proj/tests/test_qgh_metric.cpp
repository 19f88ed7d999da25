#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <queue>

#include "qtrunc/errors.hpp"
#include "qtrunc/qgh_metric.hpp"

using namespace qtrunc;

namespace {

// State on C*(Z/2) with phi(g) = s, from the unit vector (cos a, sin a), sin 2a = s.
StateModel z2_state(const GroupPtr& z2, double s)
{
    const double a = 0.5 * std::asin(s);
    AlgebraElement xi(z2);
    xi.add(z2->parse("0"), std::cos(a));
    xi.add(z2->parse("1"), std::sin(a));
    return StateModel::from_vector(xi);
}

StateModel z2_exact_state(const GroupPtr& z2, const Rational& s)
{
    PositiveDefiniteKernel phi(z2, "phi");
    phi.set_exact_value(z2->parse("0"), Rational(1));
    phi.set_exact_value(z2->parse("1"), s);
    return StateModel::from_kernel(phi);
}

// Word metric of S3 under (12), (23) by BFS over permutations, d(x, y) = l(x^{-1} y).
using Perm = std::array<int, 3>;

std::map<Perm, int> s3_word_lengths()
{
    auto compose = [](const Perm& p, const Perm& q) { return Perm{p[q[0]], p[q[1]], p[q[2]]}; };
    const std::array<Perm, 2> gens{Perm{1, 0, 2}, Perm{0, 2, 1}};
    std::map<Perm, int> d{{Perm{0, 1, 2}, 0}};
    std::queue<Perm> q;
    q.push(Perm{0, 1, 2});
    while (!q.empty()) {
        Perm x = q.front();
        q.pop();
        for (const auto& s : gens) {
            Perm y = compose(x, s);
            if (!d.count(y)) {
                d[y] = d[x] + 1;
                q.push(y);
            }
        }
    }
    return d;
}

Perm lex_perm(std::size_t i)
{
    std::vector<Perm> lex;
    Perm p{0, 1, 2};
    do {
        lex.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return lex[i];
}

Perm inverse(const Perm& p)
{
    Perm r{};
    for (int i = 0; i < 3; ++i)
        r[p[i]] = i;
    return r;
}

}  // namespace

TEST_CASE("two-point model metric")
{
    auto z2 = make_group("Z/2");
    auto sys = TruncationSystem::group_algebra(z2, -1);
    auto lip = LipNormSpec::weighted_l1(z2);
    const std::vector<Rational> grid{Rational(-1), Rational(-1, 2), Rational(0), Rational(1, 3), Rational(1)};
    for (const auto& s : grid)
        for (const auto& t : grid) {
            auto m = state_metric(z2_exact_state(z2, s), z2_exact_state(z2, t), lip, sys);
            REQUIRE(m.exact);
            CHECK(*m.exact == (s > t ? Rational(s - t) : Rational(t - s)));
            CHECK(m.gap == 0.0);
        }
    for (double s : {-0.9, -0.2, 0.0, 0.4, 1.0})
        for (double t : {-1.0, 0.3, 0.7}) {
            auto m = state_metric(z2_state(z2, s), z2_state(z2, t), lip, sys);
            CHECK(m.value == doctest::Approx(std::abs(s - t)).epsilon(1e-12));
        }
    auto mu = z2_state(z2, 0.25);
    CHECK(state_metric(mu, mu, lip, sys).value == 0.0);

    // Dirac on Z/2 coincides with the two-point model
    auto d = state_metric(z2_state(z2, -0.5), z2_state(z2, 0.5), LipNormSpec::dirac_word_length(z2), sys);
    CHECK(d.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d.lower <= d.value + 1e-12);
}

TEST_CASE("Kantorovich recovers the word metric of S3")
{
    auto s3 = FiniteGroupData::load("S3");
    auto sys = TruncationSystem::classical_system(s3, make_label_set(*s3, {"triv", "std"}), 2);
    REQUIRE(sys.is_full());
    auto lip = LipNormSpec::classical_lipschitz(s3);
    auto lengths = s3_word_lengths();
    for (std::size_t x = 0; x < 6; ++x)
        for (std::size_t y = 0; y < 6; ++y) {
            const Perm px = lex_perm(static_cast<std::size_t>(s3->elements()[x].nf[0]));
            const Perm py = lex_perm(static_cast<std::size_t>(s3->elements()[y].nf[0]));
            Perm w{};
            const Perm ix = inverse(px);
            for (int i = 0; i < 3; ++i)
                w[i] = ix[py[i]];
            auto m = state_metric(StateModel::point_mass(s3, x), StateModel::point_mass(s3, y), lip, sys);
            REQUIRE(m.exact);
            CHECK(*m.exact == lengths.at(w));
        }
    // convex combinations: half-way mixtures
    std::vector<Rational> p(6, Rational(0)), q(6, Rational(0));
    p[0] = p[1] = Rational(1, 2);
    q[0] = 1;
    auto m = state_metric(StateModel::probability(s3, p), StateModel::probability(s3, q), lip, sys);
    CHECK(*m.exact == Rational(s3->distance(0, 1), 2));
    CHECK_THROWS_AS(StateModel::probability(s3, std::vector<Rational>(6, Rational(1))), PreconditionError);
    auto partial = TruncationSystem::classical_system(s3, make_label_set(*s3, {"triv", "std"}), 1);
    CHECK_THROWS_AS(state_metric(StateModel::point_mass(s3, 0), StateModel::point_mass(s3, 1), lip, partial),
                    PreconditionError);
}

TEST_CASE("metric axioms on a net of Fejer states")
{
    auto z = make_group("Z");
    auto sys = TruncationSystem::group_algebra(z, 4);
    std::vector<StateModel> net;
    for (int n : {1, 2, 3, 5})
        net.push_back(StateModel::from_kernel(fejer_kernel(z, n)));
    net.push_back(StateModel::from_kernel(counit_kernel(z)));
    for (const auto& lip : {LipNormSpec::weighted_l1(z), LipNormSpec::sobolev(z, 1.0), LipNormSpec::dirac_word_length(z)}) {
        const std::size_t n = net.size();
        std::vector<std::vector<MetricValue>> d(n, std::vector<MetricValue>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d[i][j] = state_metric(net[i], net[j], lip, sys);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(d[i][i].value == 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(d[i][j].value == doctest::Approx(d[j][i].value).epsilon(1e-6));
                CHECK(d[i][j].lower <= d[i][j].value + 1e-12);
                for (std::size_t k = 0; k < n; ++k)
                    CHECK(d[i][k].lower <= d[i][j].value + d[j][k].value + 1e-9);
            }
        }
    }
    // WeightedL1 on Z: d(phi_n, 1) = max_k (1 - phi_n(k)) / k = 1/n inside ball(4) for n <= 4
    auto lip = LipNormSpec::weighted_l1(z);
    auto m = state_metric(net[2], net[4], lip, sys);
    REQUIRE(m.exact);
    CHECK(*m.exact == Rational(1, 3));
    CHECK_THROWS_AS(state_metric(net[0], net[1], lip, TruncationSystem::group_algebra(z, -1)), PreconditionError);
}

TEST_CASE("Hausdorff distance of state nets")
{
    auto z2 = make_group("Z/2");
    auto sys = TruncationSystem::group_algebra(z2, -1);
    auto lip = LipNormSpec::weighted_l1(z2);
    std::vector<StateModel> a{z2_exact_state(z2, Rational(0))};
    std::vector<StateModel> b;
    for (int k = -4; k <= 4; ++k)
        b.push_back(z2_exact_state(z2, Rational(k, 4)));
    CHECK(hausdorff_state_distance(a, b, lip, sys) == doctest::Approx(1.0));
    CHECK(hausdorff_state_distance(b, b, lip, sys) == 0.0);
    auto bigger = b;
    bigger.push_back(z2_exact_state(z2, Rational(1, 7)));
    // b -> bigger is zero; 1/7 is 3/28 from its nearest grid point 1/4
    CHECK(hausdorff_state_distance(b, bigger, lip, sys) == doctest::Approx(3.0 / 28.0));
    CHECK(hausdorff_state_distance(bigger, bigger, lip, sys) == 0.0);
    CHECK_THROWS_AS(hausdorff_state_distance({}, b, lip, sys), PreconditionError);
}

TEST_CASE("distq certificates")
{
    auto z = make_group("Z");
    auto lip = LipNormSpec::weighted_l1(z);
    double prev = 2.0;
    for (int n = 0; n <= 8; ++n) {
        auto c = distq_certificate(TruncationSystem::group_algebra(z, n), fejer_kernel(z, n + 1), lip);
        REQUIRE(c.upper_exact);
        CHECK(*c.upper_exact == Rational(1, n + 1));
        CHECK(c.upper < prev);
        prev = c.upper;
        CHECK(c.lower <= c.upper);
        CHECK(c.hypothesis.samples == DistqOptions{}.samples);
        CHECK(c.hypothesis.max_violation <= 1e-9);
        auto j = c.to_json(*z);
        for (auto key : {"system", "level", "lipnorm", "kernel", "upper", "lower", "gap", "hypothesis_check"})
            CHECK(j.contains(key));
        CHECK(j["hypothesis_check"].contains("max_violation"));
    }
    CHECK_THROWS_AS(distq_certificate(TruncationSystem::group_algebra(z, 2), fejer_kernel(z, 4), lip),
                    PreconditionError);

    // Z/2 with the Haar projection onto C1: both bounds equal one
    auto z2 = make_group("Z/2");
    auto haar = folner_kernel(z2, {z2->identity()}, "haar");
    auto c2 = distq_certificate(TruncationSystem::group_algebra(z2, 0), haar, LipNormSpec::weighted_l1(z2));
    REQUIRE(c2.upper_exact);
    REQUIRE(c2.lower_exact);
    CHECK(*c2.upper_exact == 1);
    CHECK(*c2.lower_exact == 1);
    CHECK(c2.gap == 0.0);

    // phi == 1 at full level of a finite group
    auto z6 = make_group("Z/6");
    for (const auto& l6 : {LipNormSpec::weighted_l1(z6), LipNormSpec::dirac_word_length(z6)}) {
        auto c6 = distq_certificate(TruncationSystem::group_algebra(z6, -1), counit_kernel(z6), l6);
        CHECK(c6.upper == 0.0);
        CHECK(c6.lower == 0.0);
    }
    CHECK_THROWS_AS(distq_certificate(TruncationSystem::group_algebra(z, 3), counit_kernel(z), lip), PreconditionError);

    // DiracCircle: decreasing, and within 2(1 + ln n)/n
    auto circ = LipNormSpec::dirac_circle(z);
    prev = 10.0;
    for (int n = 1; n <= 4; ++n) {
        DistqOptions opt;
        opt.samples = 8;
        auto c = distq_certificate(TruncationSystem::group_algebra(z, n), fejer_kernel(z, n + 1), circ, opt);
        CHECK(c.upper < prev);
        CHECK(c.upper <= 2.0 * (1.0 + std::log(static_cast<double>(n))) / n);
        CHECK(c.lower <= c.upper);
        CHECK(c.hypothesis.max_violation <= 1e-9);
        prev = c.upper;
    }
}

TEST_CASE("approximation by vector states")
{
    auto z = make_group("Z");
    auto lip = LipNormSpec::weighted_l1(z);
    auto counit_state = StateModel::from_kernel(counit_kernel(z), "counit");
    for (int n : {2, 3, 5}) {
        auto r = approximate_state(counit_state, 1.0, lip, TruncationSystem::group_algebra(z, n + 2), n);
        CHECK(r.deviation == doctest::Approx(1.0 / n).epsilon(1e-9));
        CHECK(r.success == (1.0 / n <= 0.5 + 1e-12));
        CHECK(r.net_size > 0);
        CHECK_FALSE(approximate_state(counit_state, 1.0 / n, lip, TruncationSystem::group_algebra(z, n + 2), n).success);
    }

    auto z2 = make_group("Z/2");
    auto sys2 = TruncationSystem::group_algebra(z2, -1);
    auto r2 = approximate_state(StateModel::from_kernel(counit_kernel(z2)), 0.01, LipNormSpec::weighted_l1(z2), sys2, 2);
    CHECK(r2.deviation <= 1e-12);
    CHECK(r2.success);

    // a state already among the candidates
    auto target = StateModel::from_kernel(folner_ball_kernel(make_group("Z^2"), 1));
    auto g2 = make_group("Z^2");
    auto r3 = approximate_state(target, 0.01, LipNormSpec::weighted_l1(g2), TruncationSystem::group_algebra(g2, 2), 5);
    CHECK(r3.deviation <= 1e-12);
    CHECK_THROWS_AS(approximate_state(target, 0.0, LipNormSpec::weighted_l1(g2), TruncationSystem::group_algebra(g2, 2), 5),
                    PreconditionError);
}
