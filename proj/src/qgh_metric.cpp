#include "qtrunc/qgh_metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "qtrunc/cyclotomic.hpp"
#include "qtrunc/errors.hpp"
#include "qtrunc/lp.hpp"

namespace qtrunc {

namespace {

bool is_integers(const Group& g)
{
    return g.id().family == Family::FreeAbelian && g.id().parameter == 1 && g.id().default_generators;
}

// Finite level of a group-algebra system; the full algebra of a finite group maps to its diameter.
int finite_level(const TruncationSystem& sys)
{
    if (sys.is_classical())
        throw PreconditionError("expected a group algebra truncation, got " + sys.id());
    const Group& g = *sys.group;
    if (sys.level >= 0)
        return g.is_finite() ? std::min(sys.level, g.diameter()) : sys.level;
    if (g.is_finite())
        return g.diameter();
    throw PreconditionError("the full algebra of " + g.name() + " has no finite-dimensional state program");
}

void require_same(const GroupPtr& a, const GroupPtr& b, const char* what)
{
    if (a->name() != b->name())
        throw StructuralError(fmt::format("{} on {} paired with {}", what, a->name(), b->name()));
}

// Canonical representatives x <= x^{-1} of the non-identity elements of ball(level).
std::vector<GroupElement> pair_representatives(const Group& g, int level)
{
    std::vector<GroupElement> reps;
    for (const auto& x : g.ball_index(level)->elements)
        if (!g.is_identity(x) && !(g.inverse(x) < x))
            reps.push_back(x);
    return reps;
}

MetricValue kantorovich(const StateModel& mu, const StateModel& nu, const TruncationSystem& sys)
{
    const auto& fg = *mu.classical();
    if (fg.group()->name() != nu.classical()->group()->name() || fg.group()->name() != sys.classical->group()->name())
        throw StructuralError("classical states on different groups");
    if (!sys.is_full())
        throw PreconditionError("classical state metrics are implemented on the full C(G) only");
    const std::size_t n = fg.order();
    // max sum (mu - nu)(x) f(x) s.t. f(x) - f(y) <= d(x, y), f(e) = 0
    std::vector<std::vector<Rational>> G;
    std::vector<Rational> h, c(n);
    for (std::size_t x = 0; x < n; ++x)
        c[x] = mu.probabilities()[x] - nu.probabilities()[x];
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (x != y) {
                std::vector<Rational> row(n, Rational(0));
                row[x] = 1;
                row[y] = -1;
                G.push_back(std::move(row));
                h.emplace_back(fg.distance(x, y));
            }
    const std::size_t e = fg.index_of(fg.group()->identity());
    for (int sgn : {1, -1}) {
        std::vector<Rational> row(n, Rational(0));
        row[e] = sgn;
        G.push_back(std::move(row));
        h.emplace_back(0);
    }
    auto lp = solve_max_inequality<Rational>(G, h, c);
    if (lp.status != LpStatus::Optimal)
        throw ConvergenceError(std::string("Kantorovich LP: ") + to_string(lp.status));
    MetricValue m;
    m.exact = lp.objective;
    m.value = m.lower = lp.objective.convert_to<double>();
    m.method = "LP";
    return m;
}

// Exact WeightedL1 program over the real pair basis: a = sum_k t_k (delta_x + delta_{x^-1}).
std::optional<Rational> weighted_l1_lp(const Group& g, const std::vector<GroupElement>& reps,
                                       const PositiveDefiniteKernel& p, const PositiveDefiniteKernel& q)
{
    if (reps.size() > 64 || !p.has_exact_values() || !q.has_exact_values())
        return std::nullopt;
    const std::size_t k = reps.size();
    std::vector<Rational> obj(2 * k), cost(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        auto a = p.is_constant_one() ? std::optional<Rational>(1) : p.exact_value(reps[i]);
        auto b = q.is_constant_one() ? std::optional<Rational>(1) : q.exact_value(reps[i]);
        if (!a || !b)
            return std::nullopt;
        const int mult = g.inverse(reps[i]) == reps[i] ? 1 : 2;
        obj[i] = Rational(mult) * (*a - *b);
        obj[k + i] = -obj[i];
        cost[i] = cost[k + i] = Rational(mult * g.word_length(reps[i]));
    }
    std::vector<std::vector<Rational>> G{cost};
    std::vector<Rational> h{Rational(1)};
    for (std::size_t j = 0; j < 2 * k; ++j) {
        std::vector<Rational> row(2 * k, Rational(0));
        row[j] = -1;
        G.push_back(std::move(row));
        h.emplace_back(0);
    }
    auto lp = solve_max_inequality<Rational>(G, h, obj);
    if (lp.status != LpStatus::Optimal)
        throw ConvergenceError(std::string("state metric LP: ") + to_string(lp.status));
    return lp.objective;
}

AlgebraElement random_self_adjoint(const GroupPtr& gp, int radius, std::mt19937_64& rng)
{
    const Group& g = *gp;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    AlgebraElement a(gp);
    for (const auto& x : g.ball_index(radius)->elements) {
        GroupElement xi = g.inverse(x);
        if (xi < x)
            continue;
        Complex c(u(rng), xi == x ? 0.0 : u(rng));
        a.add(x, c);
        if (xi != x)
            a.add(xi, std::conj(c));
    }
    return a;
}

int dirac_eval_window(const LipNormSpec& lip, const NormEstimate& e)
{
    return lip.family == LipFamily::DiracWordLength ? e.window : -1;
}

}  // namespace

// ---------------------------------------------------------------------------
// states

StateModel StateModel::from_kernel(PositiveDefiniteKernel phi, std::string tag)
{
    StateModel s;
    s.kernel_ = std::move(phi);
    s.tag_ = std::move(tag);
    return s;
}

StateModel StateModel::from_vector(const AlgebraElement& xi, std::string tag)
{
    const double n = xi.l2_norm();
    if (n == 0.0)
        throw PreconditionError("vector state of the zero vector");
    return from_kernel(vector_state_kernel(xi * Complex(1.0 / n), tag), tag);
}

StateModel StateModel::point_mass(FiniteGroupPtr g, std::size_t index)
{
    if (index >= g->order())
        throw StructuralError("point mass index out of range");
    std::vector<Rational> p(g->order(), Rational(0));
    p[index] = 1;
    return probability(std::move(g), std::move(p), "extreme");
}

StateModel StateModel::probability(FiniteGroupPtr g, std::vector<Rational> p, std::string tag)
{
    if (p.size() != g->order())
        throw StructuralError(fmt::format("probability vector of length {} on a group of order {}", p.size(), g->order()));
    Rational total = 0;
    for (const auto& v : p) {
        if (v < 0)
            throw PreconditionError("probability vector has a negative entry");
        total += v;
    }
    if (total != 1)
        throw PreconditionError("probability vector does not sum to one");
    StateModel s;
    s.classical_ = std::move(g);
    s.p_ = std::move(p);
    s.tag_ = std::move(tag);
    return s;
}

const PositiveDefiniteKernel& StateModel::kernel() const
{
    if (!kernel_)
        throw PreconditionError("classical state has no kernel");
    return *kernel_;
}

Complex StateModel::evaluate(const AlgebraElement& a) const
{
    const auto& phi = kernel();
    require_same(phi.group(), a.group(), "state");
    if (phi.is_constant_one())
        return counit(a);
    Complex s = 0.0;
    for (const auto& [x, c] : a.terms())
        s += c * phi.value(x);
    return s;
}

Rational StateModel::evaluate_exact(const FunctionOnG& f) const
{
    if (!classical_)
        throw PreconditionError("exact evaluation needs a classical state");
    auto v = f.rational_values();
    Rational s = 0;
    for (std::size_t x = 0; x < p_.size(); ++x)
        s += p_[x] * v[x];
    return s;
}

std::string StateModel::describe() const
{
    if (kernel_)
        return tag_ + ":" + kernel_->name();
    std::string s = tag_ + ":[";
    for (std::size_t i = 0; i < p_.size(); ++i)
        s += (i ? "," : "") + rational_to_string(p_[i]);
    return s + "]";
}

// ---------------------------------------------------------------------------
// metrics

MetricValue state_metric(const StateModel& mu, const StateModel& nu, const LipNormSpec& lip,
                         const TruncationSystem& system, const DualNormOptions& opt)
{
    if (mu.is_classical() != nu.is_classical())
        throw StructuralError("cannot compare a classical state with a group algebra state");
    if (mu.is_classical()) {
        if (lip.family != LipFamily::ClassicalLipschitz || !system.is_classical())
            throw StructuralError("classical states need ClassicalLipschitz on a classical system");
        return kantorovich(mu, nu, system);
    }
    if (lip.family == LipFamily::ClassicalLipschitz)
        throw StructuralError("ClassicalLipschitz paired with group algebra states");
    require_same(mu.kernel().group(), nu.kernel().group(), "state");
    require_same(mu.kernel().group(), system.group, "state");
    require_same(lip.group, system.group, "Lip-norm");
    const Group& g = *system.group;
    const int level = finite_level(system);

    const auto reps = pair_representatives(g, level);
    std::map<GroupElement, Complex> c;
    bool zero = true;
    for (const auto& x : reps) {
        for (const auto& y : {x, g.inverse(x)}) {
            Complex v = (mu.kernel().is_constant_one() ? Complex(1.0) : mu.kernel().value(y)) -
                        (nu.kernel().is_constant_one() ? Complex(1.0) : nu.kernel().value(y));
            if (v != Complex(0.0)) {
                c[y] = v;
                zero = false;
            }
        }
    }
    MetricValue m;
    if (zero) {
        m.exact = Rational(0);
        m.method = "closed-form";
        return m;
    }
    if (lip.family == LipFamily::WeightedL1) {
        if (auto v = weighted_l1_lp(g, reps, mu.kernel(), nu.kernel())) {
            m.exact = *v;
            m.value = m.lower = v->convert_to<double>();
            m.method = "LP";
            return m;
        }
    }
    auto d = lip_dual_norm(lip, c, level, opt);
    m.value = d.upper;
    m.lower = d.lower;
    m.gap = std::max(0.0, d.upper - d.lower);
    m.method = d.method;
    return m;
}

double hausdorff_state_distance(const std::vector<StateModel>& a, const std::vector<StateModel>& b,
                                const LipNormSpec& lip, const TruncationSystem& system)
{
    if (a.empty() || b.empty())
        throw PreconditionError("Hausdorff distance of an empty net");
    std::vector<std::vector<double>> d(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            d[i][j] = state_metric(a[i], b[j], lip, system).value;
    double ab = 0.0, ba = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        ab = std::max(ab, *std::min_element(d[i].begin(), d[i].end()));
    for (std::size_t j = 0; j < b.size(); ++j) {
        double best = d[0][j];
        for (std::size_t i = 1; i < a.size(); ++i)
            best = std::min(best, d[i][j]);
        ba = std::max(ba, best);
    }
    return std::max(ab, ba);
}

// ---------------------------------------------------------------------------
// certificates

nlohmann::json DistqCertificate::to_json(const Group& g) const
{
    auto exact = [](const std::optional<Rational>& r) {
        return r ? nlohmann::json(rational_to_string(*r)) : nlohmann::json();
    };
    auto radius = [&](const RadiusEstimate& r) {
        return nlohmann::json{{"level", r.level}, {"lower", r.lower}, {"upper", r.upper},
                              {"exact", exact(r.exact)}, {"method", r.method}};
    };
    nlohmann::json j;
    j["system"] = system;
    j["level"] = level;
    j["lipnorm"] = lipnorm;
    j["kernel"] = kernel;
    j["upper"] = upper;
    j["lower"] = lower;
    j["gap"] = gap;
    j["upper_exact"] = exact(upper_exact);
    j["lower_exact"] = exact(lower_exact);
    j["hypothesis_check"] = {{"samples", hypothesis.samples},
                             {"max_violation", hypothesis.max_violation},
                             {"sample_radius", hypothesis.sample_radius},
                             {"invariance_violation", hypothesis.invariance_violation},
                             {"norm_violation", hypothesis.norm_violation}};
    j["epsilon"] = epsilon.to_json(g);
    j["radius_level"] = radius(radius_level);
    j["radius_full"] = radius(radius_full);
    return j;
}

DistqCertificate distq_certificate(const TruncationSystem& system, const PositiveDefiniteKernel& phi,
                                   const LipNormSpec& lip, const DistqOptions& opt)
{
    if (system.is_classical())
        throw PreconditionError("distq certificates are implemented for group algebra truncations");
    require_same(phi.group(), system.group, "kernel");
    require_same(lip.group, system.group, "Lip-norm");
    const Group& g = *system.group;
    const int level = finite_level(system);

    const auto support = phi.is_constant_one() && !g.is_finite() ? std::vector<GroupElement>{} : phi.support();
    const int need = phi.is_constant_one() && !g.is_finite() ? -1 : min_level(g, support);
    if (need < 0 || need > level)
        throw PreconditionError(fmt::format("F ⊄ S^N: the kernel support needs level {} but the system has N = {}",
                                            need < 0 ? std::string("infinity") : std::to_string(need), level));

    DistqCertificate cert;
    cert.system = system.id();
    cert.level = level;
    cert.lipnorm = lip.id();
    cert.kernel = phi.name();
    cert.epsilon = epsilon_of_kernel(phi, lip, -1, opt.dual);
    cert.upper = cert.epsilon.epsilon;
    cert.upper_exact = cert.epsilon.exact;

    // re-check L(P a) <= L(a) and ||a - P a|| <= eps L(a) on random elements
    auto& hc = cert.hypothesis;
    hc.sample_radius = cert.epsilon.window_relative ? cert.epsilon.window : level + 2;
    if (g.is_finite())
        hc.sample_radius = std::min(hc.sample_radius, g.diameter());
    hc.sample_radius = std::max(hc.sample_radius, 1);
    std::mt19937_64 rng(opt.seed);
    for (std::size_t t = 0; t < opt.samples; ++t) {
        auto a = random_self_adjoint(system.group, hc.sample_radius, rng);
        auto pa = fejer_operator(phi, a);
        auto la = lip_eval(lip, a);
        auto lpa = lip_eval(lip, pa, dirac_eval_window(lip, la));
        double inv = lpa.lower - la.lower;
        double nrm = operator_norm_upper(a - pa) - cert.upper * la.upper;
        hc.invariance_violation = std::max(hc.invariance_violation, inv);
        hc.norm_violation = std::max(hc.norm_violation, nrm);
        ++hc.samples;
    }
    hc.max_violation = std::max({0.0, hc.invariance_violation, hc.norm_violation});

    cert.radius_level = radius_estimate(lip, level, opt.radius);
    cert.radius_full = radius_estimate(lip, -1, opt.radius);
    const auto& rn = cert.radius_level;
    const auto& rf = cert.radius_full;
    cert.lower = std::max({0.0, rf.lower - rn.upper, rn.lower - rf.upper});
    if (rn.exact && rf.exact) {
        Rational d = *rn.exact - *rf.exact;
        cert.lower_exact = d < 0 ? Rational(-d) : d;
        cert.lower = cert.lower_exact->convert_to<double>();
    }
    if (cert.lower > cert.upper + 1e-12)
        throw ConvergenceError(fmt::format("inconsistent certificate for {}: lower {} exceeds upper {}", cert.system,
                                           cert.lower, cert.upper));
    cert.gap = std::max(0.0, cert.upper - cert.lower);
    return cert;
}

// ---------------------------------------------------------------------------
// approximation by vector states

ApproximationResult approximate_state(const StateModel& mu, double eps_target, const LipNormSpec& lip,
                                      const TruncationSystem& system, int budget, const ApproximationOptions& opt)
{
    if (!(eps_target > 0.0))
        throw PreconditionError("approximation target must be positive");
    if (budget < 1)
        throw PreconditionError("approximation budget must be at least one point");
    if (mu.is_classical())
        throw PreconditionError("approximation by vector states needs a group algebra state");
    const GroupPtr& gp = system.group;
    const int level = finite_level(system);
    require_same(mu.kernel().group(), gp, "state");
    require_same(lip.group, gp, "Lip-norm");
    const Group& g = *gp;

    // net: coordinate directions and random elements, scaled to L = 1
    std::vector<AlgebraElement> net;
    auto push = [&](AlgebraElement a) {
        const double l = lip_eval(lip, a).upper;
        if (l > 0.0)
            net.push_back(a * Complex(1.0 / l));
    };
    for (const auto& x : pair_representatives(g, level)) {
        const GroupElement xi = g.inverse(x);
        if (xi == x) {
            push(AlgebraElement::delta(gp, x));
            continue;
        }
        push(AlgebraElement::delta(gp, x) + AlgebraElement::delta(gp, xi));
        push(AlgebraElement::delta(gp, x, Complex(0.0, 1.0)) + AlgebraElement::delta(gp, xi, Complex(0.0, -1.0)));
    }
    std::mt19937_64 rng(opt.seed);
    for (std::size_t k = 0; k < opt.random_directions; ++k)
        push(random_self_adjoint(gp, level, rng));

    // candidates
    std::vector<PositiveDefiniteKernel> cands;
    if (is_integers(g)) {
        for (int m = 1; m <= budget; ++m) {
            std::vector<GroupElement> f;
            for (long k = 0; k < m; ++k)
                f.push_back(GroupElement{k});
            cands.push_back(folner_kernel(gp, f, fmt::format("folner[0,{}]", m - 1)));
        }
    } else {
        for (int r = 0;; ++r) {
            auto ball = g.enumerate_ball(r);
            if (static_cast<int>(ball.size()) > budget)
                break;
            cands.push_back(folner_kernel(gp, ball, fmt::format("folner-ball({})", r)));
            if (g.is_finite() && r >= g.diameter())
                break;
        }
    }
    for (std::size_t k = 0; k < opt.extra_vectors.size(); ++k) {
        const auto& xi = opt.extra_vectors[k];
        require_same(xi.group(), gp, "candidate vector");
        cands.push_back(vector_state_kernel(xi * Complex(1.0 / xi.l2_norm()), fmt::format("vector({})", k)));
    }
    if (cands.empty())
        throw PreconditionError("no candidate vector states within the budget");

    const std::size_t nc = cands.size(), nn = net.size();
    std::vector<std::vector<double>> M(nc, std::vector<double>(nn));
    std::vector<double> target(nn);
    for (std::size_t j = 0; j < nn; ++j) {
        target[j] = mu.evaluate(net[j]).real();
        for (std::size_t i = 0; i < nc; ++i)
            M[i][j] = StateModel::from_kernel(cands[i]).evaluate(net[j]).real();
    }

    // min delta s.t. |sum_i w_i M_ij - target_j| <= delta, w in the simplex
    std::vector<double> w(nc, 0.0);
    if (nn > 0) {
        const std::size_t vars = nc + 1;
        std::vector<std::vector<double>> G;
        std::vector<double> h, c(vars, 0.0);
        c[nc] = -1.0;
        for (std::size_t j = 0; j < nn; ++j) {
            std::vector<double> row(vars);
            for (std::size_t i = 0; i < nc; ++i)
                row[i] = M[i][j];
            row[nc] = -1.0;
            G.push_back(row);
            h.push_back(target[j]);
            for (std::size_t i = 0; i < nc; ++i)
                row[i] = -M[i][j];
            G.push_back(row);
            h.push_back(-target[j]);
        }
        std::vector<double> sum(vars, 1.0);
        sum[nc] = 0.0;
        G.push_back(sum);
        h.push_back(1.0);
        for (auto& v : sum)
            v = -v;
        G.push_back(sum);
        h.push_back(-1.0);
        for (std::size_t i = 0; i < vars; ++i) {
            std::vector<double> row(vars, 0.0);
            row[i] = -1.0;
            G.push_back(row);
            h.push_back(0.0);
        }
        auto lp = solve_max_inequality<double>(G, h, c);
        if (lp.status != LpStatus::Optimal)
            throw ConvergenceError(std::string("approximation LP: ") + to_string(lp.status));
        for (std::size_t i = 0; i < nc; ++i)
            w[i] = std::max(0.0, lp.x[i]);
    } else {
        w[0] = 1.0;
    }

    // exact convex weights (binary rationals rescaled to sum one)
    std::vector<std::pair<Rational, PositiveDefiniteKernel>> parts;
    Rational total = 0;
    for (std::size_t i = 0; i < nc; ++i)
        if (w[i] > 1e-12) {
            parts.emplace_back(Rational(w[i]), cands[i]);
            total += Rational(w[i]);
        }
    std::vector<std::string> names;
    std::vector<double> weights;
    for (auto& [r, k] : parts) {
        r /= total;
        names.push_back(k.name());
        weights.push_back(r.convert_to<double>());
    }
    PositiveDefiniteKernel combo = parts.size() == 1 ? parts.front().second : convex_combination(parts, "approximation");
    StateModel approx = StateModel::from_kernel(combo, parts.size() == 1 ? "vector" : "convex");

    double dev = 0.0;
    for (std::size_t j = 0; j < nn; ++j) {
        double v = 0.0;
        for (std::size_t i = 0, p = 0; i < nc; ++i)
            if (w[i] > 1e-12)
                v += weights[p++] * M[i][j];
        dev = std::max(dev, std::abs(v - target[j]));
    }
    return ApproximationResult{std::move(approx), dev, dev <= eps_target / 2.0 + 1e-12, nn, std::move(names),
                               std::move(weights)};
}

}  // namespace qtrunc
