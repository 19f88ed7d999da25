#include "qtrunc/lipnorms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>

#include "qtrunc/errors.hpp"
#include "qtrunc/lp.hpp"

namespace qtrunc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

bool is_integers(const Group& g)
{
    return g.id().family == Family::FreeAbelian && g.id().parameter == 1 && g.id().default_generators;
}

void require_group(const LipNormSpec& lip)
{
    if (lip.family == LipFamily::ClassicalLipschitz)
        throw PreconditionError("ClassicalLipschitz acts on functions on a finite group, not on group algebra elements");
    if (!lip.group)
        throw PreconditionError(std::string(to_string(lip.family)) + " needs a group");
    if (lip.family == LipFamily::DiracCircle && !is_integers(*lip.group))
        throw PreconditionError("DiracCircle is defined on Z with generators +-1 only, got " + lip.group->name());
}

void require_same_group(const LipNormSpec& lip, const AlgebraElement& a)
{
    if (a.group()->name() != lip.group->name())
        throw StructuralError(fmt::format("Lip-norm on {} applied to an element of {}", lip.group->name(),
                                          a.group()->name()));
}

int dirac_window(const LipNormSpec& lip, const AlgebraElement& a, int window)
{
    const int radius = a.support_radius();
    int w = window >= 0 ? window : lip.window >= 0 ? lip.window : radius + LipNormSpec::kDefaultMargin;
    if (w < radius + 1)
        throw PreconditionError(
            fmt::format("Dirac window {} is smaller than support radius {} + 1", w, radius));
    return w;
}

// sum_k c_k e^{i k theta} with dense coefficients from kmin, evaluated by Horner.
struct TrigPoly
{
    long kmin = 0;
    std::vector<Complex> c;

    explicit TrigPoly(const std::vector<std::pair<long, Complex>>& terms)
    {
        if (terms.empty())
            return;
        long kmax = terms.front().first;
        kmin = kmax;
        for (const auto& t : terms) {
            kmin = std::min(kmin, t.first);
            kmax = std::max(kmax, t.first);
        }
        c.assign(static_cast<std::size_t>(kmax - kmin + 1), Complex(0.0));
        for (const auto& [k, v] : terms)
            c[static_cast<std::size_t>(k - kmin)] += v;
    }

    long spread() const { return c.empty() ? 0 : static_cast<long>(c.size()) - 1; }

    // value up to the unimodular factor e^{i kmin theta}
    Complex shifted(double theta) const
    {
        const Complex z = std::polar(1.0, theta);
        Complex s = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it)
            s = s * z + *it;
        return s;
    }

    Complex operator()(double theta) const
    {
        return shifted(theta) * std::polar(1.0, static_cast<double>(kmin) * theta);
    }
};

// Branch and bound on p = |g|^2, a real trigonometric polynomial of degree W
// (the coefficient spread); Bernstein gives |p''| <= W^2 sup p.
TrigSup trig_sup(const TrigPoly& poly, int grid, double rel_tol, std::vector<double>* grid_abs)
{
    TrigSup out;
    if (poly.c.empty())
        return out;
    const double W = static_cast<double>(poly.spread());
    const std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(std::max(grid, 1)),
                                                static_cast<std::size_t>(8.0 * W + 8));
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);

    struct Interval
    {
        double a, pa, b, pb;
    };
    std::vector<double> p(n);
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        p[j] = std::norm(poly.shifted(h * static_cast<double>(j)));
        if (p[j] > best) {
            best = p[j];
            out.argmax = h * static_cast<double>(j);
        }
    }
    out.evaluations = n;
    if (grid_abs) {
        grid_abs->resize(n);
        for (std::size_t j = 0; j < n; ++j)
            (*grid_abs)[j] = std::sqrt(p[j]);
    }
    if (W == 0.0) {
        out.lower = out.upper = std::sqrt(best);
        return out;
    }
    double upper = best / (1.0 - h * h * W * W / 8.0);
    std::vector<Interval> live;
    live.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        live.push_back({h * static_cast<double>(j), p[j], h * static_cast<double>(j + 1), p[(j + 1) % n]});
    for (int round = 0; round < 80; ++round) {
        double new_upper = best;
        std::vector<Interval> keep;
        for (const auto& iv : live) {
            double len = iv.b - iv.a;
            double bound = std::max(iv.pa, iv.pb) + len * len * W * W * upper / 8.0;
            if (bound > best * (1.0 + 0.25 * rel_tol)) {
                keep.push_back(iv);
                new_upper = std::max(new_upper, bound);
            }
        }
        upper = std::min(upper, new_upper);
        if (upper <= best * (1.0 + rel_tol) || keep.empty())
            break;
        live.clear();
        for (const auto& iv : keep) {
            double m = 0.5 * (iv.a + iv.b);
            double pm = std::norm(poly.shifted(m));
            ++out.evaluations;
            if (pm > best) {
                best = pm;
                out.argmax = m;
            }
            live.push_back({iv.a, iv.pa, m, pm});
            live.push_back({m, pm, iv.b, iv.pb});
        }
    }
    out.lower = std::sqrt(best);
    out.upper = std::sqrt(std::max(upper, best)) * (1.0 + 16.0 * kEps) + 16.0 * kEps;
    return out;
}

std::vector<std::pair<long, Complex>> derivative_terms(const AlgebraElement& a)
{
    std::vector<std::pair<long, Complex>> t;
    for (const auto& [x, c] : a.terms())
        if (x.nf[0] != 0)
            t.emplace_back(x.nf[0], Complex(0.0, static_cast<double>(x.nf[0])) * c);
    return t;
}

// Element of the self-adjoint basis used by the dual programs.
struct BasisElement
{
    AlgebraElement element;
    double box;  // |t| <= box for every t with L(t B) <= 1
};

std::vector<BasisElement> self_adjoint_basis(const GroupPtr& g, int window, bool complex_part)
{
    std::vector<BasisElement> basis;
    const auto ball = g->ball_index(window);
    for (std::size_t i = 0; i < ball->size(); ++i) {
        const GroupElement& x = ball->elements[i];
        if (g->is_identity(x))
            continue;
        GroupElement xi = g->inverse(x);
        if (xi < x)
            continue;
        const double box = 1.0 / ball->lengths[i];
        if (xi == x) {
            basis.push_back({AlgebraElement::delta(g, x), box});
            continue;
        }
        basis.push_back({AlgebraElement::delta(g, x) + AlgebraElement::delta(g, xi), box});
        if (complex_part)
            basis.push_back(
                {AlgebraElement::delta(g, x, Complex(0.0, 1.0)) + AlgebraElement::delta(g, xi, Complex(0.0, -1.0)),
                 box});
    }
    return basis;
}

AlgebraElement combine(const GroupPtr& g, const std::vector<BasisElement>& basis, const std::vector<double>& t)
{
    std::map<GroupElement, Complex> acc;
    for (std::size_t k = 0; k < basis.size(); ++k)
        if (t[k] != 0.0)
            for (const auto& [x, c] : basis[k].element.terms())
                acc[x] += t[k] * c;
    AlgebraElement a(g);
    for (const auto& [x, c] : acc)
        a.add(x, c);
    return a;
}

struct OracleResult
{
    double sigma = 0.0;      // lower estimate of L(t)
    double certified = kInf; // certified upper bound on L(t)
    std::vector<std::vector<double>> cuts;
};

struct CuttingPlaneResult
{
    DualNormResult result;
    std::vector<double> best_t;
    double best_scale = 1.0;
};

// Kelley cutting planes for max c.t s.t. L(t) <= 1, |t_k| <= box_k.
CuttingPlaneResult cutting_plane(const std::vector<double>& objective, const std::vector<double>& box,
                             std::vector<std::vector<double>> cuts,
                             const std::function<OracleResult(const std::vector<double>&)>& oracle,
                             const DualNormOptions& opt, bool lower_is_certified)
{
    const std::size_t n = objective.size();
    CuttingPlaneResult out;
    DualNormResult& res = out.result;
    res.upper = kInf;
    res.converged = false;
    if (n == 0 || std::all_of(objective.begin(), objective.end(), [](double v) { return v == 0.0; })) {
        res.upper = res.lower = 0.0;
        res.lower_certified = true;
        res.converged = true;
        return out;
    }
    IncrementalInequalityLp<double> lp(objective);
    std::vector<std::vector<double>> G;
    std::vector<double> h;
    auto push = [&](std::vector<double> row, double rhs) {
        lp.add_row(row, rhs);
        G.push_back(std::move(row));
        h.push_back(rhs);
    };
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> row(n, 0.0);
        row[k] = 1.0;
        push(row, box[k]);
        row[k] = -1.0;
        push(row, box[k]);
    }
    for (auto& c : cuts)
        push(std::move(c), 1.0);
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        auto sol = lp.solve();
        if (sol.status != LpStatus::Optimal)
            throw ConvergenceError(std::string("cutting-plane LP ended with status ") + to_string(sol.status));
        res.iterations = it + 1;

        // certified bound from the dual multipliers
        std::vector<double> residual = objective;
        double bound = 0.0;
        for (std::size_t i = 0; i < G.size(); ++i) {
            double y = std::max(0.0, sol.multipliers[i]);
            bound += y * h[i];
            for (std::size_t k = 0; k < n; ++k)
                residual[k] -= y * G[i][k];
        }
        for (std::size_t k = 0; k < n; ++k)
            bound += std::abs(residual[k]) * box[k];
        bound *= 1.0 + 64.0 * kEps;
        res.upper = std::min(res.upper, bound);

        const std::vector<double>& t = sol.x;
        double value = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            value += objective[k] * t[k];
        OracleResult ev = oracle(t);
        double scale = lower_is_certified ? ev.certified : ev.sigma;
        if (scale > 0.0) {
            double candidate = value / std::max(1.0, scale);
            if (candidate > res.lower) {
                res.lower = candidate;
                out.best_t = t;
                out.best_scale = std::max(1.0, scale);
            }
        }
        if (ev.sigma <= 1.0 + opt.tolerance && (!lower_is_certified || ev.certified <= 1.0 + opt.tolerance)) {
            res.converged = true;
            break;
        }
        bool added = false;
        for (auto& c : ev.cuts) {
            double lhs = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                lhs += c[k] * t[k];
            if (lhs > 1.0 + 0.5 * opt.tolerance) {
                push(std::move(c), 1.0);
                added = true;
            }
        }
        if (!added)
            break;
    }
    res.lower_certified = lower_is_certified;
    res.lower = std::min(res.lower, res.upper);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// specs

const char* to_string(LipFamily f)
{
    switch (f) {
    case LipFamily::DiracWordLength: return "DiracWordLength";
    case LipFamily::DiracCircle: return "DiracCircle";
    case LipFamily::WeightedL1: return "WeightedL1";
    case LipFamily::Sobolev: return "Sobolev";
    case LipFamily::ClassicalLipschitz: return "ClassicalLipschitz";
    }
    return "?";
}

LipFamily parse_lip_family(const std::string& name)
{
    for (auto f : {LipFamily::DiracWordLength, LipFamily::DiracCircle, LipFamily::WeightedL1, LipFamily::Sobolev,
                   LipFamily::ClassicalLipschitz})
        if (name == to_string(f))
            return f;
    throw ValidationError("unknown Lip-norm family '" + name + "'");
}

std::string LipNormSpec::id() const
{
    std::string where = group ? group->name() : finite ? finite->group()->name() : "?";
    std::string w = window >= 0 ? std::to_string(window) : "auto";
    switch (family) {
    case LipFamily::DiracWordLength: return fmt::format("DiracWordLength(window={})@{}", w, where);
    case LipFamily::DiracCircle: return fmt::format("DiracCircle(degree={})@{}", w, where);
    case LipFamily::WeightedL1: return "WeightedL1@" + where;
    case LipFamily::Sobolev: return fmt::format("Sobolev(s={:g})@{}", s, where);
    case LipFamily::ClassicalLipschitz: return "ClassicalLipschitz@" + where;
    }
    return "?";
}

LipNormSpec LipNormSpec::weighted_l1(GroupPtr g)
{
    LipNormSpec l;
    l.family = LipFamily::WeightedL1;
    l.group = std::move(g);
    return l;
}

LipNormSpec LipNormSpec::sobolev(GroupPtr g, double s, int window)
{
    if (!(s >= 0.0))
        throw PreconditionError("Sobolev exponent must be nonnegative");
    LipNormSpec l;
    l.family = LipFamily::Sobolev;
    l.group = std::move(g);
    l.s = s;
    l.window = window;
    return l;
}

LipNormSpec LipNormSpec::dirac_word_length(GroupPtr g, int window)
{
    LipNormSpec l;
    l.family = LipFamily::DiracWordLength;
    l.group = std::move(g);
    l.window = window;
    return l;
}

LipNormSpec LipNormSpec::dirac_circle(GroupPtr z, int degree_window)
{
    LipNormSpec l;
    l.family = LipFamily::DiracCircle;
    l.group = std::move(z);
    l.window = degree_window;
    require_group(l);
    return l;
}

LipNormSpec LipNormSpec::classical_lipschitz(FiniteGroupPtr g)
{
    LipNormSpec l;
    l.family = LipFamily::ClassicalLipschitz;
    l.finite = std::move(g);
    return l;
}

// ---------------------------------------------------------------------------
// evaluation

double sobolev_weight(const LipNormSpec& lip, const GroupElement& x)
{
    return std::pow(1.0 + lip.group->word_length(x), lip.s);
}

SparseC dirac_commutator(const AlgebraElement& a, const BallIndex& ball)
{
    const auto& g = *a.group();
    std::vector<Eigen::Triplet<Complex>> trips;
    for (std::size_t col = 0; col < ball.size(); ++col) {
        const int ly = ball.lengths[col];
        for (const auto& [x, c] : a.terms()) {
            if (auto row = ball.find(g.multiply(x, ball.elements[col]))) {
                int d = ball.lengths[*row] - ly;
                if (d != 0)
                    trips.emplace_back(static_cast<int>(*row), static_cast<int>(col), c * static_cast<double>(d));
            }
        }
    }
    SparseC m(static_cast<int>(ball.size()), static_cast<int>(ball.size()));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

TrigSup trig_sup_abs(const std::vector<std::pair<long, Complex>>& terms, int grid, double rel_tol)
{
    return trig_sup(TrigPoly(terms), grid, rel_tol, nullptr);
}

NormEstimate lip_eval(const LipNormSpec& lip, const AlgebraElement& a, int window)
{
    require_group(lip);
    require_same_group(lip, a);
    const auto& g = *lip.group;
    NormEstimate est;
    est.method = "closed-form";
    switch (lip.family) {
    case LipFamily::WeightedL1: {
        est.lower = est.upper = a.weighted_l1();
        return est;
    }
    case LipFamily::Sobolev: {
        double s = 0.0;
        for (const auto& [x, c] : a.terms())
            if (!g.is_identity(x))
                s += std::norm(c) * std::pow(1.0 + g.word_length(x), 2.0 * lip.s);
        est.lower = est.upper = std::sqrt(s);
        return est;
    }
    case LipFamily::DiracCircle: {
        if (lip.window >= 0 && a.support_radius() > lip.window)
            throw PreconditionError(fmt::format("element of degree {} outside the degree window {}",
                                                a.support_radius(), lip.window));
        auto sup = trig_sup_abs(derivative_terms(a), lip.grid, lip.tolerance);
        est.lower = sup.lower;
        est.upper = std::min(sup.upper, a.weighted_l1());
        est.upper = std::max(est.upper, est.lower);
        est.iterations = sup.evaluations;
        est.method = "grid-refined";
        return est;
    }
    case LipFamily::DiracWordLength: {
        const int w = dirac_window(lip, a, window);
        est.window = w;
        est.upper = a.weighted_l1();
        if (a.is_zero())
            return est;
        const auto ball = g.ball_index(w);
        if (a.terms().size() == 1) {
            // weighted partial permutation: the compressed norm is the largest entry
            const auto& [x, c] = *a.terms().begin();
            int best = 0;
            for (std::size_t col = 0; col < ball->size(); ++col)
                if (auto row = ball->find(g.multiply(x, ball->elements[col])))
                    best = std::max(best, std::abs(ball->lengths[*row] - ball->lengths[col]));
            est.lower = std::abs(c) * best;
            est.method = "monomial";
        } else {
            auto top = top_singular(dirac_commutator(a, *ball), lip.norm.dense_limit, lip.norm.tolerance,
                                    lip.norm.max_iterations);
            est.lower = top.sigma;
            est.iterations = top.iterations;
            est.converged = top.converged;
            est.method = top.dense ? "dense" : (top.converged ? "power-iteration" : "power-iteration(unconverged)");
            if (g.is_finite() && ball->size() == *g.order() && top.dense)
                est.upper = std::min(est.upper, est.lower * (1.0 + 64.0 * kEps) + 64.0 * kEps);
        }
        est.upper = std::max(est.upper, est.lower);
        return est;
    }
    case LipFamily::ClassicalLipschitz: break;
    }
    throw PreconditionError("unsupported Lip-norm for group algebra elements");
}

NormEstimate lip_eval(const LipNormSpec& lip, const FunctionOnG& f)
{
    if (lip.family != LipFamily::ClassicalLipschitz)
        throw PreconditionError(std::string(to_string(lip.family)) + " does not act on functions on a finite group");
    if (lip.finite && lip.finite != f.group_data() &&
        lip.finite->group()->name() != f.group_data()->group()->name())
        throw StructuralError("Lip-norm and function live on different groups");
    NormEstimate est;
    est.method = "exact";
    bool rational = f.is_exact();
    if (rational)
        for (const auto& v : f.exact_values())
            rational = rational && v.is_rational();
    if (rational) {
        Rational r = lipschitz_constant_exact(f);
        est.exact = r;
        est.lower = est.upper = r.convert_to<double>();
    } else {
        est.lower = est.upper = lipschitz_constant(f);
    }
    return est;
}

// ---------------------------------------------------------------------------
// kernels acting on elements

AlgebraElement schur_multiply(const PositiveDefiniteKernel& phi, const AlgebraElement& a)
{
    if (phi.group()->name() != a.group()->name())
        throw StructuralError(fmt::format("kernel on {} applied to an element of {}", phi.group()->name(),
                                          a.group()->name()));
    if (phi.is_constant_one())
        return a;
    AlgebraElement r(a.group());
    for (const auto& [x, c] : a.terms()) {
        Complex v = phi.value(x);
        if (v != Complex(0.0))
            r.add(x, v * c);
    }
    return r;
}

InvarianceCheck verify_invariance(const LipNormSpec& lip, const PositiveDefiniteKernel& phi, const AlgebraElement& a,
                                  double tol)
{
    AlgebraElement b = is_self_adjoint(a) ? a : symmetrize(a);
    AlgebraElement pb = schur_multiply(phi, b);
    int window = -1;
    if (lip.family == LipFamily::DiracWordLength)
        window = dirac_window(lip, b, -1);
    InvarianceCheck out;
    out.before = lip_eval(lip, b, window).lower;
    out.after = lip_eval(lip, pb, window).lower;
    out.slack = out.before - out.after;
    out.holds = out.after <= out.before + tol;
    return out;
}

double invariantize_lower(const LipNormSpec& lip, const AlgebraElement& a,
                          const std::vector<PositiveDefiniteKernel>& kernels)
{
    if (kernels.empty())
        throw PreconditionError("invariantization needs at least one kernel");
    if (!is_self_adjoint(a, 1e-14))
        throw PreconditionError("invariantization is defined for self-adjoint elements");
    int window = lip.family == LipFamily::DiracWordLength ? dirac_window(lip, a, -1) : -1;
    double best = lip_eval(lip, a, window).lower;
    for (const auto& k : kernels)
        best = std::max(best, lip_eval(lip, schur_multiply(k, a), window).lower);
    return best;
}

// ---------------------------------------------------------------------------
// radius

namespace {

// sum_{k >= 2} k^{-p} bounded above by a partial sum plus the integral tail.
double zeta_minus_one_upper(double p)
{
    if (p <= 1.0)
        return kInf;
    const int K = 100000;
    double s = 0.0;
    for (int k = K; k >= 2; --k)
        s += std::pow(static_cast<double>(k), -p);
    return (s + std::pow(static_cast<double>(K), 1.0 - p) / (p - 1.0)) * (1.0 + 1e-12);
}

// sqrt(sum_{x in ball(level), x != e} l(x)^{-p}), or over the whole group when level < 0.
double inverse_length_sum(const LipNormSpec& lip, int level, double p, bool shifted)
{
    const auto& g = *lip.group;
    if (level < 0) {
        if (g.is_finite())
            level = g.diameter();
        else if (is_integers(g))
            return std::sqrt(2.0 * (shifted ? zeta_minus_one_upper(p) : 1.0 + zeta_minus_one_upper(p)));
        else
            return kInf;
    }
    double s = 0.0;
    auto ball = g.ball_index(level);
    for (std::size_t i = 0; i < ball->size(); ++i)
        if (ball->lengths[i] > 0)
            s += std::pow(static_cast<double>(ball->lengths[i]) + (shifted ? 1.0 : 0.0), -p);
    return std::sqrt(s);
}

}  // namespace

RadiusEstimate radius_estimate(const LipNormSpec& lip, int level, const RadiusOptions& opt)
{
    RadiusEstimate r;
    r.level = level;
    if (lip.family == LipFamily::ClassicalLipschitz) {
        if (!lip.finite)
            throw PreconditionError("ClassicalLipschitz needs finite group data");
        int diam = 0;
        for (std::size_t x = 0; x < lip.finite->order(); ++x)
            for (std::size_t y = 0; y < lip.finite->order(); ++y)
                diam = std::max(diam, lip.finite->distance(x, y));
        r.exact = Rational(diam, 2);
        r.lower = r.upper = r.exact->convert_to<double>();
        r.method = "diameter";
        return r;
    }
    require_group(lip);
    const auto& g = *lip.group;
    if (level == 0 || (g.is_finite() && g.order() == 1u)) {
        r.exact = Rational(0);
        r.method = "constants";
        return r;
    }
    if (g.is_finite() && level >= g.diameter())
        level = -1;
    r.level = level;

    // upper bounds
    switch (lip.family) {
    case LipFamily::WeightedL1: {
        const int lp_level = level < 0 && g.is_finite() ? g.diameter() : level;
        if (lp_level > 0 && g.ball_index(lp_level)->size() <= 64) {
            // max sum_x t_x s.t. sum_x l(x) t_x <= 1, t >= 0; elements of equal
            // length enter identically, so one variable per length suffices
            auto ball = g.ball_index(lp_level);
            std::set<int> distinct;
            for (std::size_t i = 0; i < ball->size(); ++i)
                if (ball->lengths[i] > 0)
                    distinct.insert(ball->lengths[i]);
            std::vector<Rational> lengths;
            for (int l : distinct)
                lengths.emplace_back(l);
            const std::size_t n = lengths.size();
            std::vector<std::vector<Rational>> G;
            std::vector<Rational> h, c(n, Rational(1));
            G.push_back(lengths);
            h.emplace_back(1);
            for (std::size_t k = 0; k < n; ++k) {
                std::vector<Rational> row(n, Rational(0));
                row[k] = -1;
                G.push_back(row);
                h.emplace_back(0);
            }
            auto lp = solve_max_inequality<Rational>(G, h, c);
            if (lp.status != LpStatus::Optimal)
                throw ConvergenceError("radius LP did not reach optimality");
            r.exact = lp.objective;
            r.upper = lp.objective.convert_to<double>();
            r.method = "LP";
        } else {
            r.upper = 1.0;
            r.method = "closed-form";
        }
        break;
    }
    case LipFamily::Sobolev:
        r.upper = inverse_length_sum(lip, level, 2.0 * lip.s, true);
        r.method = "closed-form";
        break;
    case LipFamily::DiracWordLength:
        r.upper = inverse_length_sum(lip, level, 2.0, false);
        r.method = "column-relaxation";
        break;
    case LipFamily::DiracCircle:
        r.upper = std::numbers::pi / 2.0;
        r.method = "closed-form";
        break;
    case LipFamily::ClassicalLipschitz: break;
    }

    // lower bounds from sampled self-adjoint elements
    const GroupPtr& gp = lip.group;
    const int radius = level < 0 ? (g.is_finite() ? g.diameter() : opt.reference_window) : level;
    auto consider = [&](const AlgebraElement& a) {
        if (a.is_zero())
            return;
        double lu = lip_eval(lip, a, lip.family == LipFamily::DiracWordLength ? a.support_radius() + 1 : -1).upper;
        if (lu > 0.0)
            r.lower = std::max(r.lower, quotient_norm_lower(a, radius) / lu);
    };
    for (const auto& s : g.id().generators) {
        if (g.is_identity(s))
            continue;
        GroupElement si = g.inverse(s);
        if (si == s)
            consider(AlgebraElement::delta(gp, s));
        else
            consider((AlgebraElement::delta(gp, s) + AlgebraElement::delta(gp, si)) * Complex(0.5));
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto ball = g.ball_index(radius);
    // the lower bound is clamped to the upper one, so stop once they meet
    for (int k = 0; k < opt.samples && r.lower < r.upper; ++k) {
        AlgebraElement a(gp);
        for (const auto& x : ball->elements)
            if (!g.is_identity(x) && !(g.inverse(x) < x)) {
                double v = u(rng);
                a.add(x, v);
                if (g.inverse(x) != x)
                    a.add(g.inverse(x), v);
            }
        consider(a);
    }
    r.lower = std::min(r.lower, r.upper);
    if (r.exact && r.exact->convert_to<double>() != r.lower)
        r.exact.reset();
    return r;
}

// ---------------------------------------------------------------------------
// dual programs

DualNormResult lip_dual_norm(const LipNormSpec& lip, const std::map<GroupElement, Complex>& c, int window,
                             const DualNormOptions& opt)
{
    require_group(lip);
    const auto& g = *lip.group;
    const GroupPtr& gp = lip.group;
    if (window < 0)
        throw PreconditionError("dual norm needs a nonnegative window");
    for (const auto& [x, v] : c) {
        if (g.is_identity(x) && std::abs(v) > 1e-12)
            throw PreconditionError(
                "functional does not vanish on the unit: the program is unbounded (radius_estimate is infinite)");
        GroupElement xi = g.inverse(x);
        auto it = c.find(xi);
        Complex vi = it == c.end() ? Complex(0.0) : it->second;
        if (std::abs(vi - std::conj(v)) > 1e-12 * std::max(1.0, std::abs(v)))
            throw PreconditionError("functional is not hermitian");
    }
    auto coeff = [&](const GroupElement& x) {
        auto it = c.find(x);
        return it == c.end() ? Complex(0.0) : it->second;
    };

    DualNormResult res;
    const auto ball = g.ball_index(window);
    if (lip.family == LipFamily::WeightedL1 || lip.family == LipFamily::Sobolev) {
        double best = 0.0, sum = 0.0;
        std::optional<GroupElement> arg;
        for (std::size_t i = 0; i < ball->size(); ++i) {
            const auto& x = ball->elements[i];
            if (ball->lengths[i] == 0)
                continue;
            double v = std::abs(coeff(x));
            if (lip.family == LipFamily::WeightedL1) {
                if (v / ball->lengths[i] > best) {
                    best = v / ball->lengths[i];
                    arg = x;
                }
            } else {
                sum += v * v / std::pow(1.0 + ball->lengths[i], 2.0 * lip.s);
            }
        }
        res.upper = res.lower = lip.family == LipFamily::WeightedL1 ? best : std::sqrt(sum);
        res.lower_certified = true;
        res.method = "closed-form";
        if (arg) {
            Complex v = coeff(*arg);
            double ell = g.word_length(*arg);
            Complex dir = std::conj(v) / std::abs(v) / ell;
            GroupElement xi = g.inverse(*arg);
            AlgebraElement m(gp);
            if (xi == *arg) {
                m.add(*arg, dir.real());
            } else {
                m.add(*arg, 0.5 * dir);
                m.add(xi, 0.5 * std::conj(dir));
            }
            res.maximizer = m;
        }
        return res;
    }

    bool complex_part = false;
    for (const auto& [x, v] : c)
        complex_part = complex_part || v.imag() != 0.0;
    auto basis = self_adjoint_basis(gp, window, complex_part);
    const std::size_t n = basis.size();
    std::vector<double> objective(n), box(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex s = 0.0;
        for (const auto& [x, b] : basis[k].element.terms())
            s += coeff(x) * b;
        objective[k] = s.real();
        box[k] = basis[k].box;
    }

    std::vector<std::vector<double>> initial;
    std::function<OracleResult(const std::vector<double>&)> oracle;
    bool certified_lower = false;
    std::vector<SparseC> pieces;

    if (lip.family == LipFamily::DiracWordLength) {
        const auto big = g.ball_index(window + opt.margin);
        for (const auto& b : basis)
            pieces.push_back(dirac_commutator(b.element, *big));
        const bool exact_window = g.is_finite() && big->size() == *g.order();
        oracle = [&, exact_window, big](const std::vector<double>& t) {
            OracleResult out;
            SparseC m(static_cast<int>(big->size()), static_cast<int>(big->size()));
            for (std::size_t k = 0; k < n; ++k)
                if (t[k] != 0.0)
                    m += pieces[k] * Complex(t[k]);
            auto top = top_singular(m, lip.norm.dense_limit, lip.norm.tolerance, lip.norm.max_iterations);
            out.sigma = top.sigma;
            out.certified = exact_window && top.dense ? top.sigma * (1.0 + 64.0 * kEps)
                                                      : combine(gp, basis, t).weighted_l1();
            if (top.sigma > 0.0) {
                Eigen::VectorXcd u = m * top.v / top.sigma;
                std::vector<double> cut(n);
                for (std::size_t k = 0; k < n; ++k)
                    cut[k] = u.dot(pieces[k] * top.v).real();
                out.cuts.push_back(std::move(cut));
            }
            return out;
        };
        res.method = "cutting-plane";
    } else {
        // DiracCircle: cuts Re(e^{-i psi} f'(theta)) <= 1 at grid points
        auto deriv_at = [&](std::size_t k, double theta) {
            Complex s = 0.0;
            for (const auto& [x, b] : basis[k].element.terms())
                s += b * Complex(0.0, static_cast<double>(x.nf[0])) *
                     std::polar(1.0, static_cast<double>(x.nf[0]) * theta);
            return s;
        };
        auto make_cut = [&](double theta, double psi) {
            std::vector<double> cut(n);
            Complex rot = std::polar(1.0, -psi);
            double norm = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                cut[k] = (rot * deriv_at(k, theta)).real();
                norm += std::abs(cut[k]);
            }
            if (norm < 1e-14)
                cut.clear();
            return cut;
        };
        const std::size_t m0 = 2 * n + 2;
        const double span = complex_part ? 2.0 * std::numbers::pi : std::numbers::pi;
        for (std::size_t j = 0; j < m0; ++j) {
            double theta = span * (static_cast<double>(j) + 0.5) / static_cast<double>(m0);
            for (double psi : complex_part ? std::vector<double>{0.0, 0.5 * std::numbers::pi, std::numbers::pi,
                                                                  1.5 * std::numbers::pi}
                                           : std::vector<double>{0.0, std::numbers::pi}) {
                auto cut = make_cut(theta, psi);
                if (!cut.empty())
                    initial.push_back(std::move(cut));
            }
        }
        const int grid = lip.grid;
        oracle = [&, grid, n](const std::vector<double>& t) {
            OracleResult out;
            AlgebraElement a = combine(gp, basis, t);
            TrigPoly poly(derivative_terms(a));
            std::vector<double> vals;
            auto sup = trig_sup(poly, grid, 1e-10, &vals);
            out.sigma = sup.lower;
            out.certified = sup.upper;
            // local maxima of |f'| on the grid above 1
            const std::size_t N = vals.size();
            const double h = 2.0 * std::numbers::pi / static_cast<double>(N);
            std::vector<std::pair<double, std::size_t>> peaks;
            for (std::size_t j = 0; j < N; ++j) {
                double l = vals[(j + N - 1) % N], r = vals[(j + 1) % N];
                if (vals[j] > 1.0 && vals[j] >= l && vals[j] >= r)
                    peaks.emplace_back(vals[j], j);
            }
            std::sort(peaks.rbegin(), peaks.rend());
            if (peaks.size() > 2 * n + 8)
                peaks.resize(2 * n + 8);
            std::vector<double> thetas;
            for (const auto& [v, j] : peaks)
                thetas.push_back(h * static_cast<double>(j));
            thetas.push_back(sup.argmax);
            for (double theta : thetas) {
                Complex fv = poly(theta);
                if (std::abs(fv) == 0.0)
                    continue;
                auto cut = make_cut(theta, std::arg(fv));
                if (!cut.empty())
                    out.cuts.push_back(std::move(cut));
            }
            return out;
        };
        certified_lower = true;
        res.method = "LP";
    }

    CuttingPlaneResult cp = cutting_plane(objective, box, initial, oracle, opt, certified_lower);
    cp.result.method = res.method;
    if (!cp.best_t.empty()) {
        for (auto& v : cp.best_t)
            v /= cp.best_scale;
        cp.result.maximizer = combine(gp, basis, cp.best_t);
    }
    return cp.result;
}

}  // namespace qtrunc
