#include "qtrunc/truncation_fejer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qtrunc/errors.hpp"

namespace qtrunc {

// ---------------------------------------------------------------------------
// truncation systems

TruncationSystem TruncationSystem::group_algebra(GroupPtr g, int level)
{
    if (!g)
        throw PreconditionError("truncation needs a group");
    TruncationSystem t;
    t.group = std::move(g);
    t.level = level;
    return t;
}

TruncationSystem TruncationSystem::classical_system(FiniteGroupPtr g, IsotypicLabelSet s, int level)
{
    if (!g)
        throw PreconditionError("truncation needs finite group data");
    TruncationSystem t;
    t.group = g->group();
    t.classical = std::move(g);
    t.generating = std::move(s);
    t.level = level;
    // validates the generating set (faithful, conjugate closed, contains trivial)
    filtration_sets(*t.classical, t.generating, 0);
    return t;
}

bool TruncationSystem::is_full() const
{
    if (level < 0)
        return true;
    if (classical)
        return labels().size() == classical->irreps().size();
    return group->is_finite() && level >= group->diameter();
}

std::vector<GroupElement> TruncationSystem::basis() const
{
    if (classical)
        throw PreconditionError("a classical truncation is described by its label set, not by group elements");
    if (level < 0) {
        if (!group->is_finite())
            throw PreconditionError("the full algebra of an infinite group has no finite basis");
        return group->all_elements();
    }
    return group->enumerate_ball(level);
}

std::set<std::string> TruncationSystem::labels() const
{
    std::set<std::string> out;
    if (classical) {
        if (level < 0) {
            for (const auto& l : classical->labels())
                out.insert(l);
            return out;
        }
        return filtration_sets(*classical, generating, level).set.labels;
    }
    for (const auto& x : basis())
        out.insert(group->format(x));
    return out;
}

bool TruncationSystem::contains(const AlgebraElement& a) const
{
    if (a.group()->name() != group->name())
        throw StructuralError("element of " + a.group()->name() + " tested against a truncation of " + group->name());
    return level < 0 || a.support_radius() <= level;
}

bool TruncationSystem::contains(const FunctionOnG& f) const
{
    if (!classical)
        throw PreconditionError("functions on a group belong to classical truncations");
    const auto keep = labels();
    for (const auto& l : classical->labels()) {
        if (keep.count(l))
            continue;
        auto p = isotypic_project(f, l);
        if (p.is_exact()) {
            for (const auto& v : p.exact_values())
                if (!v.is_zero())
                    return false;
        } else {
            for (const auto& v : p.values())
                if (std::abs(v) > 1e-12)
                    return false;
        }
    }
    return true;
}

std::string TruncationSystem::id() const
{
    std::string lvl = level < 0 ? "full" : std::to_string(level);
    if (classical)
        return fmt::format("C({})/S^{}", group->name(), lvl);
    return fmt::format("C*({})/A_{}", group->name(), lvl);
}

AlgebraElement truncate(const AlgebraElement& a, int n)
{
    if (n < 0)
        throw PreconditionError("truncation level must be nonnegative");
    AlgebraElement r(a.group());
    for (const auto& [x, c] : a.terms())
        if (a.group()->word_length(x) <= n)
            r.add(x, c);
    return r;
}

// ---------------------------------------------------------------------------
// kernels

PositiveDefiniteKernel folner_kernel(const GroupPtr& g, const std::vector<GroupElement>& f, std::string name)
{
    std::set<GroupElement> fs(f.begin(), f.end());
    if (fs.empty())
        throw PreconditionError("Folner set must be nonempty");
    for (const auto& x : fs)
        g->validate(x);
    if (name.empty())
        name = fmt::format("folner(|F|={})", fs.size());
    PositiveDefiniteKernel k(g, name);
    const long size = static_cast<long>(fs.size());
    std::set<GroupElement> diffs;
    for (const auto& x : fs)
        for (const auto& y : fs)
            diffs.insert(g->multiply(x, g->inverse(y)));
    for (const auto& d : diffs) {
        long count = 0;
        for (const auto& y : fs)
            count += fs.count(g->multiply(d, y)) ? 1 : 0;
        k.set_exact_value(d, Rational(count, size));
    }
    AlgebraElement xi(g);
    const double amp = 1.0 / std::sqrt(static_cast<double>(size));
    for (const auto& x : fs)
        xi.add(x, amp);
    k.add_witness({Rational(1), xi});
    return k;
}

PositiveDefiniteKernel fejer_kernel(const GroupPtr& z, int n)
{
    if (z->id().family != Family::FreeAbelian || z->id().parameter != 1)
        throw PreconditionError("Fejer kernels live on Z");
    if (n < 1)
        throw PreconditionError("Fejer kernel order must be at least 1");
    std::vector<GroupElement> f;
    for (int k = 0; k < n; ++k)
        f.push_back(GroupElement{k});
    return folner_kernel(z, f, fmt::format("fejer({})", n));
}

PositiveDefiniteKernel folner_ball_kernel(const GroupPtr& g, int r)
{
    if (r < 0)
        throw PreconditionError("Folner ball radius must be nonnegative");
    return folner_kernel(g, g->enumerate_ball(r), fmt::format("folner-ball({})", r));
}

AlgebraElement fejer_operator(const PositiveDefiniteKernel& phi, const AlgebraElement& a)
{
    return schur_multiply(phi, a);
}

// ---------------------------------------------------------------------------
// epsilon certificates

nlohmann::json EpsilonCertificate::to_json(const Group& g) const
{
    nlohmann::json j;
    j["epsilon"] = epsilon;
    j["exact"] = exact ? nlohmann::json(rational_to_string(*exact)) : nlohmann::json();
    j["lower"] = lower;
    j["gap"] = gap;
    j["method"] = method;
    j["lipnorm"] = lipnorm;
    j["kernel"] = kernel;
    j["level_N"] = level_N;
    j["window"] = window;
    j["window_relative"] = window_relative;
    j["converged"] = converged;
    nlohmann::json s = nlohmann::json::array();
    for (const auto& x : support)
        s.push_back(g.format(x));
    j["support"] = s;
    return j;
}

double circle_transport_from_origin(const PositiveDefiniteKernel& phi)
{
    const auto& g = *phi.group();
    if (g.id().family != Family::FreeAbelian || g.id().parameter != 1)
        throw PreconditionError("circle transport needs a kernel on Z");
    if (phi.is_constant_one())
        return 0.0;
    // Fourier coefficients of |theta| on [-pi, pi]: pi/2 and ((-1)^k - 1)/(pi k^2)
    double s = 0.0;
    for (const auto& [x, v] : phi.values()) {
        const long k = x.nf[0];
        if (k % 2 != 0)
            s -= 2.0 * v.real() / (std::numbers::pi * static_cast<double>(k) * static_cast<double>(k));
    }
    return std::numbers::pi / 2.0 + s;
}

EpsilonCertificate epsilon_of_kernel(const PositiveDefiniteKernel& phi, const LipNormSpec& lip, int search_window,
                                     const DualNormOptions& opt)
{
    if (lip.family == LipFamily::ClassicalLipschitz)
        throw PreconditionError("epsilon certificates are defined for group algebra Lip-norms");
    if (!lip.group || lip.group->name() != phi.group()->name())
        throw StructuralError("kernel on " + phi.group()->name() + " paired with Lip-norm " + lip.id());
    const Group& g = *lip.group;
    EpsilonCertificate cert;
    cert.lipnorm = lip.id();
    cert.kernel = phi.name();

    if (phi.is_constant_one()) {
        cert.method = "closed-form";
        cert.exact = Rational(0);
        cert.level_N = g.is_finite() ? g.diameter() : -1;
        if (g.is_finite())
            cert.support = g.all_elements();
        return cert;
    }
    cert.support = phi.support();
    cert.level_N = min_level(g, cert.support);
    const int radius = cert.level_N;
    int w = search_window >= 0 ? search_window : radius + 1;
    if (lip.family == LipFamily::DiracCircle && search_window < 0)
        w = lip.window >= 0 ? lip.window : 8 * (radius + 1);
    cert.window = w;
    const bool covers_group = g.is_finite() && w >= g.diameter();
    const auto ball = g.ball_index(w);

    switch (lip.family) {
    case LipFamily::WeightedL1: {
        cert.method = "closed-form";
        const bool exact = phi.has_exact_values();
        Rational best_q(0);
        double best = 0.0;
        for (std::size_t i = 0; i < ball->size(); ++i) {
            const int l = ball->lengths[i];
            if (l == 0)
                continue;
            const auto& x = ball->elements[i];
            if (exact) {
                Rational v = (Rational(1) - *phi.exact_value(x)) / l;
                if (v < 0)
                    v = -v;
                best_q = std::max(best_q, v);
            } else {
                best = std::max(best, std::abs(Complex(1.0) - phi.value(x)) / l);
            }
        }
        if (exact)
            best = best_q.convert_to<double>();
        if (!covers_group) {
            // outside ball(w): |1 - phi| <= 1 when phi is nonnegative there, <= 2 in general
            bool nonnegative = true;
            for (const auto& [x, v] : phi.values())
                nonnegative = nonnegative && v.imag() == 0.0 && v.real() >= 0.0;
            const double tail = (radius <= w || nonnegative ? 1.0 : 2.0) / (w + 1);
            if (tail > best)
                throw ConvergenceError(fmt::format(
                    "epsilon inconclusive: tail bound {:.6g} exceeds interior maximum {:.6g}; enlarge the search "
                    "window beyond {}",
                    tail, best, w));
        }
        cert.epsilon = cert.lower = best;
        if (exact)
            cert.exact = best_q;
        return cert;
    }
    case LipFamily::Sobolev: {
        cert.method = "closed-form";
        double s = 0.0;
        for (std::size_t i = 0; i < ball->size(); ++i) {
            if (ball->lengths[i] == 0)
                continue;
            double v = std::abs(Complex(1.0) - phi.value(ball->elements[i]));
            s += v * v / std::pow(1.0 + ball->lengths[i], 2.0 * lip.s);
        }
        cert.epsilon = cert.lower = std::sqrt(s);
        cert.window_relative = !covers_group;
        return cert;
    }
    case LipFamily::DiracCircle:
    case LipFamily::DiracWordLength: {
        std::map<GroupElement, Complex> c;
        for (std::size_t i = 0; i < ball->size(); ++i)
            if (ball->lengths[i] > 0) {
                Complex v = Complex(1.0) - phi.value(ball->elements[i]);
                if (v != Complex(0.0))
                    c[ball->elements[i]] = v;
            }
        DualNormOptions dopt = opt;
        if (lip.family == LipFamily::DiracCircle)
            dopt.tolerance = std::max(opt.tolerance, 1e-4);  // only feeds the lower bound
        auto dual = lip_dual_norm(lip, c, w, dopt);
        cert.converged = dual.converged;
        if (lip.family == LipFamily::DiracCircle) {
            // the transport value is the supremum over all Lipschitz functions;
            // the degree-w program certifies a lower bound on the same quantity
            cert.method = "transport+LP";
            cert.epsilon = circle_transport_from_origin(phi);
            cert.lower = dual.lower;
        } else {
            cert.method = "cutting-plane";
            cert.epsilon = dual.upper;
            cert.lower = dual.lower;
            cert.window_relative = !covers_group;
        }
        cert.gap = std::max(0.0, cert.epsilon - cert.lower);
        return cert;
    }
    case LipFamily::ClassicalLipschitz: break;
    }
    throw PreconditionError("unsupported Lip-norm family");
}

// ---------------------------------------------------------------------------
// support propagation

std::vector<GroupElement> support_propagation(const AlgebraElement& a)
{
    if (a.is_zero())
        throw PreconditionError("support propagation of the zero element");
    const auto& g = *a.group();
    std::set<GroupElement> out;
    for (const auto& [x, cx] : a.terms())
        for (const auto& [y, cy] : a.terms())
            out.insert(g.multiply(x, g.inverse(y)));
    return {out.begin(), out.end()};
}

Complex vector_state_value(const AlgebraElement& a, const AlgebraElement& b)
{
    if (a.is_zero())
        throw PreconditionError("vector state of the zero element");
    const auto& g = *a.group();
    const double n2 = a.l2_norm() * a.l2_norm();
    // h(a* b a) = sum_y b(y) sum_v conj a(y v) a(v)
    Complex s = 0.0;
    for (const auto& [y, by] : b.terms())
        for (const auto& [v, av] : a.terms()) {
            Complex w = a.coefficient(g.multiply(y, v));
            if (w != Complex(0.0))
                s += by * std::conj(w) * av;
        }
    return s / n2;
}

int min_level(const Group& g, const std::vector<GroupElement>& f)
{
    int n = 0;
    for (const auto& x : f)
        n = std::max(n, g.word_length(x));
    return n;
}

int min_level(const FiniteGroupData& g, const IsotypicLabelSet& s, const std::set<std::string>& f)
{
    return min_level_labels(g, s, f);
}

}  // namespace qtrunc
