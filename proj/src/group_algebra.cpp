#include "qtrunc/group_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <fftw3.h>
#include <fmt/format.h>

#include "qtrunc/errors.hpp"
#include "qtrunc/linalg.hpp"

namespace qtrunc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Left-convolution matrix on l^2(ball): entry (z, y) = a(z y^{-1}).
SparseC left_convolution_matrix(const AlgebraElement& a, const BallIndex& ball)
{
    const auto& g = *a.group();
    std::vector<Eigen::Triplet<Complex>> trips;
    for (std::size_t col = 0; col < ball.size(); ++col) {
        for (const auto& [x, c] : a.terms()) {
            if (auto row = ball.find(g.multiply(x, ball.elements[col])))
                trips.emplace_back(static_cast<int>(*row), static_cast<int>(col), c);
        }
    }
    SparseC m(static_cast<int>(ball.size()), static_cast<int>(ball.size()));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

enum class Transform { Real, Line, Square };

fftw_complex* as_fftw(Complex* p)
{
    return reinterpret_cast<fftw_complex*>(p);
}

// Unnormalized backward transforms (sum_k c_k e^{+2 pi i jk/n}). The planner is
// not thread-safe, so plans are made once per size under a lock; executing them
// on fresh arrays is.
fftw_plan backward_plan(Transform kind, int n)
{
    static std::mutex mutex;
    static std::map<std::pair<Transform, int>, fftw_plan> plans;
    std::lock_guard lock(mutex);
    auto& plan = plans[{kind, n}];
    if (plan)
        return plan;
    const std::size_t size = kind == Transform::Square ? static_cast<std::size_t>(n) * n : static_cast<std::size_t>(n);
    std::vector<Complex> in(size), out(size);
    std::vector<double> real(size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    switch (kind) {
    case Transform::Real: plan = fftw_plan_dft_c2r_1d(n, as_fftw(in.data()), real.data(), flags); break;
    case Transform::Line:
        plan = fftw_plan_dft_1d(n, as_fftw(in.data()), as_fftw(out.data()), FFTW_BACKWARD, flags);
        break;
    case Transform::Square:
        plan = fftw_plan_dft_2d(n, n, as_fftw(in.data()), as_fftw(out.data()), FFTW_BACKWARD, flags);
        break;
    }
    return plan;
}

struct FourierGrid
{
    int n = 0;                    // points per axis
    bool direct = false;
    std::vector<Complex> values;  // row-major for d = 2
};

// Largest |k_i| over the support, summed over the axes.
long frequency_reach(const AlgebraElement& a, int d)
{
    long reach[2] = {0, 0};
    for (const auto& [x, c] : a.terms())
        for (int i = 0; i < d; ++i)
            reach[i] = std::max(reach[i], static_cast<long>(std::abs(x.nf[static_cast<std::size_t>(i)])));
    return reach[0] + reach[1];
}

// Values of sum_k a(k) e^{i k.theta} on the uniform grid of Z^d (d = 1, 2) by FFT.
// The grid has at least `base` and `per_reach` * reach points per axis and never
// aliases the support.
FourierGrid fourier_grid(const AlgebraElement& a, int d, int base, int per_reach = 0)
{
    const long reach = frequency_reach(a, d);
    int n = base;
    while (n < 2 * (reach + 1) || n < per_reach * reach)
        n *= 2;
    FourierGrid out;
    out.n = n;
    auto wrap = [n](Coord k) { return static_cast<std::size_t>(((k % n) + n) % n); };
    if (a.terms().size() <= 8) {
        // sparse: direct evaluation is cheap and exact at theta = 0, pi
        out.direct = true;
        const double h = 2.0 * std::numbers::pi / n;
        const std::size_t points = d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
        out.values.assign(points, 0.0);
        for (std::size_t p = 0; p < points; ++p) {
            const double t0 = h * static_cast<double>(d == 1 ? p : p / static_cast<std::size_t>(n));
            const double t1 = d == 1 ? 0.0 : h * static_cast<double>(p % static_cast<std::size_t>(n));
            Complex v = 0.0;
            for (const auto& [x, c] : a.terms()) {
                const double phase = t0 * static_cast<double>(x.nf[0]) + (d == 1 ? 0.0 : t1 * static_cast<double>(x.nf[1]));
                v += c * std::polar(1.0, phase);
            }
            out.values[p] = v;
        }
        return out;
    }
    if (d == 1) {
        std::vector<Complex> coeff(static_cast<std::size_t>(n), 0.0);
        for (const auto& [x, c] : a.terms())
            coeff[wrap(x.nf[0])] += c;
        bool hermitian = true;
        for (std::size_t k = 0; k < coeff.size() && hermitian; ++k)
            hermitian = coeff[(coeff.size() - k) % coeff.size()] == std::conj(coeff[k]);
        if (hermitian) {
            // real values from the half spectrum
            std::vector<double> real(static_cast<std::size_t>(n));
            fftw_execute_dft_c2r(backward_plan(Transform::Real, n), as_fftw(coeff.data()), real.data());
            out.values.assign(real.begin(), real.end());
        } else {
            out.values.resize(coeff.size());
            fftw_execute_dft(backward_plan(Transform::Line, n), as_fftw(coeff.data()), as_fftw(out.values.data()));
        }
        return out;
    }
    const auto un = static_cast<std::size_t>(n);
    std::vector<Complex> grid(un * un, 0.0);
    for (const auto& [x, c] : a.terms())
        grid[wrap(x.nf[0]) * un + wrap(x.nf[1])] += c;
    out.values.resize(grid.size());
    fftw_execute_dft(backward_plan(Transform::Square, n), as_fftw(grid.data()), as_fftw(out.values.data()));
    return out;
}

// Rounding bound for FFT evaluation of a sum with l^1 norm l1.
double fft_slack(const FourierGrid& grid, double l1)
{
    if (grid.direct)
        return 0.0;
    const int n = grid.n;
    return 64.0 * std::log2(static_cast<double>(n)) * kEps * l1;
}

}  // namespace

// ---------------------------------------------------------------------------
// AlgebraElement

AlgebraElement::AlgebraElement(GroupPtr group) : group_(std::move(group))
{
    if (!group_)
        throw StructuralError("algebra element requires a group");
}

AlgebraElement AlgebraElement::delta(GroupPtr group, const GroupElement& x, Complex c)
{
    AlgebraElement a(std::move(group));
    a.add(x, c);
    return a;
}

AlgebraElement AlgebraElement::unit(GroupPtr group)
{
    GroupElement e = group->identity();
    return delta(std::move(group), e, 1.0);
}

Complex AlgebraElement::coefficient(const GroupElement& x) const
{
    auto it = terms_.find(x);
    return it == terms_.end() ? Complex(0.0) : it->second;
}

void AlgebraElement::add(const GroupElement& x, Complex c)
{
    group_->validate(x);
    if (c == Complex(0.0))
        return;
    auto [it, inserted] = terms_.emplace(x, c);
    if (!inserted) {
        it->second += c;
        if (it->second == Complex(0.0))
            terms_.erase(it);
    }
}

std::vector<GroupElement> AlgebraElement::support() const
{
    std::vector<GroupElement> s;
    s.reserve(terms_.size());
    for (const auto& [x, c] : terms_)
        s.push_back(x);
    return s;
}

int AlgebraElement::support_radius() const
{
    int r = 0;
    for (const auto& [x, c] : terms_)
        r = std::max(r, group_->word_length(x));
    return r;
}

double AlgebraElement::l1_norm() const
{
    double s = 0.0;
    for (const auto& [x, c] : terms_)
        s += std::abs(c);
    return s;
}

double AlgebraElement::l2_norm() const
{
    double s = 0.0;
    for (const auto& [x, c] : terms_)
        s += std::norm(c);
    return std::sqrt(s);
}

double AlgebraElement::weighted_l1() const
{
    double s = 0.0;
    for (const auto& [x, c] : terms_)
        s += std::abs(c) * group_->word_length(x);
    return s;
}

void AlgebraElement::check_same_group(const AlgebraElement& o) const
{
    if (group_ != o.group_ && group_->name() != o.group_->name())
        throw StructuralError(fmt::format("group mismatch: {} vs {}", group_->name(), o.group_->name()));
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const
{
    return combine(o, 1.0);
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& o) const
{
    return combine(o, -1.0);
}

// this + sign * o; both supports are already validated and sorted
AlgebraElement AlgebraElement::combine(const AlgebraElement& o, double sign) const
{
    check_same_group(o);
    AlgebraElement r = *this;
    auto hint = r.terms_.begin();
    for (const auto& [x, c] : o.terms_) {
        hint = r.terms_.lower_bound(x);
        if (hint != r.terms_.end() && hint->first == x) {
            hint->second += sign * c;
            if (hint->second == Complex(0.0))
                hint = r.terms_.erase(hint);
        } else {
            hint = r.terms_.emplace_hint(hint, x, sign * c);
        }
    }
    return r;
}

AlgebraElement AlgebraElement::operator*(Complex s) const
{
    AlgebraElement r(group_);
    if (s == Complex(0.0))
        return r;
    r.terms_ = terms_;
    for (auto it = r.terms_.begin(); it != r.terms_.end();) {
        it->second *= s;
        it = it->second == Complex(0.0) ? r.terms_.erase(it) : std::next(it);
    }
    return r;
}

bool AlgebraElement::operator==(const AlgebraElement& o) const
{
    return group_->name() == o.group_->name() && terms_ == o.terms_;
}

nlohmann::json AlgebraElement::to_json() const
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [x, c] : terms_)
        terms.push_back(nlohmann::json::array({x.nf, c.real(), c.imag()}));
    return {{"group", group_->name()}, {"terms", terms}};
}

AlgebraElement AlgebraElement::from_json(const nlohmann::json& j, GroupPtr group)
{
    if (j.contains("group") && j.at("group").get<std::string>() != group->name())
        throw StructuralError("element JSON is for group " + j.at("group").get<std::string>() +
                              ", expected " + group->name());
    const auto& terms = j.contains("terms") ? j.at("terms") : j;
    AlgebraElement a(group);
    for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 3)
            throw StructuralError("element term must be [normal-form, re, im]");
        GroupElement x(t[0].get<std::vector<Coord>>());
        a.add(x, Complex(t[1].get<double>(), t[2].get<double>()));
    }
    return a;
}

// ---------------------------------------------------------------------------
// PositiveDefiniteKernel

PositiveDefiniteKernel::PositiveDefiniteKernel(GroupPtr group, std::string name)
    : group_(std::move(group)), name_(std::move(name))
{
}

Complex PositiveDefiniteKernel::value(const GroupElement& x) const
{
    if (constant_one_)
        return 1.0;
    auto it = values_.find(x);
    return it == values_.end() ? Complex(0.0) : it->second;
}

std::optional<Rational> PositiveDefiniteKernel::exact_value(const GroupElement& x) const
{
    if (!exact_)
        return std::nullopt;
    if (constant_one_)
        return Rational(1);
    auto it = exact_values_.find(x);
    return it == exact_values_.end() ? Rational(0) : it->second;
}

bool PositiveDefiniteKernel::finitely_supported() const
{
    return !constant_one_ || group_->is_finite();
}

std::vector<GroupElement> PositiveDefiniteKernel::support() const
{
    if (constant_one_) {
        if (!group_->is_finite())
            throw PreconditionError("the counit kernel has infinite support on " + group_->name());
        return group_->all_elements();
    }
    std::vector<GroupElement> s;
    for (const auto& [x, v] : values_)
        if (v != Complex(0.0))
            s.push_back(x);
    return s;
}

bool PositiveDefiniteKernel::is_real() const
{
    for (const auto& [x, v] : values_)
        if (v.imag() != 0.0)
            return false;
    return true;
}

void PositiveDefiniteKernel::set_value(const GroupElement& x, Complex v)
{
    group_->validate(x);
    if (v == Complex(0.0))
        values_.erase(x);
    else
        values_[x] = v;
    exact_ = false;
    exact_values_.clear();
}

void PositiveDefiniteKernel::set_exact_value(const GroupElement& x, const Rational& v)
{
    group_->validate(x);
    bool keep_exact = exact_;
    if (v == 0)
        values_.erase(x);
    else
        values_[x] = v.convert_to<double>();
    exact_ = keep_exact;
    if (!exact_)
        return;
    if (v == 0)
        exact_values_.erase(x);
    else
        exact_values_[x] = v;
}

PositiveDefiniteKernel counit_kernel(const GroupPtr& group)
{
    PositiveDefiniteKernel k(group, "counit");
    if (group->is_finite()) {
        auto elems = group->all_elements();
        AlgebraElement xi(group);
        const double amp = 1.0 / std::sqrt(static_cast<double>(elems.size()));
        for (const auto& x : elems) {
            k.set_exact_value(x, Rational(1));
            xi.add(x, amp);
        }
        k.add_witness({Rational(1), xi});
    }
    k.mark_constant_one();
    return k;
}

PositiveDefiniteKernel convex_combination(const std::vector<std::pair<Rational, PositiveDefiniteKernel>>& parts,
                                          std::string name)
{
    if (parts.empty())
        throw PreconditionError("convex combination of no kernels");
    GroupPtr g = parts.front().second.group();
    Rational total = 0;
    bool exact = true, all_one = true;
    for (const auto& [w, k] : parts) {
        if (w < 0)
            throw PreconditionError("convex weights must be nonnegative");
        if (k.group()->name() != g->name())
            throw StructuralError("convex combination across groups");
        total += w;
        exact = exact && k.has_exact_values();
        all_one = all_one && k.is_constant_one();
    }
    if (total != 1)
        throw PreconditionError("convex weights must sum to one");
    PositiveDefiniteKernel out(g, std::move(name));
    if (all_one) {
        out.mark_constant_one();
        return out;
    }
    for (const auto& [w, k] : parts)
        if (k.is_constant_one() && !k.finitely_supported())
            throw PreconditionError("convex combination with the counit on an infinite group has infinite support");
    std::map<GroupElement, Rational> exact_sum;
    std::map<GroupElement, Complex> sum;
    for (const auto& [w, k] : parts) {
        double wd = w.convert_to<double>();
        for (const auto& x : k.support()) {
            sum[x] += wd * k.value(x);
            if (exact)
                exact_sum[x] += w * *k.exact_value(x);
        }
        for (const auto& wit : k.witnesses())
            out.add_witness({w * wit.weight, wit.vector});
    }
    if (exact) {
        for (const auto& [x, v] : exact_sum)
            out.set_exact_value(x, v);
    } else {
        for (const auto& [x, v] : sum)
            out.set_value(x, v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// operations

AlgebraElement convolve(const AlgebraElement& a, const AlgebraElement& b)
{
    if (a.group()->name() != b.group()->name())
        throw StructuralError(fmt::format("group mismatch: {} vs {}", a.group()->name(), b.group()->name()));
    AlgebraElement r(a.group());
    const auto& g = *a.group();
    for (const auto& [x, cx] : a.terms())
        for (const auto& [y, cy] : b.terms())
            r.add(g.multiply(x, y), cx * cy);
    return r;
}

AlgebraElement involution(const AlgebraElement& a)
{
    AlgebraElement r(a.group());
    for (const auto& [x, c] : a.terms())
        r.add(a.group()->inverse(x), std::conj(c));
    return r;
}

Complex haar_state(const AlgebraElement& a)
{
    return a.coefficient(a.group()->identity());
}

Complex counit(const AlgebraElement& a)
{
    Complex s = 0.0;
    for (const auto& [x, c] : a.terms())
        s += c;
    return s;
}

bool is_self_adjoint(const AlgebraElement& a, double tol)
{
    AlgebraElement d = a - involution(a);
    for (const auto& [x, c] : d.terms())
        if (std::abs(c) > tol)
            return false;
    return true;
}

AlgebraElement symmetrize(const AlgebraElement& a)
{
    return (a + involution(a)) * Complex(0.5);
}

std::optional<double> abelian_norm_upper(const AlgebraElement& a)
{
    const auto& g = *a.group();
    const auto& id = g.id();
    if (a.is_zero())
        return 0.0;
    const double l1 = a.l1_norm();
    const double slack = 16.0 * kEps * l1;
    if (id.family == Family::Cyclic) {
        const int m = id.parameter;
        double best = 0.0;
        for (int k = 0; k < m; ++k) {
            Complex f = 0.0;
            for (const auto& [x, c] : a.terms())
                f += c * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * x.nf[0]) / m);
            best = std::max(best, std::abs(f));
        }
        return std::min(l1, best + slack);
    }
    if (id.family == Family::FreeAbelian && id.parameter <= 2) {
        const int d = id.parameter;
        auto grid = fourier_grid(a, d, d == 1 ? 64 : 32, 16);
        const double h = 2.0 * std::numbers::pi / grid.n;
        double lipschitz = 0.0;
        for (const auto& [x, c] : a.terms()) {
            double k1 = 0.0;
            for (Coord v : x.nf)
                k1 += std::abs(static_cast<double>(v));
            lipschitz += std::abs(c) * k1;
        }
        double best = 0.0;
        for (const auto& v : grid.values)
            best = std::max(best, std::abs(v));
        best += fft_slack(grid, l1);
        // every point is within h/2 (per axis) of a grid point
        double bound = best + 0.5 * h * lipschitz;
        // at a maximum of Re(e^{-i alpha} f) the gradient vanishes and Bernstein bounds
        // the Hessian, so sup|f| (1 - (K pi / n)^2 / 2) <= max over the grid
        const double kh = static_cast<double>(frequency_reach(a, d)) * std::numbers::pi / grid.n;
        if (kh * kh < 1.0)
            bound = std::min(bound, best / (1.0 - 0.5 * kh * kh));
        return std::min(l1, bound + slack);
    }
    return std::nullopt;
}

NormEstimate operator_norm_window(const AlgebraElement& a, int window, const NormOptions& opt)
{
    const int radius = a.support_radius();
    if (window < radius)
        throw PreconditionError(
            fmt::format("window {} is smaller than the support radius {}", window, radius));
    NormEstimate est;
    est.window = window;
    const double l1 = a.l1_norm();
    est.upper = l1;
    if (a.is_zero()) {
        est.method = "zero";
        return est;
    }
    if (a.terms().size() == 1) {
        // weighted partial permutation: the norm is the coefficient modulus
        est.lower = est.upper = std::abs(a.terms().begin()->second);
        est.method = "monomial";
        return est;
    }

    const auto ball = a.group()->ball_index(window);
    SparseC m = left_convolution_matrix(a, *ball);
    const bool full_finite = a.group()->is_finite() && ball->size() == *a.group()->order();
    TopSingular top = top_singular(m, opt.dense_limit, opt.tolerance, opt.max_iterations);
    est.lower = top.sigma;
    est.iterations = top.iterations;
    est.converged = top.converged;
    est.method = top.dense ? "dense" : (top.converged ? "power-iteration" : "power-iteration(unconverged)");

    if (auto fourier = abelian_norm_upper(a))
        est.upper = std::min(est.upper, *fourier);
    if (full_finite && est.method == "dense")
        est.upper = std::min(est.upper, est.lower * (1.0 + 64.0 * kEps) + 64.0 * kEps);
    est.upper = std::max(est.upper, est.lower);
    return est;
}

double operator_norm_upper(const AlgebraElement& a)
{
    if (a.is_zero())
        return 0.0;
    if (a.terms().size() == 1)
        return std::abs(a.terms().begin()->second);
    if (auto fourier = abelian_norm_upper(a))
        return *fourier;
    const auto& g = a.group();
    if (g->is_finite() && *g->order() <= 300)
        return operator_norm_window(a, g->diameter()).upper;
    return a.l1_norm();
}

double quotient_norm_lower(const AlgebraElement& a, int window)
{
    if (a.is_zero())
        return 0.0;
    const auto& g = *a.group();
    const auto& id = g.id();
    auto spread_of = [](double lo, double hi) { return 0.5 * (hi - lo); };
    if (id.family == Family::Cyclic) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int k = 0; k < id.parameter; ++k) {
            Complex f = 0.0;
            for (const auto& [x, c] : a.terms())
                f += c * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * x.nf[0]) / id.parameter);
            lo = std::min(lo, f.real());
            hi = std::max(hi, f.real());
        }
        return spread_of(lo, hi);
    }
    if (id.family == Family::FreeAbelian && id.parameter <= 2) {
        auto grid = fourier_grid(a, id.parameter, id.parameter == 1 ? 64 : 32, 64);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& v : grid.values) {
            lo = std::min(lo, v.real());
            hi = std::max(hi, v.real());
        }
        return std::max(0.0, spread_of(lo, hi) - fft_slack(grid, a.l1_norm()));
    }
    // compression to a ball: its numerical range sits inside that of lambda(a)
    int w = std::max(window, a.support_radius());
    while (w > a.support_radius() && g.ball_index(w)->size() > 1500)
        --w;
    auto ball = g.ball_index(w);
    Eigen::MatrixXcd dense(left_convolution_matrix(a, *ball));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return spread_of(ev(0), ev(ev.size() - 1));
}

PositiveDefiniteKernel vector_state_kernel(const AlgebraElement& xi, std::string name)
{
    const double norm = xi.l2_norm();
    if (std::abs(norm - 1.0) > 1e-12)
        throw PreconditionError(fmt::format("vector state requires a unit vector, got l2 norm {:.17g}", norm));
    const auto& g = *xi.group();
    std::map<GroupElement, Complex> phi;
    for (const auto& [w, cw] : xi.terms())
        for (const auto& [z, cz] : xi.terms())
            phi[g.multiply(w, g.inverse(z))] += std::conj(cw) * cz;
    PositiveDefiniteKernel k(xi.group(), std::move(name));
    for (const auto& [x, v] : phi)
        if (v != Complex(0.0))
            k.set_value(x, v);
    k.add_witness({Rational(1), xi});
    return k;
}

}  // namespace qtrunc
