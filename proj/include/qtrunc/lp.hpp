#pragma once

// Dense two-phase tableau simplex for
//
//     minimize  c^T x   subject to  A x = b,  x >= 0,
//
// templated on the scalar so the same code runs in exact rational arithmetic
// (Bland's rule, zero tolerances) and in double precision (Dantzig pricing
// with a Bland fallback after repeated degenerate pivots). Duals y = c_B B^{-1}
// are read from the artificial columns, which are kept in the tableau.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace qtrunc {

using Rational = boost::multiprecision::mpq_rational;

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s)
{
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

template <class Scalar>
struct LpResult
{
    LpStatus status = LpStatus::IterationLimit;
    Scalar objective{};
    std::vector<Scalar> x;  // primal, size n
    std::vector<Scalar> y;  // equality-row duals, size m
    std::size_t iterations = 0;
};

struct LpOptions
{
    std::size_t max_iterations = 200000;
    double tolerance = 1e-9;        // reduced-cost / feasibility tolerance (double only)
    double pivot_tolerance = 1e-11; // smallest admissible pivot magnitude (double only)
};

namespace detail {

template <class Scalar>
constexpr bool is_exact_v = !std::is_floating_point_v<Scalar>;

template <class Scalar>
Scalar abs_value(const Scalar& v)
{
    if constexpr (is_exact_v<Scalar>)
        return boost::multiprecision::abs(v);
    else
        return std::abs(v);
}

template <class Scalar>
class Tableau
{
public:
    Tableau(const std::vector<std::vector<Scalar>>& A, const std::vector<Scalar>& b, const LpOptions& opt)
        : m_(A.size()), n_(A.empty() ? 0 : A.front().size()), opt_(opt)
    {
        width_ = n_ + m_ + 1;
        t_.assign(m_ * width_, Scalar(0));
        sign_.assign(m_, 1);
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            sign_[i] = b[i] < Scalar(0) ? -1 : 1;
            for (std::size_t j = 0; j < n_; ++j)
                at(i, j) = sign_[i] < 0 ? Scalar(-A[i][j]) : A[i][j];
            at(i, n_ + i) = Scalar(1);
            rhs(i) = sign_[i] < 0 ? Scalar(-b[i]) : b[i];
            basis_[i] = n_ + i;
        }
    }

    Scalar& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
    const Scalar& at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }
    Scalar& rhs(std::size_t i) { return t_[i * width_ + width_ - 1]; }

    bool negative(const Scalar& v) const
    {
        if constexpr (is_exact_v<Scalar>)
            return v < 0;
        else
            return v < -opt_.tolerance;
    }
    bool positive_pivot(const Scalar& v) const
    {
        if constexpr (is_exact_v<Scalar>)
            return v > 0;
        else
            return v > opt_.pivot_tolerance;
    }
    bool nonzero_pivot(const Scalar& v) const
    {
        if constexpr (is_exact_v<Scalar>)
            return v != 0;
        else
            return std::abs(v) > 1e-7;
    }

    void pivot(std::size_t r, std::size_t col, std::vector<Scalar>& cost, Scalar& cost_rhs)
    {
        Scalar p = at(r, col);
        Scalar* row = &t_[r * width_];
        for (std::size_t j = 0; j < width_; ++j)
            row[j] /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r)
                continue;
            Scalar f = at(i, col);
            if (f == Scalar(0))
                continue;
            Scalar* other = &t_[i * width_];
            if constexpr (is_exact_v<Scalar>) {
                for (std::size_t j = 0; j < width_; ++j)
                    if (row[j] != Scalar(0))
                        other[j] -= f * row[j];
            } else {
                for (std::size_t j = 0; j < width_; ++j)
                    other[j] -= f * row[j];
                other[col] = 0.0;
            }
        }
        Scalar f = cost[col];
        if (f != Scalar(0)) {
            for (std::size_t j = 0; j + 1 < width_; ++j)
                if (row[j] != Scalar(0))
                    cost[j] -= f * row[j];
            cost_rhs -= f * row[width_ - 1];
        }
        basis_[r] = col;
    }

    // Runs simplex iterations on the given reduced-cost row.
    LpStatus iterate(std::vector<Scalar>& cost, Scalar& cost_rhs, std::size_t allowed_columns,
                     std::size_t& iterations)
    {
        std::size_t degenerate_run = 0;
        while (true) {
            if (iterations >= opt_.max_iterations)
                return LpStatus::IterationLimit;
            bool bland = is_exact_v<Scalar> || degenerate_run > 50;
            std::size_t enter = allowed_columns;
            for (std::size_t j = 0; j < allowed_columns; ++j) {
                if (!negative(cost[j]))
                    continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (enter == allowed_columns || cost[j] < cost[enter])
                    enter = j;
            }
            if (enter == allowed_columns)
                return LpStatus::Optimal;

            std::size_t leave = m_;
            Scalar best_ratio{};
            for (std::size_t i = 0; i < m_; ++i) {
                const Scalar& a = at(i, enter);
                if (!positive_pivot(a))
                    continue;
                Scalar ratio = rhs(i) / a;
                if (leave == m_ || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_)
                return LpStatus::Unbounded;
            degenerate_run = best_ratio == Scalar(0) ? degenerate_run + 1 : 0;
            pivot(leave, enter, cost, cost_rhs);
            ++iterations;
        }
    }

    // Appends structural columns given in original (unnormalized) coordinates,
    // keeping the current basis: the tableau column is B^{-1} S a, read off the
    // artificial block, and the reduced cost is c_a - y^T S a.
    void append_columns(const std::vector<std::vector<Scalar>>& cols, const std::vector<Scalar>& col_cost,
                        std::vector<Scalar>& cost)
    {
        const std::size_t k = cols.size();
        const std::size_t new_width = width_ + k;
        std::vector<Scalar> t(m_ * new_width, Scalar(0));
        for (std::size_t i = 0; i < m_; ++i) {
            const Scalar* old_row = &t_[i * width_];
            Scalar* row = &t[i * new_width];
            std::copy(old_row, old_row + n_, row);
            std::copy(old_row + n_, old_row + width_, row + n_ + k);
            for (std::size_t q = 0; q < k; ++q) {
                Scalar v(0);
                for (std::size_t l = 0; l < m_; ++l)
                    if (cols[q][l] != Scalar(0))
                        v += old_row[n_ + l] * (sign_[l] < 0 ? Scalar(-cols[q][l]) : cols[q][l]);
                row[n_ + q] = v;
            }
        }
        std::vector<Scalar> new_cost(n_ + k + m_, Scalar(0));
        std::copy(cost.begin(), cost.begin() + static_cast<std::ptrdiff_t>(n_), new_cost.begin());
        std::copy(cost.begin() + static_cast<std::ptrdiff_t>(n_), cost.end(),
                  new_cost.begin() + static_cast<std::ptrdiff_t>(n_ + k));
        for (std::size_t q = 0; q < k; ++q) {
            Scalar d = col_cost[q];
            for (std::size_t l = 0; l < m_; ++l)
                if (cols[q][l] != Scalar(0))
                    d += cost[n_ + l] * (sign_[l] < 0 ? Scalar(-cols[q][l]) : cols[q][l]);
            new_cost[n_ + q] = d;
        }
        for (auto& b : basis_)
            if (b >= n_)
                b += k;
        t_ = std::move(t);
        cost = std::move(new_cost);
        n_ += k;
        width_ = new_width;
    }

    std::size_t m_, n_, width_;
    LpOptions opt_;
    std::vector<Scalar> t_;
    std::vector<int> sign_;
    std::vector<std::size_t> basis_;
};

}  // namespace detail

namespace detail {

// Phase 1 then phase 2 on a fresh tableau; leaves the final reduced-cost row in cost2.
template <class Scalar>
LpStatus two_phase(Tableau<Scalar>& tab, const std::vector<Scalar>& c, std::vector<Scalar>& cost2, Scalar& cost2_rhs,
                   std::size_t& iterations, const LpOptions& opt)
{
    const std::size_t m = tab.m_, n = tab.n_;
    std::vector<Scalar> cost(n + m, Scalar(0));
    Scalar cost_rhs(0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            cost[j] -= tab.at(i, j);
        cost_rhs -= tab.rhs(i);
    }
    LpStatus st = tab.iterate(cost, cost_rhs, n, iterations);
    if (st == LpStatus::IterationLimit)
        return st;
    Scalar infeasibility = -cost_rhs;
    bool infeasible;
    if constexpr (is_exact_v<Scalar>)
        infeasible = infeasibility != 0;
    else
        infeasible = infeasibility > opt.tolerance * std::max<double>(1.0, static_cast<double>(m));
    if (infeasible)
        return LpStatus::Infeasible;
    // Drive zero-level artificials out of the basis where possible; rows where
    // no structural pivot exists are redundant and keep their artificial at zero.
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basis_[i] < n)
            continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (tab.nonzero_pivot(tab.at(i, j))) {
                tab.pivot(i, j, cost, cost_rhs);
                break;
            }
        }
    }

    cost2.assign(n + m, Scalar(0));
    cost2_rhs = Scalar(0);
    for (std::size_t j = 0; j < n; ++j)
        cost2[j] = c[j];
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t bcol = tab.basis_[i];
        Scalar cb = bcol < n ? c[bcol] : Scalar(0);
        if (cb == Scalar(0))
            continue;
        for (std::size_t j = 0; j < n + m; ++j)
            if (tab.at(i, j) != Scalar(0))
                cost2[j] -= cb * tab.at(i, j);
        cost2_rhs -= cb * tab.rhs(i);
    }
    return tab.iterate(cost2, cost2_rhs, n, iterations);
}

template <class Scalar>
void extract(Tableau<Scalar>& tab, const std::vector<Scalar>& cost2, const Scalar& cost2_rhs, LpResult<Scalar>& res)
{
    const std::size_t m = tab.m_, n = tab.n_;
    res.x.assign(n, Scalar(0));
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis_[i] < n)
            res.x[tab.basis_[i]] = tab.rhs(i);
    res.objective = -cost2_rhs;
    // Reduced cost of artificial i is 0 - y'_i, with y' the duals of the sign-normalized rows.
    res.y.assign(m, Scalar(0));
    for (std::size_t i = 0; i < m; ++i) {
        Scalar yi = -cost2[n + i];
        res.y[i] = tab.sign_[i] < 0 ? Scalar(-yi) : yi;
    }
}

}  // namespace detail

/// Solves min c^T x s.t. A x = b, x >= 0. A is given row-major (m rows of n entries).
template <class Scalar>
LpResult<Scalar> solve_standard_form(const std::vector<std::vector<Scalar>>& A, const std::vector<Scalar>& b,
                                     const std::vector<Scalar>& c, const LpOptions& opt = {})
{
    LpResult<Scalar> res;
    detail::Tableau<Scalar> tab(A, b, opt);
    std::vector<Scalar> cost2;
    Scalar cost2_rhs(0);
    res.status = detail::two_phase(tab, c, cost2, cost2_rhs, res.iterations, opt);
    if (res.status == LpStatus::Optimal)
        detail::extract(tab, cost2, cost2_rhs, res);
    return res;
}

/// Solution of max c^T x s.t. G x <= h with x free, obtained from its dual
/// min h^T y s.t. G^T y = c, y >= 0. `multipliers` is the dual y (one per row of G).
template <class Scalar>
struct InequalityLpResult
{
    LpStatus status = LpStatus::IterationLimit;  // status of the primal max problem
    Scalar objective{};
    std::vector<Scalar> x;
    std::vector<Scalar> multipliers;
    std::size_t iterations = 0;
};

template <class Scalar>
InequalityLpResult<Scalar> solve_max_inequality(const std::vector<std::vector<Scalar>>& G,
                                                const std::vector<Scalar>& h, const std::vector<Scalar>& c,
                                                const LpOptions& opt = {})
{
    const std::size_t rows = G.size(), vars = c.size();
    std::vector<std::vector<Scalar>> At(vars, std::vector<Scalar>(rows, Scalar(0)));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < vars; ++j)
            At[j][i] = G[i][j];
    auto dual = solve_standard_form<Scalar>(At, c, h, opt);
    InequalityLpResult<Scalar> res;
    res.iterations = dual.iterations;
    switch (dual.status) {
    case LpStatus::Optimal: res.status = LpStatus::Optimal; break;
    case LpStatus::Infeasible: res.status = LpStatus::Unbounded; break;  // or primal infeasible
    case LpStatus::Unbounded: res.status = LpStatus::Infeasible; break;
    case LpStatus::IterationLimit: res.status = LpStatus::IterationLimit; break;
    }
    if (res.status != LpStatus::Optimal)
        return res;
    res.objective = dual.objective;
    res.x = dual.y;
    res.multipliers = dual.x;
    return res;
}

/**
 * max c^T x s.t. G x <= h (x free) where rows arrive in batches. Each solve
 * after the first appends the new rows as columns of the dual standard form
 * and resumes phase 2 from the previous optimal basis, which stays feasible.
 */
template <class Scalar>
class IncrementalInequalityLp
{
public:
    explicit IncrementalInequalityLp(std::vector<Scalar> c, LpOptions opt = {}) : c_(std::move(c)), opt_(opt) {}

    void add_row(std::vector<Scalar> g, Scalar h)
    {
        pending_g_.push_back(std::move(g));
        pending_h_.push_back(std::move(h));
    }
    std::size_t rows() const { return h_.size() + pending_h_.size(); }

    InequalityLpResult<Scalar> solve()
    {
        InequalityLpResult<Scalar> res;
        LpStatus st;
        std::size_t iterations = 0;
        if (tab_ && !pending_g_.empty()) {
            tab_->append_columns(pending_g_, pending_h_, cost_);
            absorb();
            st = tab_->iterate(cost_, cost_rhs_, tab_->n_, iterations);
        } else if (!tab_) {
            absorb();
            std::vector<std::vector<Scalar>> At(c_.size(), std::vector<Scalar>(g_.size(), Scalar(0)));
            for (std::size_t i = 0; i < g_.size(); ++i)
                for (std::size_t j = 0; j < c_.size(); ++j)
                    At[j][i] = g_[i][j];
            tab_.emplace(At, c_, opt_);
            st = detail::two_phase(*tab_, h_, cost_, cost_rhs_, iterations, opt_);
        } else {
            st = LpStatus::Optimal;
        }
        res.iterations = iterations;
        switch (st) {
        case LpStatus::Optimal: res.status = LpStatus::Optimal; break;
        case LpStatus::Infeasible: res.status = LpStatus::Unbounded; break;
        case LpStatus::Unbounded: res.status = LpStatus::Infeasible; break;
        case LpStatus::IterationLimit: res.status = LpStatus::IterationLimit; break;
        }
        if (res.status != LpStatus::Optimal) {
            tab_.reset();
            return res;
        }
        LpResult<Scalar> dual;
        detail::extract(*tab_, cost_, cost_rhs_, dual);
        res.objective = dual.objective;
        res.x = dual.y;
        res.multipliers = dual.x;
        return res;
    }

private:
    void absorb()
    {
        for (std::size_t i = 0; i < pending_g_.size(); ++i) {
            g_.push_back(std::move(pending_g_[i]));
            h_.push_back(std::move(pending_h_[i]));
        }
        pending_g_.clear();
        pending_h_.clear();
    }

    std::vector<Scalar> c_;
    LpOptions opt_;
    std::vector<std::vector<Scalar>> g_, pending_g_;
    std::vector<Scalar> h_, pending_h_;
    std::optional<detail::Tableau<Scalar>> tab_;
    std::vector<Scalar> cost_;
    Scalar cost_rhs_{};
};

}  // namespace qtrunc
