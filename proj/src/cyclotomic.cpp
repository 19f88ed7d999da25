#include "qtrunc/cyclotomic.hpp"

#include <map>
#include <mutex>
#include <numeric>

#include "qtrunc/errors.hpp"

namespace qtrunc {

namespace {

std::vector<long> divide_monic(std::vector<long> p, const std::vector<long>& divisor)
{
    std::vector<long> quot(p.size() - divisor.size() + 1, 0);
    for (std::size_t k = p.size(); k-- > divisor.size() - 1;) {
        long lead = p[k];
        std::size_t shift = k - (divisor.size() - 1);
        quot[shift] = lead;
        for (std::size_t t = 0; t < divisor.size(); ++t)
            p[shift + t] -= lead * divisor[t];
    }
    return quot;
}

}  // namespace

const std::vector<long>& cyclotomic_polynomial(int n)
{
    static std::mutex mutex;
    static std::map<int, std::vector<long>> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end())
        return it->second;
    // Phi_d = (x^d - 1) / prod_{e | d, e < d} Phi_e, for every divisor d of n in increasing order
    for (int d = 1; d <= n; ++d) {
        if (n % d != 0 || cache.count(d))
            continue;
        std::vector<long> p(static_cast<std::size_t>(d) + 1, 0);
        p[0] = -1;
        p[static_cast<std::size_t>(d)] = 1;
        for (int e = 1; e < d; ++e)
            if (d % e == 0)
                p = divide_monic(p, cache.at(e));
        cache.emplace(d, p);
    }
    return cache.at(n);
}

Cyclotomic Cyclotomic::from_powers(int order, const std::vector<Rational>& c)
{
    const auto& phi = cyclotomic_polynomial(order);
    const std::size_t deg = phi.size() - 1;
    // reduce exponents mod order first
    std::vector<Rational> p(std::max<std::size_t>(static_cast<std::size_t>(order), deg), Rational(0));
    for (std::size_t i = 0; i < c.size(); ++i)
        p[i % static_cast<std::size_t>(order)] += c[i];
    // reduce modulo the monic polynomial phi
    for (std::size_t k = p.size(); k-- > deg;) {
        if (p[k] == 0)
            continue;
        Rational lead = p[k];
        std::size_t shift = k - deg;
        for (std::size_t t = 0; t <= deg; ++t)
            p[shift + t] -= lead * phi[t];
    }
    Cyclotomic out;
    out.order_ = order;
    out.coeffs_.assign(p.begin(), p.begin() + static_cast<long>(deg));
    return out;
}

Cyclotomic Cyclotomic::zeta(int order, long power)
{
    if (order < 1)
        throw PreconditionError("cyclotomic order must be positive");
    long k = power % order;
    if (k < 0)
        k += order;
    std::vector<Rational> c(static_cast<std::size_t>(k) + 1, Rational(0));
    c[static_cast<std::size_t>(k)] = 1;
    return from_powers(order, c);
}

Cyclotomic Cyclotomic::lift(int new_order) const
{
    if (new_order == order_)
        return *this;
    int step = new_order / order_;
    std::vector<Rational> c(coeffs_.size() * static_cast<std::size_t>(step) + 1, Rational(0));
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        c[i * static_cast<std::size_t>(step)] = coeffs_[i];
    return from_powers(new_order, c);
}

Cyclotomic Cyclotomic::operator+(const Cyclotomic& o) const
{
    int L = std::lcm(order_, o.order_);
    Cyclotomic a = lift(L), b = o.lift(L);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        a.coeffs_[i] += b.coeffs_[i];
    return a;
}

Cyclotomic Cyclotomic::operator-(const Cyclotomic& o) const
{
    return *this + (-o);
}

Cyclotomic Cyclotomic::operator-() const
{
    Cyclotomic a = *this;
    for (auto& c : a.coeffs_)
        c = -c;
    return a;
}

Cyclotomic Cyclotomic::operator*(const Cyclotomic& o) const
{
    int L = std::lcm(order_, o.order_);
    Cyclotomic a = lift(L), b = o.lift(L);
    std::vector<Rational> prod(a.coeffs_.size() + b.coeffs_.size(), Rational(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        if (a.coeffs_[i] == 0)
            continue;
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
            if (b.coeffs_[j] != 0)
                prod[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return from_powers(L, prod);
}

Cyclotomic Cyclotomic::conj() const
{
    std::vector<Rational> c(static_cast<std::size_t>(order_), Rational(0));
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        c[(static_cast<std::size_t>(order_) - i) % static_cast<std::size_t>(order_)] += coeffs_[i];
    return from_powers(order_, c);
}

bool Cyclotomic::is_zero() const
{
    for (const auto& c : coeffs_)
        if (c != 0)
            return false;
    return true;
}

bool Cyclotomic::is_rational() const
{
    for (std::size_t i = 1; i < coeffs_.size(); ++i)
        if (coeffs_[i] != 0)
            return false;
    return true;
}

Rational Cyclotomic::to_rational() const
{
    if (!is_rational())
        throw PreconditionError("cyclotomic value " + to_string() + " is not rational");
    return coeffs_.empty() ? Rational(0) : coeffs_[0];
}

std::complex<double> Cyclotomic::to_complex() const
{
    std::complex<double> z = 0.0;
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0)
            continue;
        double angle = two_pi * static_cast<double>(i) / static_cast<double>(order_);
        z += coeffs_[i].convert_to<double>() * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return z;
}

bool Cyclotomic::operator==(const Cyclotomic& o) const
{
    return (*this - o).is_zero();
}

std::string rational_to_string(const Rational& r)
{
    return r.str();
}

std::string Cyclotomic::to_string() const
{
    if (is_rational())
        return rational_to_string(to_rational());
    std::string s;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0)
            continue;
        if (!s.empty())
            s += " + ";
        s += "(" + rational_to_string(coeffs_[i]) + ")";
        if (i > 0)
            s += "z" + std::to_string(order_) + "^" + std::to_string(i);
    }
    return s;
}

}  // namespace qtrunc
