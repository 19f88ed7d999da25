#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qtrunc/lp.hpp"  // Rational

namespace qtrunc {

/**
 * Exact element of the cyclotomic field Q(zeta_n), stored as rational
 * coefficients of 1, zeta, ..., zeta^{phi(n)-1} after reduction modulo the
 * n-th cyclotomic polynomial, so equality is coefficientwise. Binary
 * operations on different orders lift both operands to the lcm order.
 */
class Cyclotomic
{
public:
    Cyclotomic() : coeffs_{Rational(0)} {}
    Cyclotomic(const Rational& r) : coeffs_{r} {}  // NOLINT(implicit)
    Cyclotomic(long v) : coeffs_{Rational(v)} {}   // NOLINT(implicit)

    /// zeta_order^power
    static Cyclotomic zeta(int order, long power);

    int order() const { return order_; }
    const std::vector<Rational>& coeffs() const { return coeffs_; }

    Cyclotomic operator+(const Cyclotomic& o) const;
    Cyclotomic operator-(const Cyclotomic& o) const;
    Cyclotomic operator*(const Cyclotomic& o) const;
    Cyclotomic operator-() const;
    Cyclotomic& operator+=(const Cyclotomic& o) { return *this = *this + o; }
    Cyclotomic& operator-=(const Cyclotomic& o) { return *this = *this - o; }
    Cyclotomic& operator*=(const Cyclotomic& o) { return *this = *this * o; }

    /// Complex conjugate (zeta -> zeta^{-1}).
    Cyclotomic conj() const;

    bool is_zero() const;
    bool is_rational() const;
    /// Throws PreconditionError if the value is not rational.
    Rational to_rational() const;
    std::complex<double> to_complex() const;

    bool operator==(const Cyclotomic& o) const;
    bool operator!=(const Cyclotomic& o) const { return !(*this == o); }

    std::string to_string() const;

    /// Builds the value sum_i c[i] zeta_order^i (c may have any length).
    static Cyclotomic from_powers(int order, const std::vector<Rational>& c);

private:
    Cyclotomic lift(int new_order) const;

    int order_ = 1;
    std::vector<Rational> coeffs_;
};

/// Integer coefficients (low degree first) of the n-th cyclotomic polynomial.
const std::vector<long>& cyclotomic_polynomial(int n);

std::string rational_to_string(const Rational& r);

}  // namespace qtrunc
