#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qtrunc {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

struct TopSingular
{
    double sigma = 0.0;
    Eigen::VectorXcd v;  // right singular vector (unit), empty when sigma == 0
    std::size_t iterations = 0;
    bool converged = true;
    bool dense = false;
};

/// Largest singular value of m, dense (Hermitian/skew-Hermitian eigen solver or
/// SVD) up to `dense_limit` rows, power iteration on m^H m beyond. Every
/// returned sigma is attained as |m v|, so it never exceeds the true value by
/// more than rounding.
TopSingular top_singular(const SparseC& m, std::size_t dense_limit, double tolerance, std::size_t max_iterations);

}  // namespace qtrunc
