#include "qtrunc/linalg.hpp"

#include <cmath>

namespace qtrunc {

namespace {

bool is_hermitian(const Eigen::MatrixXcd& m, double sign)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            if (m(i, j) != sign * std::conj(m(j, i)))
                return false;
    return true;
}

}  // namespace

TopSingular top_singular(const SparseC& m, std::size_t dense_limit, double tolerance, std::size_t max_iterations)
{
    TopSingular out;
    if (m.rows() == 0 || m.nonZeros() == 0)
        return out;
    if (static_cast<std::size_t>(m.rows()) <= dense_limit) {
        out.dense = true;
        out.iterations = 1;
        Eigen::MatrixXcd d(m);
        const bool herm = is_hermitian(d, 1.0);
        const bool skew = !herm && is_hermitian(d, -1.0);
        if (herm || skew) {
            Eigen::MatrixXcd h = skew ? Eigen::MatrixXcd(d * std::complex<double>(0.0, 1.0)) : d;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
            const auto& ev = es.eigenvalues();
            Eigen::Index k = std::abs(ev(0)) >= std::abs(ev(ev.size() - 1)) ? 0 : ev.size() - 1;
            out.v = es.eigenvectors().col(k);
        } else {
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(d, Eigen::ComputeThinV);
            out.v = svd.matrixV().col(0);
        }
        out.sigma = (m * out.v).norm();
        return out;
    }
    Eigen::VectorXcd v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = 1.0 + 0.1 * std::sin(static_cast<double>(i) + 1.0);
    v.normalize();
    double prev = 0.0;
    out.converged = false;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        Eigen::VectorXcd w = m * v;
        double sigma = w.norm();
        if (sigma >= out.sigma) {
            out.sigma = sigma;
            out.v = v;
        }
        out.iterations = it + 1;
        if (it > 0 && std::abs(sigma - prev) <= tolerance * std::max(sigma, 1e-300)) {
            out.converged = true;
            break;
        }
        prev = sigma;
        Eigen::VectorXcd u = m.adjoint() * w;
        double un = u.norm();
        if (un == 0.0) {
            out.converged = true;
            break;
        }
        v = u / un;
    }
    return out;
}

}  // namespace qtrunc
