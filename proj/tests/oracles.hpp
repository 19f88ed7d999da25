#pragma once

// Brute-force reference computations used to freeze expected values. They
// share no code with the library beyond plain containers and Eigen.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Triple = std::array<long, 3>;

inline Triple heis_mul(const Triple& x, const Triple& y)
{
    return {x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]};
}

/// Word lengths in the Heisenberg group for generators x^{+-1}, y^{+-1}, by BFS to `radius`.
inline std::map<Triple, int> heisenberg_bfs(int radius)
{
    const std::vector<Triple> gens{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
    std::map<Triple, int> dist{{{0, 0, 0}, 0}};
    std::queue<Triple> q;
    q.push({0, 0, 0});
    while (!q.empty()) {
        Triple x = q.front();
        q.pop();
        int d = dist[x];
        if (d == radius)
            continue;
        for (const auto& g : gens) {
            Triple y = heis_mul(x, g);
            if (!dist.count(y)) {
                dist[y] = d + 1;
                q.push(y);
            }
        }
    }
    return dist;
}

/// Largest |eigenvalue| of the adjacency matrix of a path with `vertices` vertices.
inline double path_graph_top_eigenvalue(int vertices)
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(vertices, vertices);
    for (int i = 0; i + 1 < vertices; ++i)
        a(i, i + 1) = a(i + 1, i) = 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// |F cap (k + F)| / |F| for F = {0, ..., n-1} in Z.
inline double fejer_overlap(int n, long k)
{
    int count = 0;
    for (long x = 0; x < n; ++x)
        if (x - k >= 0 && x - k < n)
            ++count;
    return static_cast<double>(count) / n;
}

/// Midpoint quadrature of (1/2pi) int_{-pi}^{pi} |theta| F_n(theta) dtheta, with
/// F_n(theta) = sum_{|k|<n} (1 - |k|/n) e^{ik theta} summed in closed form.
inline double fejer_transport_quadrature(int n, long points = 1000000)
{
    const double pi = std::numbers::pi;
    const double h = 2.0 * pi / static_cast<double>(points);
    double acc = 0.0;
    for (long j = 0; j < points; ++j) {
        double t = -pi + (static_cast<double>(j) + 0.5) * h;
        double s = std::sin(0.5 * n * t), s1 = std::sin(0.5 * t);
        double f = s1 == 0.0 ? n : (s * s) / (n * s1 * s1);
        acc += std::abs(t) * f;
    }
    return acc * h / (2.0 * pi);
}

}  // namespace oracle
