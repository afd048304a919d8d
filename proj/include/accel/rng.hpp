#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace accel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Seeded generator shared by every randomized construction.
///
/// State update is the 64-bit LCG  s <- 6364136223846793005 * s + 1442695040888963407 (mod 2^64).
/// Uniforms take the top 53 bits of the state; normals use the Box–Muller cosine branch
/// with a cached sine partner. Nothing here depends on platform distribution objects.
class Rng {
public:
    using Engine = std::linear_congruential_engine<std::uint64_t, 6364136223846793005ULL,
                                                   1442695040888963407ULL, 0ULL>;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    Vector normal_vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    /// Column-major fill.
    Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

    /// Uniform point on the sphere of the given radius.
    Vector on_sphere(Eigen::Index n, double radius) {
        Vector v = normal_vector(n);
        double norm = v.norm();
        while (norm == 0.0) {
            v = normal_vector(n);
            norm = v.norm();
        }
        return (radius / norm) * v;
    }

private:
    Engine engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Seeded orthogonal matrix: Householder QR of a Gaussian matrix with R's diagonal made positive.
inline Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    const Matrix gauss = rng.normal_matrix(n, n);
    Eigen::HouseholderQR<Matrix> qr(gauss);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

} // namespace accel
