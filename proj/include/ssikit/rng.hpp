#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "ssikit/linalg.hpp"

namespace ssikit {

/// Deterministic random source. All variate transforms are implemented here
/// rather than through std:: distributions so that a given seed produces the
/// same stream on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_positive() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller, pairs cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_positive();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Gamma(shape, rate) via Marsaglia-Tsang squeeze.
    double gamma(double shape, double rate = 1.0) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
        if (shape < 1.0) {
            double u = uniform_positive();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform_positive();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

    Matrix normal_matrix(Index rows, Index cols, double std_dev = 1.0) {
        Matrix m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) m(r, c) = std_dev * normal();
        return m;
    }

    Vector normal_vector(Index size, double std_dev = 1.0) {
        Vector v(size);
        for (Index i = 0; i < size; ++i) v(i) = std_dev * normal();
        return v;
    }

    /// Draw from the inverse Wishart with identity scale matrix via the
    /// Bartlett decomposition of the corresponding Wishart sample.
    Matrix inverse_wishart_identity(Index dim, double dof) {
        if (dof < static_cast<double>(dim))
            throw std::invalid_argument("Rng::inverse_wishart_identity: dof must be >= dim");
        Matrix a = Matrix::Zero(dim, dim);
        for (Index i = 0; i < dim; ++i) {
            a(i, i) = std::sqrt(chi_squared(dof - static_cast<double>(i)));
            for (Index j = 0; j < i; ++j) a(i, j) = normal();
        }
        // (A A^T)^-1 through two triangular solves
        Matrix inv = a.triangularView<Eigen::Lower>().solve(Matrix::Identity(dim, dim));
        Matrix w = inv.transpose() * inv;
        return symmetrized(w);
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ssikit
