#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ssikit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool is_symmetric(const Matrix& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Lower-triangular L with L*L^T = m + jitter*I.
inline Matrix cholesky_sqrt(const Matrix& m, double jitter = 0.0) {
    if (!is_symmetric(m, 1e-8))
        throw std::invalid_argument("cholesky_sqrt: matrix is not symmetric");
    if (jitter < 0.0)
        throw std::invalid_argument("cholesky_sqrt: negative jitter");
    Matrix shifted = symmetrized(m);
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "cholesky_sqrt: factorization failed for " << m.rows() << "x" << m.cols()
            << " matrix with jitter " << jitter;
        throw std::runtime_error(msg.str());
    }
    return llt.matrixL();
}

struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;  // jitter actually applied
};

/// Cholesky with jitter escalation 0, 1e-12, 1e-10, 1e-8 (scaled by trace/dim)
/// for near-singular covariance blocks.
inline CholeskyFactor cholesky_sqrt_auto(const Matrix& m) {
    const double scale =
        m.rows() > 0 ? std::max(m.trace() / static_cast<double>(m.rows()), 0.0) : 0.0;
    const double ladder[] = {0.0, 1e-12, 1e-10, 1e-8};
    std::string last_error;
    for (double step : ladder) {
        double jitter = step * scale;
        try {
            return {cholesky_sqrt(m, jitter), jitter};
        } catch (const std::runtime_error& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error("cholesky_sqrt_auto: factorization failed after jitter escalation (" +
                             last_error + ")");
}

/// Solve A x = b for symmetric positive definite A, with jitter fallback.
inline Matrix solve_spd(const Matrix& a, const Matrix& b) {
    CholeskyFactor f = cholesky_sqrt_auto(a);
    Matrix x = f.lower.triangularView<Eigen::Lower>().solve(b);
    f.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

/// Symmetric square root of an SPD matrix via eigendecomposition.
inline Matrix spd_sqrt(const Matrix& m, double min_eig = 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spd_sqrt: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() < min_eig)
        throw std::runtime_error("spd_sqrt: matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

inline Matrix spd_inv_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("spd_inv_sqrt: matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

/// Flip column signs so the largest-magnitude entry of each column of v1 is
/// positive; the paired columns of v2 (if given) flip together.
inline void fix_column_signs(Matrix& v1, Matrix* v2 = nullptr) {
    for (Index c = 0; c < v1.cols(); ++c) {
        Index imax = 0;
        v1.col(c).cwiseAbs().maxCoeff(&imax);
        if (v1(imax, c) < 0.0) {
            v1.col(c) = -v1.col(c);
            if (v2) v2->col(c) = -v2->col(c);
        }
    }
}

/// Principal angles (radians, ascending) between the column spaces of a and b.
inline Vector principal_angles(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("principal_angles: row dimensions differ");
    auto orthonormalize = [](const Matrix& m) {
        Eigen::HouseholderQR<Matrix> qr(m);
        Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
        return q;
    };
    Matrix qa = orthonormalize(a);
    Matrix qb = orthonormalize(b);
    Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
    Vector cosines = svd.singularValues().cwiseMin(1.0).cwiseMax(-1.0);
    Vector angles(cosines.size());
    for (Index i = 0; i < cosines.size(); ++i)
        angles(i) = std::acos(cosines(cosines.size() - 1 - i));
    return angles;
}

/// Largest principal angle, sine-based so small angles keep full precision
/// (the cosine route bottoms out near sqrt(machine epsilon)).
inline double max_principal_angle(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("max_principal_angle: row dimensions differ");
    auto orthonormalize = [](const Matrix& m) {
        Eigen::HouseholderQR<Matrix> qr(m);
        return Matrix(qr.householderQ() * Matrix::Identity(m.rows(), m.cols()));
    };
    Matrix qa = orthonormalize(a);
    Matrix qb = orthonormalize(b);
    Matrix resid = qb - qa * (qa.transpose() * qb);
    Eigen::JacobiSVD<Matrix> svd(resid);
    double sine = std::min(svd.singularValues()(0), 1.0);
    return std::asin(sine);
}

/// Digamma for x > 0: recurrence up to x >= 12, then asymptotic series.
inline double digamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("digamma: requires x > 0");
    double result = 0.0;
    while (x < 12.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 -
                      inv2 * (1.0 / 120.0 -
                              inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    return result;
}

}  // namespace ssikit
