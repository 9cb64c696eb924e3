#pragma once

#include <Eigen/Dense>

#include <sstream>
#include <stdexcept>

#include "ssikit/hankel.hpp"
#include "ssikit/linalg.hpp"

namespace ssikit {

/// Canonical correlation analysis result: paired singular vectors of the
/// whitened cross covariance and the correlations themselves (descending).
struct CcaResult {
    Matrix v1;   // D1 x d
    Matrix v2;   // D2 x d
    Vector rho;  // length d
};

struct SubspacePair {
    Matrix observability;    // (l*j) x d
    Matrix controllability;  // d x (l*j)
};

/// Closed-form probabilistic projection model. sigma1/sigma2 are the
/// block-diagonal covariance blocks.
struct ProjectionModel {
    Matrix w1;  // D1 x d
    Matrix w2;  // D2 x d
    Vector mu;  // length D1 + D2, zero for mean-centered data
    Matrix sigma1;
    Matrix sigma2;
    Index d = 0;
};

namespace detail {

struct Whitened {
    Matrix lf;  // lower Cholesky of sff
    Matrix lp;  // lower Cholesky of spp
    Matrix core;
};

inline Whitened whiten_cross(const CovarianceSet& cov) {
    Whitened w;
    w.lf = cholesky_sqrt_auto(cov.sff).lower;
    w.lp = cholesky_sqrt_auto(cov.spp).lower;
    // Lf^-1 sfp Lp^-T
    Matrix tmp = w.lf.triangularView<Eigen::Lower>().solve(cov.sfp);
    w.core = w.lp.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
    return w;
}

}  // namespace detail

/// Canonical correlations of future against past via SVD of the whitened
/// cross covariance. Sign convention: the largest-magnitude entry of each v1
/// column is positive.
inline CcaResult cca(const CovarianceSet& cov, Index d) {
    if (d < 1) throw std::invalid_argument("cca: latent dimension must be >= 1");
    const Index dim = cov.block_dim();
    if (d > dim)
        throw std::invalid_argument("cca: latent dimension exceeds block dimension");
    detail::Whitened w = detail::whiten_cross(cov);
    Eigen::JacobiSVD<Matrix> svd(w.core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    // An identically zero cross covariance is a valid input (independent
    // halves, all correlations zero); a relative collapse of the spectrum is
    // a rank failure.
    if (sv(0) > 1e-150) {
        Index rank = 0;
        const double tol = static_cast<double>(dim) * 1e-14 * sv(0);
        for (Index i = 0; i < sv.size(); ++i)
            if (sv(i) > tol) ++rank;
        if (rank < d) {
            std::ostringstream msg;
            msg << "cca: whitened cross covariance has rank " << rank << ", below requested "
                << d;
            throw std::runtime_error(msg.str());
        }
    }
    CcaResult out;
    out.v1 = svd.matrixU().leftCols(d);
    out.v2 = svd.matrixV().leftCols(d);
    out.rho = sv.head(d);
    fix_column_signs(out.v1, &out.v2);
    return out;
}

/// Observability and controllability factors of sfp at the truncation order
/// of the CCA result.
inline SubspacePair subspaces(const CcaResult& c, const CovarianceSet& cov) {
    detail::Whitened w = detail::whiten_cross(cov);
    Vector root = c.rho.cwiseMax(0.0).cwiseSqrt();
    SubspacePair out;
    out.observability = w.lf * c.v1 * root.asDiagonal();
    out.controllability = root.asDiagonal() * c.v2.transpose() * w.lp.transpose();
    return out;
}

/// Maximum likelihood solution of the probabilistic projection model.
/// With rotation = identity, w1 equals the observability matrix and w2^T the
/// controllability matrix.
inline ProjectionModel pcca_mle(const CovarianceSet& cov, Index d,
                                const Matrix* rotation = nullptr) {
    CcaResult c = cca(cov, d);
    detail::Whitened w = detail::whiten_cross(cov);
    Matrix r = Matrix::Identity(d, d);
    if (rotation) {
        if (rotation->rows() != d || rotation->cols() != d)
            throw std::invalid_argument("pcca_mle: rotation must be d x d");
        if ((rotation->transpose() * (*rotation) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() >
            1e-8)
            throw std::invalid_argument("pcca_mle: rotation matrix is not orthogonal");
        r = *rotation;
    }
    Vector root = c.rho.cwiseMax(0.0).cwiseSqrt();
    ProjectionModel model;
    model.d = d;
    model.w1 = w.lf * c.v1 * root.asDiagonal() * r;
    model.w2 = w.lp * c.v2 * root.asDiagonal() * r;
    model.mu = Vector::Zero(cov.sff.rows() + cov.spp.rows());
    model.sigma1 = symmetrized(cov.sff - model.w1 * model.w1.transpose());
    model.sigma2 = symmetrized(cov.spp - model.w2 * model.w2.transpose());
    return model;
}

}  // namespace ssikit
