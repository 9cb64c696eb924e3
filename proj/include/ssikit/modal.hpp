#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ssikit/linalg.hpp"

namespace ssikit {

/// Discrete state/output matrix estimate at one model order.
struct StateSpaceEstimate {
    Matrix a_d;    // order x order
    Matrix c_out;  // l x order
    Index order = 0;
    double dt = 0.0;
};

/// Modal parameters at one model order.
struct ModalSet {
    std::vector<double> frequencies;     // Hz, ascending
    std::vector<double> damping_ratios;  // dimensionless
    Matrix mode_shapes;                  // l x m, one column per mode
    Index order = 0;
    std::vector<bool> spurious;  // unpaired real poles
};

/// Recover (A, C) from an extended observability matrix by shift invariance:
/// C is the first block row, A solves obs[:-l] A = obs[l:] in least squares.
inline StateSpaceEstimate system_matrices(const Matrix& observability, Index l, double dt) {
    const Index d = observability.cols();
    if (l < 1 || observability.rows() % l != 0)
        throw std::invalid_argument("system_matrices: observability rows must be a multiple of l");
    const Index j = observability.rows() / l;
    if (j < 2)
        throw std::invalid_argument(
            "system_matrices: need at least two block rows (j >= 2) for the shifted pair");
    if (!(dt > 0.0)) throw std::invalid_argument("system_matrices: dt must be positive");

    Matrix upper = observability.topRows((j - 1) * l);
    Matrix lower = observability.bottomRows((j - 1) * l);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(upper);
    cod.setThreshold(1e-12);
    if (cod.rank() < d) {
        std::ostringstream msg;
        msg << "system_matrices: observability is rank deficient (rank " << cod.rank()
            << " < order " << d << ")";
        throw std::runtime_error(msg.str());
    }
    StateSpaceEstimate est;
    est.a_d = cod.solve(lower);
    est.c_out = observability.topRows(l);
    est.order = d;
    est.dt = dt;
    return est;
}

/// Eigendecompose A_d and convert discrete poles to natural frequencies,
/// damping ratios and real mode shapes. Conjugate pairs are reported once;
/// unpaired real poles are kept and flagged spurious.
inline ModalSet modal_properties(const StateSpaceEstimate& est) {
    if (!(est.dt > 0.0)) throw std::invalid_argument("modal_properties: dt must be positive");
    Eigen::EigenSolver<Matrix> es(est.a_d);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("modal_properties: eigendecomposition failed");
    // reject defective A (eigenvector matrix numerically singular)
    Eigen::JacobiSVD<Eigen::MatrixXcd> vsvd(es.eigenvectors());
    if (vsvd.singularValues()(vsvd.singularValues().size() - 1) <
        1e-10 * vsvd.singularValues()(0))
        throw std::runtime_error("modal_properties: state matrix is defective (not diagonalizable)");

    struct Pole {
        double freq_hz;
        double zeta;
        Vector shape;
        bool spurious;
    };
    std::vector<Pole> poles;
    for (Index i = 0; i < est.order; ++i) {
        std::complex<double> lambda = es.eigenvalues()(i);
        if (std::abs(lambda) == 0.0) {
            std::cerr << "modal_properties: skipping zero eigenvalue (log undefined)\n";
            continue;
        }
        const bool real_pole = lambda.imag() == 0.0;
        if (lambda.imag() < 0.0) continue;  // conjugate partner carries the pair
        std::complex<double> mu = std::log(lambda);
        double mag = std::abs(mu);
        if (mag == 0.0) {
            std::cerr << "modal_properties: skipping pole at unity (zero continuous pole)\n";
            continue;
        }
        double omega = mag / est.dt;  // rad/s
        double zeta = -mu.real() / mag;
        Eigen::VectorXcd shape_c = est.c_out * es.eigenvectors().col(i);
        // rotate out the arbitrary eigenvector phase: largest component real
        // and positive, so shapes are comparable across orders and solvers
        Index imax = 0;
        shape_c.cwiseAbs().maxCoeff(&imax);
        if (std::abs(shape_c(imax)) > 0.0)
            shape_c *= std::conj(shape_c(imax)) / std::abs(shape_c(imax));
        poles.push_back({omega / (2.0 * M_PI), zeta, shape_c.real(), real_pole});
    }
    std::sort(poles.begin(), poles.end(),
              [](const Pole& a, const Pole& b) { return a.freq_hz < b.freq_hz; });

    ModalSet out;
    out.order = est.order;
    out.mode_shapes.resize(est.c_out.rows(), static_cast<Index>(poles.size()));
    for (std::size_t m = 0; m < poles.size(); ++m) {
        out.frequencies.push_back(poles[m].freq_hz);
        out.damping_ratios.push_back(poles[m].zeta);
        out.mode_shapes.col(static_cast<Index>(m)) = poles[m].shape;
        out.spurious.push_back(poles[m].spurious);
    }
    return out;
}

}  // namespace ssikit
