#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ssikit/linalg.hpp"
#include "ssikit/modal.hpp"
#include "ssikit/record.hpp"
#include "ssikit/rng.hpp"

namespace ssikit {

/// Linear MDOF system M x'' + C x' + K x = f(t).
struct MdofSystem {
    Matrix mass_matrix;       // kg
    Matrix stiffness_matrix;  // N/m
    Matrix damping_matrix;    // N s/m
    Index ndof = 0;
};

enum class OutputQuantity { Displacement, Acceleration };

struct SimulationConfig {
    double sample_rate = 1000.0;  // Hz
    Index num_samples = 8192;
    double forcing_std = 1.0;  // scaled by 1e-2 when applied
    std::uint64_t seed = 0;
    OutputQuantity output = OutputQuantity::Displacement;
    Index burn_in = 0;  // leading samples simulated then discarded
};

inline void validate(const MdofSystem& sys) {
    const Index n = sys.ndof;
    if (n < 1) throw std::invalid_argument("mdof: ndof must be positive");
    auto check_square = [n](const Matrix& m, const char* name) {
        if (m.rows() != n || m.cols() != n)
            throw std::invalid_argument(std::string("mdof: ") + name + " must be ndof x ndof");
        if (!is_symmetric(m, 1e-8))
            throw std::invalid_argument(std::string("mdof: ") + name + " must be symmetric");
    };
    check_square(sys.mass_matrix, "mass matrix");
    check_square(sys.stiffness_matrix, "stiffness matrix");
    check_square(sys.damping_matrix, "damping matrix");
    Eigen::LLT<Matrix> llt(sys.mass_matrix);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("mdof: mass matrix must be positive definite");
}

inline void validate(const SimulationConfig& config) {
    if (!(config.sample_rate > 0.0))
        throw std::invalid_argument("simulate: sample_rate must be positive");
    if (config.num_samples < 2) throw std::invalid_argument("simulate: num_samples must be >= 2");
    if (config.burn_in < 0) throw std::invalid_argument("simulate: burn_in must be >= 0");
    if (config.forcing_std < 0.0)
        throw std::invalid_argument("simulate: forcing_std must be >= 0");
}

/// Continuous first-order state matrix [[0 I]; [-M^-1 K, -M^-1 C]].
inline Matrix continuous_state_matrix(const MdofSystem& sys) {
    validate(sys);
    const Index n = sys.ndof;
    Eigen::LLT<Matrix> mass(sys.mass_matrix);
    if (mass.info() != Eigen::Success)
        throw std::runtime_error("mdof: singular mass matrix, cannot form state matrix");
    Matrix a = Matrix::Zero(2 * n, 2 * n);
    a.topRightCorner(n, n) = Matrix::Identity(n, n);
    a.bottomLeftCorner(n, n) = -mass.solve(sys.stiffness_matrix);
    a.bottomRightCorner(n, n) = -mass.solve(sys.damping_matrix);
    return a;
}

/// Modal parameters of the continuous system built from M, K, C. One entry
/// per DOF, frequencies ascending.
inline ModalSet ground_truth_modal(const MdofSystem& sys) {
    const Index n = sys.ndof;
    Matrix a = continuous_state_matrix(sys);
    Eigen::EigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("ground_truth_modal: eigendecomposition failed");

    struct Mode {
        double freq_hz;
        double zeta;
        Vector shape;
    };
    std::vector<Mode> modes;
    for (Index i = 0; i < 2 * n; ++i) {
        std::complex<double> lambda = es.eigenvalues()(i);
        if (lambda.imag() < 0.0) continue;  // one entry per conjugate pair
        double mag = std::abs(lambda);
        if (mag == 0.0) continue;
        Eigen::VectorXcd full = es.eigenvectors().col(i);
        Eigen::VectorXcd disp = full.head(n);
        // rotate so the largest displacement component is real and positive
        Index imax = 0;
        disp.cwiseAbs().maxCoeff(&imax);
        std::complex<double> pivot = disp(imax);
        if (std::abs(pivot) > 0.0) disp *= std::conj(pivot) / std::abs(pivot);
        Vector shape = disp.real();
        double norm = shape.norm();
        if (norm > 0.0) shape /= norm;
        modes.push_back({mag / (2.0 * M_PI), -lambda.real() / mag, shape});
    }
    std::sort(modes.begin(), modes.end(),
              [](const Mode& a_, const Mode& b_) { return a_.freq_hz < b_.freq_hz; });

    ModalSet out;
    out.order = 2 * n;
    out.mode_shapes.resize(n, static_cast<Index>(modes.size()));
    for (std::size_t m = 0; m < modes.size(); ++m) {
        out.frequencies.push_back(modes[m].freq_hz);
        out.damping_ratios.push_back(modes[m].zeta);
        out.mode_shapes.col(static_cast<Index>(m)) = modes[m].shape;
        out.spurious.push_back(false);
    }
    return out;
}

/// Simulate the response to zero-mean Gaussian white-noise forcing held over
/// each sample interval (zero-order hold, exact discretization). The applied
/// forcing standard deviation is config.forcing_std * 1e-2.
inline MultiChannelRecord simulate_response(const MdofSystem& sys, const SimulationConfig& config) {
    validate(sys);
    validate(config);
    const Index n = sys.ndof;
    const double dt = 1.0 / config.sample_rate;

    ModalSet truth = ground_truth_modal(sys);
    if (!truth.frequencies.empty()) {
        double f_max = truth.frequencies.back();
        if (config.sample_rate < 2.0 * f_max)
            std::cerr << "simulate_response: sample rate " << config.sample_rate
                      << " Hz is below twice the highest natural frequency (" << f_max
                      << " Hz); response will alias\n";
    }

    Matrix a_c = continuous_state_matrix(sys);
    Matrix a_d = (a_c * dt).exp();
    // B_d = A_c^-1 (A_d - I) B_c with B_c = [0; M^-1]
    Matrix b_c = Matrix::Zero(2 * n, n);
    b_c.bottomRows(n) = sys.mass_matrix.llt().solve(Matrix::Identity(n, n));
    Matrix b_d = a_c.partialPivLu().solve((a_d - Matrix::Identity(2 * n, 2 * n)) * b_c);

    Rng rng(config.seed);
    const double sigma = config.forcing_std * 1e-2;

    Matrix minv_k, minv_c, minv;
    if (config.output == OutputQuantity::Acceleration) {
        Eigen::LLT<Matrix> mass(sys.mass_matrix);
        minv = mass.solve(Matrix::Identity(n, n));
        minv_k = mass.solve(sys.stiffness_matrix);
        minv_c = mass.solve(sys.damping_matrix);
    }

    MultiChannelRecord record;
    record.dt = dt;
    record.data.resize(n, config.num_samples);
    for (Index c = 0; c < n; ++c)
        record.channel_labels.push_back("dof" + std::to_string(c + 1));

    Vector state = Vector::Zero(2 * n);
    const Index total = config.burn_in + config.num_samples;
    for (Index k = 0; k < total; ++k) {
        Vector force = rng.normal_vector(n, sigma);
        if (k >= config.burn_in) {
            Index col = k - config.burn_in;
            if (config.output == OutputQuantity::Displacement) {
                record.data.col(col) = state.head(n);
            } else {
                record.data.col(col) =
                    minv * force - minv_k * state.head(n) - minv_c * state.tail(n);
            }
        }
        state = a_d * state + b_d * force;
    }
    return record;
}

}  // namespace ssikit
