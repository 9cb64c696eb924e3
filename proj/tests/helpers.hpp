#pragma once

#include <algorithm>
#include <vector>

#include "ssikit/consistency.hpp"
#include "ssikit/mdof.hpp"
#include "ssikit/rng.hpp"

namespace ssikit::testing {

/// 3DOF benchmark system: equal masses, stiffness-proportional damping.
inline MdofSystem benchmark_3dof() {
    const double k = 1e4;
    const double m = 10.0;
    MdofSystem sys;
    sys.ndof = 3;
    sys.mass_matrix = m * Matrix::Identity(3, 3);
    sys.stiffness_matrix.resize(3, 3);
    sys.stiffness_matrix << 2 * k, -k, 0, -k, 4 * k, -0.5 * k, 0, -0.5 * k, k;
    sys.damping_matrix = sys.stiffness_matrix * 1e-4;
    return sys;
}

// exact modal parameters of the benchmark system
inline constexpr double kBenchFreqs[3] = {4.74031, 6.43952, 10.6477};
inline constexpr double kBenchZetas[3] = {0.00148921, 0.00202304, 0.00334508};

/// Draw n samples from a two-block latent linear-Gaussian model.
struct SyntheticPcca {
    Matrix x;       // (d1 + d2) x n
    Matrix w1_true;
    Matrix w2_true;
};

inline SyntheticPcca synthetic_pcca(Rng& rng, Index d1, Index d2, Index d, Index n,
                                    double noise_std) {
    SyntheticPcca out;
    out.w1_true = rng.normal_matrix(d1, d);
    out.w2_true = rng.normal_matrix(d2, d);
    out.x.resize(d1 + d2, n);
    for (Index i = 0; i < n; ++i) {
        Vector z = rng.normal_vector(d);
        out.x.col(i).head(d1) = out.w1_true * z + rng.normal_vector(d1, noise_std);
        out.x.col(i).tail(d2) = out.w2_true * z + rng.normal_vector(d2, noise_std);
    }
    return out;
}

/// Longest run of consecutive sweep orders holding a fully consistent pole
/// within tol of frequency f.
inline int column_length(const ConsistencyDiagram& diagram, double f, double tol = 0.02) {
    int best = 0;
    int run = 0;
    for (Index order : diagram.orders) {
        bool hit = false;
        for (const PoleRecord& r : diagram.records)
            if (r.order == order && r.fully_consistent() && std::abs(r.freq_hz - f) / f <= tol)
                hit = true;
        run = hit ? run + 1 : 0;
        best = std::max(best, run);
    }
    return best;
}

/// Non-spurious pole frequencies, ascending; empty unless exactly `expected`.
inline std::vector<double> pair_frequencies(const ModalSet& set, std::size_t expected) {
    std::vector<double> f;
    for (std::size_t i = 0; i < set.frequencies.size(); ++i)
        if (!set.spurious[i]) f.push_back(set.frequencies[i]);
    std::sort(f.begin(), f.end());
    if (f.size() != expected) f.clear();
    return f;
}

inline double sample_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace ssikit::testing
