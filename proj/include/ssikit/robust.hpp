#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssikit/hankel.hpp"
#include "ssikit/linalg.hpp"
#include "ssikit/projections.hpp"
#include "ssikit/rng.hpp"

namespace ssikit {

/// Student-t robust projection model. The covariance is block diagonal with
/// blocks sigma1 (rows 0..d1) and sigma2 (the rest); storing the blocks
/// separately keeps the off-block entries identically zero across updates.
struct RobustModel {
    Matrix w;   // D x d, stacked [w1; w2]
    Vector mu;  // D
    Matrix sigma1;
    Matrix sigma2;
    double nu = 5.0;
    Index d = 0;
    Index d1 = 0;

    Index dim() const { return w.rows(); }
    Index d2() const { return dim() - d1; }
    auto w1() const { return w.topRows(d1); }
    auto w2() const { return w.bottomRows(d2()); }
};

/// Posterior expectations from one E-step. The d x d posterior covariance
/// factor B^-1 is shared by all samples, so S-bar is materialized on demand.
struct EStepStats {
    Vector u_bar;        // E[u_n]
    Vector log_u_tilde;  // E[ln u_n]
    Matrix z_bar;        // d x n, E[z_n]
    Matrix b_inv;        // B^-1 with B = W^T Sigma^-1 W + I

    Index size() const { return u_bar.size(); }

    Matrix s_bar(Index i) const {
        return b_inv + u_bar(i) * (z_bar.col(i) * z_bar.col(i).transpose());
    }

    Matrix sum_s_bar() const {
        Matrix sum = static_cast<double>(size()) * b_inv;
        sum.noalias() += z_bar * u_bar.asDiagonal() * z_bar.transpose();
        return symmetrized(sum);
    }
};

enum class EmInit { CcaPerturbed, Random };

struct EmConfig {
    int max_iters = 500;
    double rel_tol = 1e-8;
    std::pair<double, double> nu_bounds{1e-3, 1e3};
    EmInit init = EmInit::CcaPerturbed;
    double perturbation_std = 0.01;
    std::uint64_t seed = 0;
    double nu_init = 5.0;
    bool freeze_nu = false;  // hold nu at nu_init for the whole run
    // Debug switch: keep an extra u-bar factor on the W S-bar W^T covariance
    // term, a nonstandard variant retained for comparison runs.
    bool sigma_update_extra_weight = false;
    std::string trace_path;  // per-iteration CSV when non-empty
};

inline void validate(const EmConfig& config) {
    if (config.max_iters < 1) throw std::invalid_argument("em: max_iters must be >= 1");
    if (!(config.rel_tol > 0.0)) throw std::invalid_argument("em: rel_tol must be positive");
    if (!(config.nu_bounds.first > 0.0) || !(config.nu_bounds.first < config.nu_bounds.second))
        throw std::invalid_argument("em: nu bounds must satisfy 0 < lo < hi");
    if (config.perturbation_std < 0.0)
        throw std::invalid_argument("em: perturbation_std must be >= 0");
    if (!(config.nu_init > 0.0)) throw std::invalid_argument("em: nu_init must be positive");
}

inline void validate(const RobustModel& model) {
    const Index dim = model.w.rows();
    if (model.d != model.w.cols() || model.d < 1)
        throw std::invalid_argument("robust model: weight matrix does not match latent dimension");
    if (model.mu.size() != dim)
        throw std::invalid_argument("robust model: mean length does not match data dimension");
    if (model.d1 < 1 || model.d1 >= dim)
        throw std::invalid_argument("robust model: invalid block split");
    if (model.sigma1.rows() != model.d1 || model.sigma2.rows() != model.d2())
        throw std::invalid_argument("robust model: covariance blocks do not match block split");
    if (!(model.nu > 0.0)) throw std::invalid_argument("robust model: nu must be positive");
}

namespace detail {

/// Cholesky factors of the two covariance blocks, with failures attributed
/// to A = Sigma + W W^T (the matrix whose inverse they feed).
struct BlockFactors {
    Eigen::LLT<Matrix> llt1;
    Eigen::LLT<Matrix> llt2;

    explicit BlockFactors(const RobustModel& model)
        : llt1(symmetrized(model.sigma1)), llt2(symmetrized(model.sigma2)) {
        if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success)
            throw std::runtime_error(
                "e_step: A = Sigma + W W^T is not positive definite (covariance block " +
                std::string(llt1.info() != Eigen::Success ? "1" : "2") + " failed Cholesky)");
    }

    Matrix solve(const RobustModel& model, const Matrix& rhs) const {
        Matrix out(rhs.rows(), rhs.cols());
        out.topRows(model.d1) = llt1.solve(rhs.topRows(model.d1));
        out.bottomRows(model.d2()) = llt2.solve(rhs.bottomRows(model.d2()));
        return out;
    }

    double log_det() const {
        double ld = 0.0;
        for (Index i = 0; i < llt1.matrixL().rows(); ++i)
            ld += 2.0 * std::log(llt1.matrixL()(i, i));
        for (Index i = 0; i < llt2.matrixL().rows(); ++i)
            ld += 2.0 * std::log(llt2.matrixL()(i, i));
        return ld;
    }
};

}  // namespace detail

/// Posterior expectations of the latent variables given the data. The
/// Mahalanobis distances under A = Sigma + W W^T are computed through the
/// Woodbury identity so A itself is never formed.
inline EStepStats e_step(const RobustModel& model, const Matrix& x) {
    validate(model);
    if (x.rows() != model.dim())
        throw std::invalid_argument("e_step: data dimension does not match model");
    const Index n = x.cols();
    if (n < 1) throw std::invalid_argument("e_step: need at least one sample");
    const double dim = static_cast<double>(model.dim());

    detail::BlockFactors sigma(model);
    Matrix centered = x.colwise() - model.mu;
    Matrix sig_inv_x = sigma.solve(model, centered);        // Sigma^-1 (x - mu)
    Matrix sig_inv_w = sigma.solve(model, model.w);         // Sigma^-1 W
    Matrix b = model.w.transpose() * sig_inv_w;             // W^T Sigma^-1 W
    b.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt_b(symmetrized(b));
    if (llt_b.info() != Eigen::Success)
        throw std::runtime_error(
            "e_step: B = W^T Sigma^-1 W + I is not positive definite");

    Matrix wtsx = sig_inv_w.transpose() * centered;  // W^T Sigma^-1 (x - mu), d x n
    EStepStats stats;
    stats.z_bar = llt_b.solve(wtsx);
    stats.b_inv = llt_b.solve(Matrix::Identity(model.d, model.d));

    // delta_n = (x-mu)^T A^-1 (x-mu) = (x-mu)^T Sigma^-1 (x-mu) - s^T B^-1 s
    Vector delta = (centered.array() * sig_inv_x.array()).colwise().sum().transpose();
    delta -= (wtsx.array() * stats.z_bar.array()).colwise().sum().transpose().matrix();
    delta = delta.cwiseMax(0.0);

    stats.u_bar.resize(n);
    stats.log_u_tilde.resize(n);
    const double shape = 0.5 * (dim + model.nu);
    const double psi_shape = digamma(shape);
    for (Index i = 0; i < n; ++i) {
        stats.u_bar(i) = (dim + model.nu) / (delta(i) + model.nu);
        stats.log_u_tilde(i) = psi_shape - std::log(0.5 * (delta(i) + model.nu));
    }
    return stats;
}

/// g(nu) whose root is the degrees-of-freedom update.
inline double nu_objective(const EStepStats& stats, double nu) {
    const double mean_term = (stats.log_u_tilde - stats.u_bar).mean();
    return 1.0 + std::log(0.5 * nu) - 2.0 * digamma(0.5 * nu) + mean_term;
}

/// Solve the degrees-of-freedom stationarity condition by bisection. The
/// bounds are widened once by 10x each side if they fail to bracket a root.
inline double solve_nu(const EStepStats& stats, std::pair<double, double> bounds) {
    if (!(bounds.first > 0.0) || !(bounds.first < bounds.second))
        throw std::invalid_argument("solve_nu: bounds must satisfy 0 < lo < hi");
    double lo = bounds.first;
    double hi = bounds.second;
    double g_lo = nu_objective(stats, lo);
    double g_hi = nu_objective(stats, hi);
    if (g_lo * g_hi > 0.0) {
        lo *= 0.1;
        hi *= 10.0;
        g_lo = nu_objective(stats, lo);
        g_hi = nu_objective(stats, hi);
        if (g_lo * g_hi > 0.0) {
            std::ostringstream msg;
            msg << "solve_nu: no sign change in (" << lo << ", " << hi << "); g(lo) = " << g_lo
                << ", g(hi) = " << g_hi;
            throw std::runtime_error(msg.str());
        }
    }
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 400; ++iter) {
        mid = 0.5 * (lo + hi);
        double g_mid = nu_objective(stats, mid);
        if (std::abs(g_mid) < 1e-10) return mid;
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

namespace detail {

/// Terms of the expected complete log-likelihood that depend on nu, per
/// sample. Used to keep the nu sub-step an ascent step.
inline double q_nu_terms(double nu, const EStepStats& stats) {
    return 0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu) +
           0.5 * nu * (stats.log_u_tilde - stats.u_bar).mean();
}

}  // namespace detail

/// One M-step. W, mu and Sigma are updated in coordinate-ascent order; the
/// degrees-of-freedom candidate from the line search is accepted only if it
/// does not lower its terms of the expected complete log-likelihood.
inline RobustModel m_step(const Matrix& x, const EStepStats& stats, const RobustModel& old,
                          const EmConfig& config = EmConfig{}) {
    validate(old);
    const Index n = x.cols();
    if (stats.size() != n || stats.z_bar.cols() != n)
        throw std::invalid_argument("m_step: stats were not computed on this data");

    RobustModel next = old;

    // W' = (sum u (x - mu) z^T)(sum S)^-1, with the previous mean
    Matrix centered = x.colwise() - old.mu;
    Matrix zu = stats.z_bar * stats.u_bar.asDiagonal();  // d x n
    Matrix sw = centered * zu.transpose();               // D x d
    Matrix ss = stats.sum_s_bar();
    Eigen::LLT<Matrix> llt_ss(ss);
    if (llt_ss.info() != Eigen::Success)
        throw std::runtime_error("m_step: sum of S-bar matrices is singular");
    next.w = llt_ss.solve(sw.transpose()).transpose();

    // mu' = sum u (x - W' z) / sum u
    const double sum_u = stats.u_bar.sum();
    if (!(sum_u > 0.0)) throw std::runtime_error("m_step: non-positive weight sum");
    next.mu = (x * stats.u_bar - next.w * (zu.rowwise().sum())) / sum_u;

    // Sigma' with the fresh W and mu, projected onto the diagonal blocks
    Matrix resid = (x.colwise() - next.mu) - next.w * stats.z_bar;
    Matrix full;
    if (!config.sigma_update_extra_weight) {
        Matrix rw = resid * stats.u_bar.cwiseSqrt().asDiagonal();
        full = rw * rw.transpose() / static_cast<double>(n);
        full.noalias() += next.w * stats.b_inv * next.w.transpose();
    } else {
        // comparison variant: every term carries u-bar, including W S-bar W^T
        Matrix centered_new = x.colwise() - next.mu;
        Matrix xu = centered_new * stats.u_bar.asDiagonal();
        Matrix wz = next.w * stats.z_bar;
        Matrix usum = stats.u_bar.sum() * stats.b_inv;
        usum.noalias() += stats.z_bar * stats.u_bar.cwiseAbs2().asDiagonal() * stats.z_bar.transpose();
        full = (xu * centered_new.transpose() - xu * wz.transpose() -
                wz * xu.transpose()) / static_cast<double>(n);
        full.noalias() += next.w * (usum / static_cast<double>(n)) * next.w.transpose();
    }
    next.sigma1 = symmetrized(full.topLeftCorner(old.d1, old.d1));
    next.sigma2 = symmetrized(full.bottomRightCorner(old.d2(), old.d2()));

    if (!config.freeze_nu) {
        double candidate = solve_nu(stats, config.nu_bounds);
        if (detail::q_nu_terms(candidate, stats) >= detail::q_nu_terms(old.nu, stats))
            next.nu = candidate;
    }
    return next;
}

/// Expected complete log-likelihood under the given posterior statistics,
/// normalized per sample.
inline double q_function(const RobustModel& model, const Matrix& x, const EStepStats& stats) {
    validate(model);
    const Index n = x.cols();
    if (stats.size() != n)
        throw std::invalid_argument("q_function: stats were not computed on this data");
    const double dim = static_cast<double>(model.dim());

    detail::BlockFactors sigma(model);
    const double log_det = sigma.log_det();
    if (!std::isfinite(log_det))
        throw std::runtime_error("q_function: log-determinant of Sigma is not finite");

    Matrix centered = x.colwise() - model.mu;
    Matrix sig_inv_x = sigma.solve(model, centered);
    Matrix sig_inv_w = sigma.solve(model, model.w);
    Matrix gram = model.w.transpose() * sig_inv_w;  // W^T Sigma^-1 W
    Matrix wtsx = sig_inv_w.transpose() * centered;

    Vector maha = (centered.array() * sig_inv_x.array()).colwise().sum().transpose();
    Vector cross = (wtsx.array() * stats.z_bar.array()).colwise().sum().transpose();
    Vector zgz = (stats.z_bar.array() * (gram * stats.z_bar).array()).colwise().sum().transpose();
    Vector znorm = stats.z_bar.colwise().squaredNorm().transpose();

    const double tr_binv = stats.b_inv.trace();
    const double tr_gram_binv = (gram * stats.b_inv).trace();
    const double half_nu = 0.5 * model.nu;
    const double nu_const = half_nu * std::log(half_nu) - std::lgamma(half_nu);

    double q = 0.0;
    for (Index i = 0; i < n; ++i) {
        double u = stats.u_bar(i);
        double lu = stats.log_u_tilde(i);
        q += -dim * std::log(2.0 * M_PI) + dim * lu;
        q += -0.5 * (tr_binv + u * znorm(i));
        q += nu_const + half_nu * (lu - u);
        q += -0.5 * log_det;
        q += -0.5 * u * maha(i) + u * cross(i);
        q += -0.5 * (tr_gram_binv + u * zgz(i));
    }
    q /= static_cast<double>(n);
    if (!std::isfinite(q))
        throw std::runtime_error("q_function: expected log-likelihood is not finite");
    return q;
}

struct EmIteration {
    double q_before = 0.0;  // Q(theta_k) under the iteration's statistics
    double q_after = 0.0;   // Q(theta_k+1) under the same statistics
    double nu = 0.0;
    double max_dw = 0.0;
};

struct FitResult {
    RobustModel model;
    bool converged = false;
    int iterations = 0;
    double final_q = 0.0;
    std::vector<EmIteration> trace;
};

/// Fit the robust projection model by EM. The data are rescaled to unit RMS
/// internally so the identity-scale inverse-Wishart covariance init matches
/// the data; fitted parameters are mapped back on exit.
///
/// init_cov, when given, supplies the block covariances used for the
/// CCA-based weight initialization; otherwise they are estimated from x.
inline FitResult fit(const Matrix& x, Index d1, Index d, const EmConfig& config,
                     const CovarianceSet* init_cov = nullptr) {
    validate(config);
    const Index dim = x.rows();
    const Index n = x.cols();
    const Index d2 = dim - d1;
    if (d1 < 1 || d2 < 1) throw std::invalid_argument("fit: invalid block split");
    if (d < 1 || d > std::min(d1, d2))
        throw std::invalid_argument("fit: latent dimension must be in [1, min(D1, D2)]");
    if (n < 2) throw std::invalid_argument("fit: need at least two samples");

    // standardize
    Matrix xs = x;
    double scale = 0.0;
    {
        Vector row_mean = xs.rowwise().mean();
        scale = std::sqrt((xs.colwise() - row_mean).squaredNorm() /
                          static_cast<double>(dim * n));
        if (!(scale > 0.0)) scale = 1.0;
        xs /= scale;
    }

    Rng rng(config.seed);
    RobustModel model;
    model.d = d;
    model.d1 = d1;
    model.mu = Vector::Zero(dim);
    model.nu = config.nu_init;
    model.sigma1 = rng.inverse_wishart_identity(d1, static_cast<double>(d1) + 2.0);
    model.sigma2 = rng.inverse_wishart_identity(d2, static_cast<double>(d2) + 2.0);

    if (config.init == EmInit::CcaPerturbed) {
        CovarianceSet cov;
        if (init_cov) {
            const double s2 = scale * scale;
            cov.sff = init_cov->sff / s2;
            cov.spp = init_cov->spp / s2;
            cov.sfp = init_cov->sfp / s2;
            cov.spf = init_cov->spf / s2;
        } else {
            Matrix centered = xs.colwise() - xs.rowwise().mean();
            Matrix top = centered.topRows(d1);
            Matrix bottom = centered.bottomRows(d2);
            const double inv_n = 1.0 / static_cast<double>(n);
            cov.sff = symmetrized(inv_n * (top * top.transpose()));
            cov.spp = symmetrized(inv_n * (bottom * bottom.transpose()));
            cov.sfp = inv_n * (top * bottom.transpose());
            cov.spf = cov.sfp.transpose();
        }
        ProjectionModel mle = pcca_mle(cov, d);
        model.w.resize(dim, d);
        model.w.topRows(d1) = mle.w1;
        model.w.bottomRows(d2) = mle.w2;
        if (config.perturbation_std > 0.0)
            model.w += rng.normal_matrix(dim, d, config.perturbation_std);
    } else {
        model.w = rng.normal_matrix(dim, d);
    }

    FitResult result;
    double prev_q = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < config.max_iters; ++iter) {
        EStepStats stats = e_step(model, xs);
        double q_before = q_function(model, xs, stats);
        RobustModel next = m_step(xs, stats, model, config);
        double q_after = q_function(next, xs, stats);

        EmIteration it;
        it.q_before = q_before;
        it.q_after = q_after;
        it.nu = next.nu;
        it.max_dw = (next.w - model.w).cwiseAbs().maxCoeff();
        result.trace.push_back(it);

        model = std::move(next);
        result.iterations = iter + 1;
        if (std::isfinite(prev_q) &&
            std::abs(q_after - prev_q) < config.rel_tol * std::abs(q_after)) {
            result.converged = true;
            result.final_q = q_after;
            break;
        }
        prev_q = q_after;
        result.final_q = q_after;
    }

    // map back to the original data scale
    model.w *= scale;
    model.mu *= scale;
    model.sigma1 *= scale * scale;
    model.sigma2 *= scale * scale;
    result.model = std::move(model);

    if (!config.trace_path.empty()) {
        std::ofstream out(config.trace_path);
        out << "iteration,q,nu,max_dw\n";
        for (std::size_t i = 0; i < result.trace.size(); ++i)
            out << i << ',' << result.trace[i].q_after << ',' << result.trace[i].nu << ','
                << result.trace[i].max_dw << '\n';
    }
    return result;
}

/// Canonical directions and correlations recovered from a fitted model.
struct CanonicalStructure {
    Matrix u1;            // D1 x d canonical directions, block 1
    Matrix u2;            // D2 x d canonical directions, block 2
    Vector correlations;  // descending, in (0, 1)
    Matrix r1;            // d x d rotations diagonalizing J1 / J2
    Matrix r2;
};

/// Post-processing step resolving the rotational ambiguity of EM-recovered
/// weights: eigendecompose J1 = (I-B1^-1)^1/2 (I-B2^-1) (I-B1^-1)^1/2 (and
/// the 1<->2 counterpart) and map the weights to canonical directions.
inline CanonicalStructure recover_rotation(const RobustModel& model) {
    validate(model);
    const Index d = model.d;
    detail::BlockFactors sigma(model);

    Matrix w1 = model.w1();
    Matrix w2 = model.w2();
    Matrix sinv_w1 = sigma.llt1.solve(w1);
    Matrix sinv_w2 = sigma.llt2.solve(w2);

    auto contraction = [d](const Matrix& w, const Matrix& sinv_w) {
        Matrix b = w.transpose() * sinv_w;
        b.diagonal().array() += 1.0;
        Eigen::LLT<Matrix> llt(symmetrized(b));
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("recover_rotation: B block is not positive definite");
        Matrix c = Matrix::Identity(d, d) - llt.solve(Matrix::Identity(d, d));
        return symmetrized(c);
    };
    Matrix c1 = contraction(w1, sinv_w1);  // I - B1^-1
    Matrix c2 = contraction(w2, sinv_w2);

    Eigen::SelfAdjointEigenSolver<Matrix> es1(c1);
    Eigen::SelfAdjointEigenSolver<Matrix> es2(c2);
    const double floor1 = 1e-12 * std::max(es1.eigenvalues().maxCoeff(), 1e-300);
    const double floor2 = 1e-12 * std::max(es2.eigenvalues().maxCoeff(), 1e-300);
    if (es1.eigenvalues().minCoeff() <= floor1 || es2.eigenvalues().minCoeff() <= floor2)
        throw std::runtime_error(
            "recover_rotation: I - B^-1 is not positive definite (degenerate latent dimension)");
    auto half = [](const Eigen::SelfAdjointEigenSolver<Matrix>& es, double power) {
        return Matrix(es.eigenvectors() *
                      es.eigenvalues().array().pow(power).matrix().asDiagonal() *
                      es.eigenvectors().transpose());
    };
    Matrix c1_h = half(es1, 0.5);
    Matrix c2_h = half(es2, 0.5);

    auto rotation_of = [d](const Matrix& j) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(j));
        Matrix vecs(d, d);
        Vector vals(d);
        for (Index i = 0; i < d; ++i) {  // descending
            vecs.col(i) = es.eigenvectors().col(d - 1 - i);
            vals(i) = es.eigenvalues()(d - 1 - i);
        }
        fix_column_signs(vecs);
        return std::make_pair(vecs, vals);
    };
    auto [r1, vals1] = rotation_of(c1_h * c2 * c1_h);
    auto [r2, vals2] = rotation_of(c2_h * c1 * c2_h);

    CanonicalStructure out;
    out.r1 = r1;
    out.r2 = r2;
    out.correlations = vals1.cwiseMax(0.0).cwiseSqrt();
    out.u1 = sinv_w1 * half(es1, -0.5) * r1;
    out.u2 = sinv_w2 * half(es2, -0.5) * r2;
    return out;
}

}  // namespace ssikit
