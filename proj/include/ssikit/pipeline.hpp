#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssikit/hankel.hpp"
#include "ssikit/modal.hpp"
#include "ssikit/projections.hpp"
#include "ssikit/record.hpp"
#include "ssikit/robust.hpp"

namespace ssikit {

enum class SsiMethod { Cov, Robust };

/// Observability estimate from a fitted robust model, aligned with the
/// canonical structure so the consistency diagram is formed the usual way.
/// The model-implied future covariance maps the canonical directions back to
/// the data space; for a model at the exact closed-form optimum the result
/// equals the observability factor of the cross covariance up to the
/// invertible diagonal (I - P) P^1/2, and modal extraction is invariant to
/// any invertible right factor. That diagonal is left out: correlations
/// saturate at 1 on heavily corrupted records and would zero out columns.
inline Matrix robust_observability(const RobustModel& model, const CanonicalStructure& cs) {
    Matrix sigma_ff = model.sigma1 + model.w1() * model.w1().transpose();
    return sigma_ff * cs.u1 * cs.r1.transpose();
}

/// Per-order seed so independent orders stay reproducible.
inline std::uint64_t order_seed(std::uint64_t base_seed, Index order) {
    return base_seed + static_cast<std::uint64_t>(order);
}

/// Run the identification pipeline over the requested model orders. For
/// method Cov the observability comes from the whitened SVD; for Robust a
/// Student-t model is fitted per order on the stacked [future; past] Hankel
/// columns and the recovered canonical structure forms the observability.
inline std::vector<ModalSet> run_ssi(const MultiChannelRecord& record, Index j,
                                     const std::vector<Index>& orders, SsiMethod method,
                                     const EmConfig& em = EmConfig{}) {
    validate(record);
    HankelPair h = build_hankel(record, j);
    CovarianceSet cov = covariances(h);
    const Index block = h.l * j;
    for (Index order : orders)
        if (order < 1 || order > block)
            throw std::invalid_argument("run_ssi: order " + std::to_string(order) +
                                        " outside [1, l*j]");

    Matrix stacked;
    if (method == SsiMethod::Robust) {
        stacked.resize(2 * block, h.ncols);
        stacked.topRows(block) = h.future;
        stacked.bottomRows(block) = h.past;
    }

    std::vector<ModalSet> out;
    for (Index order : orders) {
        try {
            Matrix observability;
            if (method == SsiMethod::Cov) {
                CcaResult c = cca(cov, order);
                observability = subspaces(c, cov).observability;
            } else {
                EmConfig cfg = em;
                cfg.seed = order_seed(em.seed, order);
                FitResult fitted = fit(stacked, block, order, cfg, &cov);
                CanonicalStructure cs = recover_rotation(fitted.model);
                observability = robust_observability(fitted.model, cs);
                // The t fit prunes latent directions it does not need, so the
                // observability can be numerically rank deficient above the
                // effective system order. Truncate to the live subspace; the
                // pruned directions carry no poles.
                Eigen::JacobiSVD<Matrix> svd(observability,
                                             Eigen::ComputeThinU | Eigen::ComputeThinV);
                const Vector& sv = svd.singularValues();
                Index rank = 0;
                for (Index i = 0; i < sv.size(); ++i)
                    if (sv(i) > 1e-10 * sv(0)) ++rank;
                if (rank < observability.cols() && rank > 0)
                    observability =
                        svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal();
            }
            StateSpaceEstimate est = system_matrices(observability, h.l, record.dt);
            ModalSet set = modal_properties(est);
            set.order = order;  // requested order, even when the live subspace is smaller
            out.push_back(std::move(set));
        } catch (const std::exception& e) {
            throw std::runtime_error("run_ssi: order " + std::to_string(order) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace ssikit
