#pragma once

#include <Eigen/Dense>

#include <sstream>
#include <stdexcept>

#include "ssikit/linalg.hpp"
#include "ssikit/record.hpp"

namespace ssikit {

/// Past/future halves of the block Hankel arrangement. Block row b of the
/// past holds lag b, the future rows continue from lag j.
struct HankelPair {
    Matrix past;    // (l*j) x ncols
    Matrix future;  // (l*j) x ncols
    Index l = 0;
    Index j = 0;
    Index ncols = 0;
};

/// Block auto/cross covariances of the past and future halves.
struct CovarianceSet {
    Matrix spp;
    Matrix spf;
    Matrix sfp;
    Matrix sff;

    Index block_dim() const { return spp.rows(); }
};

/// Assemble the Hankel pair with j block rows per half. Channels are
/// mean-centered before stacking; ncols = N - 2j + 1.
inline HankelPair build_hankel(const MultiChannelRecord& record, Index j) {
    validate(record);
    if (j < 1) throw std::invalid_argument("build_hankel: j must be >= 1");
    const Index l = record.channels();
    const Index n = record.samples();
    if (n < 2 * j) {
        std::ostringstream msg;
        msg << "build_hankel: record too short (N = " << n << " < 2j = " << 2 * j << ")";
        throw std::invalid_argument(msg.str());
    }
    Matrix centered = record.data;
    for (Index c = 0; c < l; ++c) centered.row(c).array() -= centered.row(c).mean();

    HankelPair h;
    h.l = l;
    h.j = j;
    h.ncols = n - 2 * j + 1;
    h.past.resize(l * j, h.ncols);
    h.future.resize(l * j, h.ncols);
    for (Index b = 0; b < j; ++b) {
        h.past.middleRows(b * l, l) = centered.middleCols(b, h.ncols);
        h.future.middleRows(b * l, l) = centered.middleCols(b + j, h.ncols);
    }
    return h;
}

/// Block covariances scaled by 1/ncols. spf is stored once and mirrored so
/// spf = sfp^T holds exactly.
inline CovarianceSet covariances(const HankelPair& h) {
    if (h.past.rows() != h.future.rows() || h.past.cols() != h.future.cols())
        throw std::invalid_argument("covariances: past/future dimensions differ");
    if (h.ncols < 1) throw std::invalid_argument("covariances: empty Hankel pair");
    const double scale = 1.0 / static_cast<double>(h.ncols);
    CovarianceSet cov;
    cov.spp = symmetrized(scale * (h.past * h.past.transpose()));
    cov.sff = symmetrized(scale * (h.future * h.future.transpose()));
    cov.sfp = scale * (h.future * h.past.transpose());
    cov.spf = cov.sfp.transpose();
    return cov;
}

inline CovarianceSet covariances(const MultiChannelRecord& record, Index j) {
    return covariances(build_hankel(record, j));
}

}  // namespace ssikit
