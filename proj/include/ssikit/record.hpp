#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "ssikit/linalg.hpp"

namespace ssikit {

/// Uniformly sampled multi-channel time series, channel-major (one row per
/// channel, one column per sample).
struct MultiChannelRecord {
    Matrix data;  // l x N
    double dt = 0.0;
    std::vector<std::string> channel_labels;

    Index channels() const { return data.rows(); }
    Index samples() const { return data.cols(); }
};

using OutlierMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline void validate(const MultiChannelRecord& record, bool allow_nonfinite = false) {
    if (record.channels() < 1 || record.samples() < 1)
        throw std::invalid_argument("record: needs at least one channel and one sample");
    if (!(record.dt > 0.0)) throw std::invalid_argument("record: dt must be positive");
    if (!record.channel_labels.empty() &&
        static_cast<Index>(record.channel_labels.size()) != record.channels())
        throw std::invalid_argument("record: label count does not match channel count");
    if (!allow_nonfinite && !record.data.allFinite())
        throw std::invalid_argument("record: non-finite samples present");
}

}  // namespace ssikit
